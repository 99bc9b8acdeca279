#pragma once

namespace onetrace {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr const char* kBuiltinCatalogVersion = "ubuntuone-2014.04-builtin";

}  // namespace onetrace
