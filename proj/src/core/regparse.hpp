#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "catalog.hpp"
#include "errors.hpp"
#include "report.hpp"

namespace onetrace {

struct RegValue {
    std::string name;  // empty for the default (@) value
    enum class Type { sz, expand_sz, multi_sz, dword, qword, binary, other };
    Type type = Type::sz;
    std::string sz;              // sz/expand_sz
    uint32_t dword = 0;
    std::vector<uint8_t> data;   // binary payload (also backs multi_sz/qword)
    std::string raw_type;        // original hex(N) tag for `other`
};

struct RegKey {
    std::string path;
    std::vector<RegValue> values;
};

// One decoded value of evidentiary interest, with the raw bytes it came from.
struct RegistryFinding {
    std::string key_path;
    std::string value_name;
    std::string decoded;
    std::vector<uint8_t> raw;
};

struct RegParse {
    std::vector<RegKey> keys;
    std::vector<RegistryFinding> decoded;
    std::vector<Finding> findings;
};

// Windows Registry Editor 5.00 export format, UTF-16LE or UTF-8 (BOM
// accepted on both).
Result<RegParse> parse_reg_export(ByteSpan bytes, const EvidenceSource& source,
                                  const Catalog& catalog);

// FILETIME: 100 ns ticks since 1601-01-01 UTC.
std::string filetime_to_rfc3339(uint64_t filetime);

// Little-endian 32-bit index list terminated by 0xFFFFFFFF.
std::vector<uint32_t> decode_mrulistex(ByteSpan data);

// UTF-16LE text up to the first NUL unit.
std::string utf16le_to_string(ByteSpan data);

}  // namespace onetrace
