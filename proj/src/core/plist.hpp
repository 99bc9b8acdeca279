#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "catalog.hpp"
#include "errors.hpp"
#include "report.hpp"

namespace onetrace {

// Property-list value tree; dictionaries keep document order.
struct PlistValue {
    enum class Type { string, integer, real, boolean, date, data, array, dict };
    Type type = Type::string;
    std::string str;  // string, date (RFC 3339)
    int64_t int_v = 0;
    double real_v = 0.0;
    bool bool_v = false;
    std::vector<uint8_t> data_v;
    std::vector<PlistValue> array_v;
    std::vector<std::pair<std::string, PlistValue>> dict_v;

    const PlistValue* dict_get(std::string_view key) const;
    // Depth-first search for a key anywhere in the tree (document order).
    const PlistValue* find_key(std::string_view key) const;
    std::string display() const;
};

// Accepts XML plists and binary plists (bplist00).
Result<PlistValue> parse_plist(ByteSpan bytes);

// iTunesMetadata.plist: Apple ID and purchase date, wherever the store
// nests them.
Result<std::vector<Finding>> parse_itunes_metadata(ByteSpan bytes, const EvidenceSource& source,
                                                   const Catalog& catalog);

}  // namespace onetrace
