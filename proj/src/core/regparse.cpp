#include "regparse.hpp"

#include <algorithm>

#include "bytes.hpp"

namespace onetrace {

namespace {

constexpr std::string_view kHeader = "Windows Registry Editor Version 5.00";
constexpr uint64_t kFiletimeEpochDelta = 11644473600ull;  // 1601 -> 1970 in seconds

std::string decode_input_text(ByteSpan bytes) {
    if (bytes.size() >= 2 && bytes[0] == 0xFF && bytes[1] == 0xFE) {
        std::string out;
        out.reserve(bytes.size() / 2);
        for (size_t i = 2; i + 1 < bytes.size(); i += 2) {
            uint16_t u = read_le16(bytes.data() + i);
            if (u == 0) break;
            if (u < 0x80) {
                out.push_back(static_cast<char>(u));
            } else if (u < 0x800) {
                out.push_back(static_cast<char>(0xC0 | u >> 6));
                out.push_back(static_cast<char>(0x80 | (u & 0x3F)));
            } else {
                out.push_back(static_cast<char>(0xE0 | u >> 12));
                out.push_back(static_cast<char>(0x80 | (u >> 6 & 0x3F)));
                out.push_back(static_cast<char>(0x80 | (u & 0x3F)));
            }
        }
        return out;
    }
    size_t start = 0;
    if (bytes.size() >= 3 && bytes[0] == 0xEF && bytes[1] == 0xBB && bytes[2] == 0xBF) start = 3;
    return std::string(as_text(bytes.subspan(start)));
}

std::string unescape_reg_string(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '\\' && i + 1 < s.size()) {
            out.push_back(s[i + 1]);
            ++i;
        } else {
            out.push_back(s[i]);
        }
    }
    return out;
}

bool key_suffix_matches(std::string_view key_path, std::string_view suffix) {
    if (key_path.size() < suffix.size()) return false;
    std::string_view tail = key_path.substr(key_path.size() - suffix.size());
    if (!iequals(tail, suffix)) return false;
    if (key_path.size() == suffix.size()) return true;
    return key_path[key_path.size() - suffix.size() - 1] == '\\';
}

bool key_matches_rule(std::string_view key_path, const CatalogRule& rule) {
    std::string want = rule.payload.value("key", "");
    if (rule.payload.value("match", "exact") == std::string("suffix"))
        return key_suffix_matches(key_path, want);
    return iequals(key_path, want);
}

// Host portion of a URL, lowercased.
std::string url_host(std::string_view url) {
    size_t scheme = url.find("://");
    size_t start = scheme == std::string_view::npos ? 0 : scheme + 3;
    size_t end = url.find_first_of("/:?#", start);
    return ascii_lower(url.substr(start, end == std::string_view::npos ? std::string_view::npos
                                                                        : end - start));
}

Finding base_finding(const CatalogRule& rule, const EvidenceSource& source) {
    Finding f;
    f.rule_id = rule.rule_id;
    f.category = rule.category;
    f.platform = rule.platform;
    f.confidence = rule.confidence;
    f.source = source;
    return f;
}

}  // namespace

std::string filetime_to_rfc3339(uint64_t filetime) {
    uint64_t seconds = filetime / 10'000'000ull;
    int64_t unix_seconds = static_cast<int64_t>(seconds) -
                           static_cast<int64_t>(kFiletimeEpochDelta);
    return rfc3339_from_unix(unix_seconds);
}

std::vector<uint32_t> decode_mrulistex(ByteSpan data) {
    std::vector<uint32_t> indices;
    for (size_t i = 0; i + 4 <= data.size(); i += 4) {
        uint32_t v = read_le32(data.data() + i);
        if (v == 0xFFFFFFFFu) break;
        indices.push_back(v);
    }
    return indices;
}

std::string utf16le_to_string(ByteSpan data) {
    std::string out;
    for (size_t i = 0; i + 1 < data.size(); i += 2) {
        uint16_t u = read_le16(data.data() + i);
        if (u == 0) break;
        if (u < 0x80) {
            out.push_back(static_cast<char>(u));
        } else if (u < 0x800) {
            out.push_back(static_cast<char>(0xC0 | u >> 6));
            out.push_back(static_cast<char>(0x80 | (u & 0x3F)));
        } else {
            out.push_back(static_cast<char>(0xE0 | u >> 12));
            out.push_back(static_cast<char>(0x80 | (u >> 6 & 0x3F)));
            out.push_back(static_cast<char>(0x80 | (u & 0x3F)));
        }
    }
    return out;
}

Result<RegParse> parse_reg_export(ByteSpan bytes, const EvidenceSource& source,
                                  const Catalog& catalog) {
    std::string text = decode_input_text(bytes);
    auto lines = split_lines(text);

    size_t i = 0;
    while (i < lines.size() && trim_view(lines[i]).empty()) ++i;
    if (i >= lines.size() || trim_view(lines[i]) != kHeader)
        return make_error("bad-header",
                          "expected '" + std::string(kHeader) + "' on the first line");
    ++i;

    RegParse out;
    RegKey* current = nullptr;

    auto parse_hex_bytes = [&](std::string_view first, size_t& line_idx,
                               const std::string& key_path)
        -> Result<std::vector<uint8_t>> {
        std::string joined(first);
        while (!joined.empty() && trim_view(joined).ends_with("\\")) {
            joined = std::string(trim_view(joined));
            joined.pop_back();
            ++line_idx;
            if (line_idx >= lines.size())
                return make_error("malformed-hex",
                                  "unterminated hex continuation in key '" + key_path + "'");
            joined += std::string(trim_view(lines[line_idx]));
        }
        std::vector<uint8_t> data;
        size_t p = 0;
        while (p < joined.size()) {
            while (p < joined.size() && (joined[p] == ',' || joined[p] == ' ')) ++p;
            if (p >= joined.size()) break;
            if (p + 2 > joined.size())
                return make_error("malformed-hex", "dangling nibble in key '" + key_path + "'");
            auto byte = from_hex(std::string_view(joined).substr(p, 2));
            if (!byte)
                return make_error("malformed-hex",
                                  "bad hex digits in key '" + key_path + "'");
            data.push_back((*byte)[0]);
            p += 2;
        }
        return data;
    };

    for (; i < lines.size(); ++i) {
        std::string_view line = trim_view(lines[i]);
        if (line.empty() || line.front() == ';') continue;

        if (line.front() == '[') {
            size_t close = line.rfind(']');
            if (close == std::string_view::npos || close <= 1) continue;
            std::string path(line.substr(1, close - 1));
            if (!path.empty() && path.front() == '-') path.erase(0, 1);  // deletion marker
            out.keys.push_back(RegKey{path, {}});
            current = &out.keys.back();
            continue;
        }
        if (current == nullptr) continue;

        // "name"=value or @=value
        std::string name;
        size_t eq;
        if (line.front() == '@') {
            eq = line.find('=');
            if (eq == std::string_view::npos) continue;
        } else if (line.front() == '"') {
            size_t name_end = 1;
            while (name_end < line.size()) {
                if (line[name_end] == '\\') {
                    name_end += 2;
                    continue;
                }
                if (line[name_end] == '"') break;
                ++name_end;
            }
            if (name_end >= line.size()) continue;
            name = unescape_reg_string(line.substr(1, name_end - 1));
            eq = line.find('=', name_end);
            if (eq == std::string_view::npos) continue;
        } else {
            continue;
        }

        std::string_view rhs = trim_view(line.substr(eq + 1));
        RegValue value;
        value.name = name;
        if (!rhs.empty() && rhs.front() == '"') {
            size_t end = rhs.size() - 1;
            if (rhs.back() != '"' || end == 0) continue;
            value.type = RegValue::Type::sz;
            value.sz = unescape_reg_string(rhs.substr(1, end - 1));
        } else if (rhs.starts_with("dword:")) {
            value.type = RegValue::Type::dword;
            auto raw = from_hex(rhs.substr(6));
            if (!raw || raw->size() != 4)
                return make_error("malformed-hex",
                                  "bad dword in key '" + current->path + "'");
            value.dword = read_be32(raw->data());
        } else if (rhs.starts_with("hex")) {
            size_t colon = rhs.find(':');
            if (colon == std::string_view::npos)
                return make_error("malformed-hex",
                                  "bad hex tag in key '" + current->path + "'");
            std::string tag(rhs.substr(0, colon));
            auto data = parse_hex_bytes(rhs.substr(colon + 1), i, current->path);
            if (!data) return data.error();
            value.data = std::move(*data);
            if (tag == "hex") {
                value.type = RegValue::Type::binary;
            } else if (tag == "hex(2)") {
                value.type = RegValue::Type::expand_sz;
                value.sz = utf16le_to_string(ByteSpan{value.data.data(), value.data.size()});
            } else if (tag == "hex(7)") {
                value.type = RegValue::Type::multi_sz;
            } else if (tag == "hex(b)") {
                value.type = RegValue::Type::qword;
            } else {
                value.type = RegValue::Type::other;
                value.raw_type = tag;
            }
        } else {
            continue;
        }
        current->values.push_back(std::move(value));
    }

    // ---- evidence extraction over the parsed keys -------------------------

    const CatalogRule* typedurls = catalog.find("win.reg.typedurls");
    const CatalogRule* typedurlstime = catalog.find("win.reg.typedurlstime");
    const CatalogRule* recentdocs = catalog.find("win.reg.recentdocs");
    const CatalogRule* diagnostic = catalog.find("core.diagnostic");

    // TypedURLsTime entries keyed by value name (url1, url2, ...).
    std::vector<std::pair<std::string, std::string>> typed_times;
    if (typedurlstime) {
        for (const auto& key : out.keys) {
            if (!key_matches_rule(key.path, *typedurlstime)) continue;
            for (const auto& v : key.values) {
                if (v.data.size() != 8) continue;
                uint64_t ft = read_le64(v.data.data());
                std::string when = filetime_to_rfc3339(ft);
                typed_times.emplace_back(v.name, when);
                out.decoded.push_back(RegistryFinding{key.path, v.name, when, v.data});
            }
        }
    }
    auto typed_time_for = [&](const std::string& name) -> std::string {
        for (const auto& [n, t] : typed_times)
            if (iequals(n, name)) return t;
        return {};
    };

    for (const auto& key : out.keys) {
        // Presence rules (exact keys, and value-content rules like Run).
        for (const auto& rule : catalog.rules()) {
            if (rule.kind != RuleKind::registry_key) continue;
            if (&rule == typedurls || &rule == typedurlstime || &rule == recentdocs) continue;
            if (!key_matches_rule(key.path, rule)) continue;
            std::string needle = rule.payload.value("value_contains", "");
            if (needle.empty()) {
                Finding f = base_finding(rule, source);
                f.set_attr("registry-key", key.path);
                out.findings.push_back(std::move(f));
                continue;
            }
            for (const auto& v : key.values) {
                if (v.sz.empty() || !icontains(v.sz, needle)) continue;
                Finding f = base_finding(rule, source);
                f.set_attr("registry-key", key.path);
                if (!v.name.empty()) f.set_attr("registry-value", v.name);
                f.set_attr("detail", v.sz);
                out.findings.push_back(std::move(f));
                out.decoded.push_back(RegistryFinding{key.path, v.name, v.sz, {}});
            }
        }

        // TypedURLs: typed service URLs, annotated with their FILETIME.
        if (typedurls && key_matches_rule(key.path, *typedurls)) {
            for (const auto& v : key.values) {
                if (v.type != RegValue::Type::sz || v.sz.empty()) continue;
                out.decoded.push_back(RegistryFinding{key.path, v.name, v.sz, {}});
                bool matched = false;
                std::string host = url_host(v.sz);
                for (const auto& hr : catalog.rules()) {
                    if (hr.kind == RuleKind::hostname &&
                        hostname_matches(hr.payload.value("host", ""), host))
                        matched = true;
                    if (hr.kind == RuleKind::url_prefix) {
                        std::string prefix = hr.payload.value("prefix", "");
                        if (!prefix.empty() && v.sz.size() >= prefix.size() &&
                            iequals(std::string_view(v.sz).substr(0, prefix.size()), prefix))
                            matched = true;
                    }
                }
                if (!matched) continue;
                Finding f = base_finding(*typedurls, source);
                f.set_attr("registry-key", key.path);
                f.set_attr("registry-value", v.name);
                f.set_attr("url", v.sz);
                std::string when = typed_time_for(v.name);
                if (!when.empty()) f.set_attr("timestamp", when);
                out.findings.push_back(std::move(f));
            }
        }

        // RecentDocs: MRUListEx ordering over UTF-16LE item names.
        if (recentdocs && key_matches_rule(key.path, *recentdocs)) {
            const RegValue* mru = nullptr;
            for (const auto& v : key.values)
                if (iequals(v.name, "MRUListEx")) mru = &v;
            if (mru == nullptr) continue;
            auto order = decode_mrulistex(ByteSpan{mru->data.data(), mru->data.size()});
            {
                std::string disp;
                for (size_t k = 0; k < order.size(); ++k)
                    disp += (k ? "," : "") + std::to_string(order[k]);
                out.decoded.push_back(RegistryFinding{key.path, mru->name, disp, mru->data});
            }
            size_t rank = 0;
            for (uint32_t index : order) {
                const RegValue* item = nullptr;
                std::string item_name = std::to_string(index);
                for (const auto& v : key.values)
                    if (v.name == item_name) item = &v;
                if (item == nullptr || item->data.empty()) {
                    // Index with no backing item: reported, never fabricated.
                    if (diagnostic) {
                        Finding f = base_finding(*diagnostic, source);
                        f.set_attr("error", "mru-index-missing");
                        f.set_attr("detail", "MRUListEx index " + item_name +
                                                 " has no item value");
                        f.set_attr("path", key.path);
                        out.findings.push_back(std::move(f));
                    }
                    continue;
                }
                std::string name =
                    utf16le_to_string(ByteSpan{item->data.data(), item->data.size()});
                if (name.empty()) continue;
                out.decoded.push_back(RegistryFinding{key.path, item_name, name, item->data});
                Finding f = base_finding(*recentdocs, source);
                f.set_attr("filename", name);
                f.set_attr("operation", "recent-open");
                f.set_attr("mru-index", std::to_string(rank));
                f.set_attr("path", key.path);
                out.findings.push_back(std::move(f));
                ++rank;
            }
        }
    }
    return out;
}

}  // namespace onetrace
