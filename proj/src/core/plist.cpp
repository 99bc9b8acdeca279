#include "plist.hpp"

#include <cmath>
#include <cstring>

namespace onetrace {

namespace {

Error malformed(const std::string& why, std::optional<uint64_t> offset = std::nullopt) {
    return make_error("malformed-plist", why, offset);
}

// Seconds between 1970-01-01 and the Core Data epoch 2001-01-01.
constexpr int64_t kAppleEpochOffset = 978307200;

// ---------------------------------------------------------------- binary ---

class BinaryPlistReader {
public:
    explicit BinaryPlistReader(ByteSpan data) : data_(data) {}

    Result<PlistValue> parse() {
        if (data_.size() < 40) return malformed("binary plist too short");
        const uint8_t* trailer = data_.data() + data_.size() - 32;
        offset_int_size_ = trailer[6];
        object_ref_size_ = trailer[7];
        num_objects_ = read_be64(trailer + 8);
        top_object_ = read_be64(trailer + 16);
        offset_table_ = read_be64(trailer + 24);
        if (offset_int_size_ < 1 || offset_int_size_ > 8 || object_ref_size_ < 1 ||
            object_ref_size_ > 8)
            return malformed("bad trailer sizes");
        if (num_objects_ == 0 || top_object_ >= num_objects_)
            return malformed("bad object count");
        if (offset_table_ + num_objects_ * offset_int_size_ + 32 > data_.size())
            return malformed("offset table out of range", offset_table_);
        return object(top_object_, 0);
    }

private:
    uint64_t offset_of(uint64_t index) const {
        const uint8_t* p = data_.data() + offset_table_ + index * offset_int_size_;
        uint64_t v = 0;
        for (unsigned i = 0; i < offset_int_size_; ++i) v = v << 8 | p[i];
        return v;
    }

    Result<uint64_t> read_sized_be(uint64_t pos, unsigned bytes) {
        if (pos + bytes > data_.size()) return malformed("value runs past end", pos);
        uint64_t v = 0;
        for (unsigned i = 0; i < bytes; ++i) v = v << 8 | data_[pos + i];
        return v;
    }

    // Marker low nibble, with 0xF meaning "length in a following int object".
    Result<std::pair<uint64_t, uint64_t>> length_at(uint64_t pos, uint8_t low) {
        if (low != 0x0F) return std::pair<uint64_t, uint64_t>{low, pos};
        if (pos >= data_.size()) return malformed("missing length object", pos);
        uint8_t marker = data_[pos++];
        if ((marker >> 4) != 0x1) return malformed("length must be an integer", pos - 1);
        unsigned bytes = 1u << (marker & 0xF);
        if (bytes > 8) return malformed("length integer too wide", pos - 1);
        auto v = read_sized_be(pos, bytes);
        if (!v) return v.error();
        return std::pair<uint64_t, uint64_t>{*v, pos + bytes};
    }

    Result<PlistValue> object(uint64_t index, int depth) {
        if (depth > 64) return malformed("plist nesting too deep");
        if (index >= num_objects_) return malformed("object reference out of range");
        uint64_t pos = offset_of(index);
        if (pos >= data_.size()) return malformed("object offset out of range", pos);
        uint8_t marker = data_[pos++];
        uint8_t high = marker >> 4, low = marker & 0xF;
        PlistValue v;
        switch (high) {
            case 0x0:
                if (low == 0x8 || low == 0x9) {
                    v.type = PlistValue::Type::boolean;
                    v.bool_v = low == 0x9;
                    return v;
                }
                if (low == 0x0) {  // null; surfaced as empty string
                    v.type = PlistValue::Type::string;
                    return v;
                }
                return malformed("unknown singleton marker", pos - 1);
            case 0x1: {
                unsigned bytes = 1u << low;
                if (bytes > 8) return malformed("integer too wide", pos - 1);
                auto raw = read_sized_be(pos, bytes);
                if (!raw) return raw.error();
                v.type = PlistValue::Type::integer;
                v.int_v = static_cast<int64_t>(*raw);
                if (bytes < 8 && (v.int_v & (1ll << (bytes * 8 - 1))))
                    v.int_v -= 1ll << (bytes * 8);
                return v;
            }
            case 0x2: {
                unsigned bytes = 1u << low;
                auto raw = read_sized_be(pos, bytes);
                if (!raw) return raw.error();
                v.type = PlistValue::Type::real;
                if (bytes == 4) {
                    uint32_t b = static_cast<uint32_t>(*raw);
                    float f;
                    std::memcpy(&f, &b, 4);
                    v.real_v = f;
                } else if (bytes == 8) {
                    uint64_t b = *raw;
                    std::memcpy(&v.real_v, &b, 8);
                } else {
                    return malformed("unsupported real width", pos - 1);
                }
                return v;
            }
            case 0x3: {
                if (low != 0x3) return malformed("bad date marker", pos - 1);
                auto raw = read_sized_be(pos, 8);
                if (!raw) return raw.error();
                double secs;
                uint64_t b = *raw;
                std::memcpy(&secs, &b, 8);
                v.type = PlistValue::Type::date;
                v.str = rfc3339_from_unix(kAppleEpochOffset + static_cast<int64_t>(secs));
                return v;
            }
            case 0x4: {
                auto len = length_at(pos, low);
                if (!len) return len.error();
                auto [n, at] = *len;
                if (at + n > data_.size()) return malformed("data runs past end", at);
                v.type = PlistValue::Type::data;
                v.data_v.assign(data_.begin() + static_cast<ptrdiff_t>(at),
                                data_.begin() + static_cast<ptrdiff_t>(at + n));
                return v;
            }
            case 0x5: {
                auto len = length_at(pos, low);
                if (!len) return len.error();
                auto [n, at] = *len;
                if (at + n > data_.size()) return malformed("string runs past end", at);
                v.type = PlistValue::Type::string;
                v.str.assign(reinterpret_cast<const char*>(data_.data() + at), n);
                return v;
            }
            case 0x6: {
                auto len = length_at(pos, low);
                if (!len) return len.error();
                auto [n, at] = *len;
                if (at + n * 2 > data_.size()) return malformed("utf16 runs past end", at);
                v.type = PlistValue::Type::string;
                v.str = decode_utf16be(at, n);
                return v;
            }
            case 0x8: {
                auto raw = read_sized_be(pos, low + 1);
                if (!raw) return raw.error();
                v.type = PlistValue::Type::integer;
                v.int_v = static_cast<int64_t>(*raw);
                return v;
            }
            case 0xA: {
                auto len = length_at(pos, low);
                if (!len) return len.error();
                auto [n, at] = *len;
                v.type = PlistValue::Type::array;
                for (uint64_t i = 0; i < n; ++i) {
                    auto ref = read_sized_be(at + i * object_ref_size_, object_ref_size_);
                    if (!ref) return ref.error();
                    auto child = object(*ref, depth + 1);
                    if (!child) return child.error();
                    v.array_v.push_back(std::move(*child));
                }
                return v;
            }
            case 0xD: {
                auto len = length_at(pos, low);
                if (!len) return len.error();
                auto [n, at] = *len;
                v.type = PlistValue::Type::dict;
                for (uint64_t i = 0; i < n; ++i) {
                    auto kref = read_sized_be(at + i * object_ref_size_, object_ref_size_);
                    auto vref =
                        read_sized_be(at + (n + i) * object_ref_size_, object_ref_size_);
                    if (!kref) return kref.error();
                    if (!vref) return vref.error();
                    auto key = object(*kref, depth + 1);
                    if (!key) return key.error();
                    if (key->type != PlistValue::Type::string)
                        return malformed("dictionary key is not a string");
                    auto val = object(*vref, depth + 1);
                    if (!val) return val.error();
                    v.dict_v.emplace_back(key->str, std::move(*val));
                }
                return v;
            }
            default:
                return malformed("unknown object marker", pos - 1);
        }
    }

    std::string decode_utf16be(uint64_t at, uint64_t units) const {
        std::string out;
        for (uint64_t i = 0; i < units; ++i) {
            uint32_t cp = read_be16(data_.data() + at + i * 2);
            if (cp >= 0xD800 && cp <= 0xDBFF && i + 1 < units) {
                uint32_t lo = read_be16(data_.data() + at + (i + 1) * 2);
                if (lo >= 0xDC00 && lo <= 0xDFFF) {
                    cp = 0x10000 + ((cp - 0xD800) << 10) + (lo - 0xDC00);
                    ++i;
                }
            }
            if (cp < 0x80) {
                out.push_back(static_cast<char>(cp));
            } else if (cp < 0x800) {
                out.push_back(static_cast<char>(0xC0 | cp >> 6));
                out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
            } else if (cp < 0x10000) {
                out.push_back(static_cast<char>(0xE0 | cp >> 12));
                out.push_back(static_cast<char>(0x80 | (cp >> 6 & 0x3F)));
                out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
            } else {
                out.push_back(static_cast<char>(0xF0 | cp >> 18));
                out.push_back(static_cast<char>(0x80 | (cp >> 12 & 0x3F)));
                out.push_back(static_cast<char>(0x80 | (cp >> 6 & 0x3F)));
                out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
            }
        }
        return out;
    }

    ByteSpan data_;
    unsigned offset_int_size_ = 0;
    unsigned object_ref_size_ = 0;
    uint64_t num_objects_ = 0;
    uint64_t top_object_ = 0;
    uint64_t offset_table_ = 0;
};

// ------------------------------------------------------------------- xml ---

struct XmlTag {
    std::string name;
    bool closing = false;
    bool self_closing = false;
    size_t content_start = 0;  // position right after '>'
};

class XmlPlistReader {
public:
    explicit XmlPlistReader(std::string_view text) : text_(text) {}

    Result<PlistValue> parse() {
        auto tag = next_tag();
        while (tag && (tag->name == "?xml" || tag->name == "!DOCTYPE")) tag = next_tag();
        if (!tag || tag->name != "plist") return malformed("missing <plist> root", pos_);
        auto root = parse_value(0);
        if (!root) return root;
        auto end = next_tag();
        if (!end || !end->closing || end->name != "plist")
            return malformed("missing </plist>", pos_);
        return root;
    }

private:
    std::optional<XmlTag> next_tag() {
        size_t open = text_.find('<', pos_);
        if (open == std::string_view::npos) return std::nullopt;
        size_t close = text_.find('>', open);
        if (close == std::string_view::npos) return std::nullopt;
        std::string_view body = text_.substr(open + 1, close - open - 1);
        pos_ = close + 1;
        XmlTag tag;
        if (!body.empty() && body.front() == '/') {
            tag.closing = true;
            body.remove_prefix(1);
        }
        if (!body.empty() && body.back() == '/') {
            tag.self_closing = true;
            body.remove_suffix(1);
        }
        if (!body.empty() && body.back() == '?') body.remove_suffix(1);
        size_t sp = body.find_first_of(" \t\r\n");
        tag.name = std::string(sp == std::string_view::npos ? body : body.substr(0, sp));
        tag.content_start = pos_;
        return tag;
    }

    Result<std::string> text_until_close(const std::string& name) {
        std::string close = "</" + name + ">";
        size_t end = text_.find(close, pos_);
        if (end == std::string_view::npos)
            return malformed("unterminated <" + name + ">", pos_);
        std::string content(text_.substr(pos_, end - pos_));
        pos_ = end + close.size();
        return decode_entities(content);
    }

    static std::string decode_entities(std::string_view s) {
        std::string out;
        for (size_t i = 0; i < s.size(); ++i) {
            if (s[i] != '&') {
                out.push_back(s[i]);
                continue;
            }
            auto try_ent = [&](std::string_view ent, char c) {
                if (s.substr(i, ent.size()) == ent) {
                    out.push_back(c);
                    i += ent.size() - 1;
                    return true;
                }
                return false;
            };
            if (try_ent("&amp;", '&') || try_ent("&lt;", '<') || try_ent("&gt;", '>') ||
                try_ent("&quot;", '"') || try_ent("&apos;", '\''))
                continue;
            out.push_back(s[i]);
        }
        return out;
    }

    Result<PlistValue> parse_value(int depth) {
        if (depth > 64) return malformed("plist nesting too deep");
        auto tag = next_tag();
        if (!tag || tag->closing) return malformed("expected a value element", pos_);
        return parse_value_from(*tag, depth);
    }

    Result<PlistValue> parse_value_from(const XmlTag& tag, int depth) {
        PlistValue v;
        if (tag.name == "dict") {
            v.type = PlistValue::Type::dict;
            if (tag.self_closing) return v;
            while (true) {
                auto t = next_tag();
                if (!t) return malformed("unterminated <dict>", pos_);
                if (t->closing && t->name == "dict") return v;
                if (t->name != "key") return malformed("expected <key> in dict", pos_);
                auto key = text_until_close("key");
                if (!key) return key.error();
                auto val = parse_value(depth + 1);
                if (!val) return val;
                v.dict_v.emplace_back(std::move(*key), std::move(*val));
            }
        }
        if (tag.name == "array") {
            v.type = PlistValue::Type::array;
            if (tag.self_closing) return v;
            while (true) {
                size_t save = pos_;
                auto t = next_tag();
                if (!t) return malformed("unterminated <array>", pos_);
                if (t->closing && t->name == "array") return v;
                pos_ = save;
                auto val = parse_value(depth + 1);
                if (!val) return val;
                v.array_v.push_back(std::move(*val));
            }
        }
        if (tag.name == "string" || tag.name == "date" || tag.name == "data") {
            std::string content;
            if (!tag.self_closing) {
                auto c = text_until_close(tag.name);
                if (!c) return c.error();
                content = *c;
            }
            if (tag.name == "string") {
                v.type = PlistValue::Type::string;
                v.str = content;
            } else if (tag.name == "date") {
                v.type = PlistValue::Type::date;
                v.str = trim(content);
            } else {
                v.type = PlistValue::Type::data;
                auto decoded = decode_base64(trim(content));
                if (!decoded) return malformed("bad base64 in <data>", pos_);
                v.data_v = std::move(*decoded);
            }
            return v;
        }
        if (tag.name == "integer" || tag.name == "real") {
            auto c = text_until_close(tag.name);
            if (!c) return c.error();
            try {
                if (tag.name == "integer") {
                    v.type = PlistValue::Type::integer;
                    v.int_v = std::stoll(trim(*c));
                } else {
                    v.type = PlistValue::Type::real;
                    v.real_v = std::stod(trim(*c));
                }
            } catch (...) {
                return malformed("bad number in <" + tag.name + ">", pos_);
            }
            return v;
        }
        if (tag.name == "true" || tag.name == "false") {
            v.type = PlistValue::Type::boolean;
            v.bool_v = tag.name == "true";
            if (!tag.self_closing) {
                auto c = text_until_close(tag.name);
                if (!c) return c.error();
            }
            return v;
        }
        return malformed("unknown element <" + tag.name + ">", pos_);
    }

    static std::optional<std::vector<uint8_t>> decode_base64(std::string_view s) {
        auto val = [](char c) -> int {
            if (c >= 'A' && c <= 'Z') return c - 'A';
            if (c >= 'a' && c <= 'z') return c - 'a' + 26;
            if (c >= '0' && c <= '9') return c - '0' + 52;
            if (c == '+') return 62;
            if (c == '/') return 63;
            return -1;
        };
        std::vector<uint8_t> out;
        int acc = 0, bits = 0;
        for (char c : s) {
            if (c == '=' || c == '\n' || c == '\r' || c == ' ' || c == '\t') continue;
            int v = val(c);
            if (v < 0) return std::nullopt;
            acc = acc << 6 | v;
            bits += 6;
            if (bits >= 8) {
                bits -= 8;
                out.push_back(static_cast<uint8_t>(acc >> bits & 0xff));
            }
        }
        return out;
    }

    std::string_view text_;
    size_t pos_ = 0;
};

}  // namespace

const PlistValue* PlistValue::dict_get(std::string_view key) const {
    if (type != Type::dict) return nullptr;
    for (const auto& [k, v] : dict_v)
        if (k == key) return &v;
    return nullptr;
}

const PlistValue* PlistValue::find_key(std::string_view key) const {
    if (type == Type::dict) {
        for (const auto& [k, v] : dict_v)
            if (k == key) return &v;
        for (const auto& [k, v] : dict_v)
            if (const auto* hit = v.find_key(key)) return hit;
    } else if (type == Type::array) {
        for (const auto& v : array_v)
            if (const auto* hit = v.find_key(key)) return hit;
    }
    return nullptr;
}

std::string PlistValue::display() const {
    switch (type) {
        case Type::string:
        case Type::date: return str;
        case Type::integer: return std::to_string(int_v);
        case Type::real: {
            char buf[40];
            std::snprintf(buf, sizeof(buf), "%.17g", real_v);
            return buf;
        }
        case Type::boolean: return bool_v ? "true" : "false";
        case Type::data: return to_hex(ByteSpan{data_v.data(), data_v.size()});
        case Type::array: return "<array>";
        case Type::dict: return "<dict>";
    }
    return {};
}

Result<PlistValue> parse_plist(ByteSpan bytes) {
    if (bytes.size() >= 8 && std::memcmp(bytes.data(), "bplist0", 7) == 0)
        return BinaryPlistReader(bytes).parse();
    std::string_view text = as_text(bytes);
    size_t first = text.find_first_not_of(" \t\r\n");
    if (first != std::string_view::npos && text[first] == '<')
        return XmlPlistReader(text.substr(first)).parse();
    return malformed("neither an XML nor a binary plist");
}

Result<std::vector<Finding>> parse_itunes_metadata(ByteSpan bytes, const EvidenceSource& source,
                                                   const Catalog& catalog) {
    auto plist = parse_plist(bytes);
    if (!plist) return plist.error();

    std::vector<Finding> findings;
    auto emit = [&](const char* rule_id, const char* key, const char* attr_key,
                    bool as_config) {
        const CatalogRule* rule = catalog.find(rule_id);
        const PlistValue* v = plist->find_key(key);
        if (rule == nullptr || v == nullptr) return;
        std::string value = v->display();
        if (value.empty()) return;
        Finding f;
        f.rule_id = rule->rule_id;
        f.category = rule->category;
        f.platform = rule->platform;
        f.confidence = rule->confidence;
        f.source = source;
        if (as_config) {
            f.set_attr("key", attr_key);
            f.set_attr("value", value);
        } else {
            f.set_attr(attr_key, value);
        }
        findings.push_back(std::move(f));
    };
    emit("plist.itunes.apple-id", "appleId", "apple-id", false);
    emit("plist.itunes.purchase-date", "purchaseDate", "purchase-date", true);
    return findings;
}

}  // namespace onetrace
