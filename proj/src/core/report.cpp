#include "report.hpp"

#include <algorithm>
#include <ctime>

#include "catalog.hpp"
#include "version.hpp"
#include <json.hpp>

namespace onetrace {

using ordered_json = nlohmann::ordered_json;

std::string_view to_string(SourceKind k) {
    switch (k) {
        case SourceKind::memory_image: return "memory-image";
        case SourceKind::file: return "file";
        case SourceKind::pcap: return "pcap";
        case SourceKind::registry_export: return "registry-export";
        case SourceKind::database: return "database";
        case SourceKind::cache_file: return "cache-file";
    }
    return "file";
}

std::string_view to_string(Category c) {
    switch (c) {
        case Category::credential: return "credential";
        case Category::identity: return "identity";
        case Category::file_activity: return "file-activity";
        case Category::presence_indicator: return "presence-indicator";
        case Category::oauth_token: return "oauth-token";
        case Category::network_indicator: return "network-indicator";
        case Category::install_state: return "install-state";
        case Category::config: return "config";
    }
    return "config";
}

std::string_view to_string(Platform p) {
    switch (p) {
        case Platform::windows: return "windows";
        case Platform::macos: return "macos";
        case Platform::ios: return "ios";
        case Platform::any: return "any";
    }
    return "any";
}

std::string_view to_string(Confidence c) {
    switch (c) {
        case Confidence::high: return "high";
        case Confidence::medium: return "medium";
        case Confidence::low: return "low";
    }
    return "medium";
}

std::optional<SourceKind> source_kind_from(std::string_view s) {
    if (s == "memory-image") return SourceKind::memory_image;
    if (s == "file") return SourceKind::file;
    if (s == "pcap") return SourceKind::pcap;
    if (s == "registry-export") return SourceKind::registry_export;
    if (s == "database") return SourceKind::database;
    if (s == "cache-file") return SourceKind::cache_file;
    return std::nullopt;
}

std::optional<Category> category_from(std::string_view s) {
    if (s == "credential") return Category::credential;
    if (s == "identity") return Category::identity;
    if (s == "file-activity") return Category::file_activity;
    if (s == "presence-indicator") return Category::presence_indicator;
    if (s == "oauth-token") return Category::oauth_token;
    if (s == "network-indicator") return Category::network_indicator;
    if (s == "install-state") return Category::install_state;
    if (s == "config") return Category::config;
    return std::nullopt;
}

std::optional<Platform> platform_from(std::string_view s) {
    if (s == "windows") return Platform::windows;
    if (s == "macos") return Platform::macos;
    if (s == "ios") return Platform::ios;
    if (s == "any") return Platform::any;
    return std::nullopt;
}

std::optional<Confidence> confidence_from(std::string_view s) {
    if (s == "high") return Confidence::high;
    if (s == "medium") return Confidence::medium;
    if (s == "low") return Confidence::low;
    return std::nullopt;
}

void Finding::set_attr(std::string key, std::string value) {
    for (auto& [k, v] : attributes) {
        if (k == key) {
            v = std::move(value);
            return;
        }
    }
    attributes.emplace_back(std::move(key), std::move(value));
}

const std::string* Finding::attr(std::string_view key) const {
    for (const auto& [k, v] : attributes)
        if (k == key) return &v;
    return nullptr;
}

std::vector<std::pair<std::string, std::string>> Finding::canonical_attributes() const {
    auto copy = attributes;
    std::sort(copy.begin(), copy.end());
    return copy;
}

bool Finding::operator==(const Finding& other) const {
    return rule_id == other.rule_id && category == other.category &&
           platform == other.platform && confidence == other.confidence &&
           source == other.source && canonical_attributes() == other.canonical_attributes();
}

const std::vector<std::string>& attribute_vocabulary(Category c) {
    static const std::vector<std::string> credential = {"email", "password", "encoding",
                                                        "timestamp", "timezone"};
    static const std::vector<std::string> identity = {
        "email",   "full-name", "openid-url", "openid-suffix", "apple-id",
        "timestamp", "timezone", "encoding",   "line"};
    static const std::vector<std::string> file_activity = {
        "filename",  "path",     "operation", "timestamp", "timezone",  "encoding",
        "size",      "size-bytes", "hash",    "url-id",    "mdid",      "node-type",
        "is-public", "public-url", "parent-path", "last-modified", "event", "line", "url",
        "mru-index"};
    static const std::vector<std::string> presence = {
        "path", "user",           "uuid",      "artifact", "parser", "process",
        "registry-key", "registry-value", "url", "timestamp", "timezone", "detail",
        "keyword", "line"};
    static const std::vector<std::string> oauth = {"consumer-key", "consumer-secret", "token",
                                                   "token-secret"};
    static const std::vector<std::string> network = {
        "hostname", "ip",      "ips",      "channels",      "usage-mode",
        "ocsp-observed", "evidence", "first-seen", "last-seen"};
    static const std::vector<std::string> install = {"state", "evidence"};
    static const std::vector<std::string> config = {"key", "value", "error", "detail", "path",
                                                    "parser"};
    switch (c) {
        case Category::credential: return credential;
        case Category::identity: return identity;
        case Category::file_activity: return file_activity;
        case Category::presence_indicator: return presence;
        case Category::oauth_token: return oauth;
        case Category::network_indicator: return network;
        case Category::install_state: return install;
        case Category::config: return config;
    }
    return config;
}

Result<void> validate_finding(const Finding& f) {
    if (f.rule_id.empty()) return make_error("invalid-finding", "empty rule_id");
    const auto& vocab = attribute_vocabulary(f.category);
    for (const auto& [k, v] : f.attributes) {
        if (std::find(vocab.begin(), vocab.end(), k) == vocab.end())
            return make_error("invalid-finding",
                              "attribute '" + k + "' not in vocabulary for category '" +
                                  std::string(to_string(f.category)) + "'");
        if (v.empty())
            return make_error("invalid-finding", "empty value for attribute '" + k + "'");
    }
    return {};
}

bool finding_order(const Finding& a, const Finding& b) {
    if (a.source.locator != b.source.locator) return a.source.locator < b.source.locator;
    if (a.source.byte_range != b.source.byte_range) return a.source.byte_range < b.source.byte_range;
    if (a.rule_id != b.rule_id) return a.rule_id < b.rule_id;
    if (a.category != b.category) return a.category < b.category;
    if (a.platform != b.platform) return a.platform < b.platform;
    if (a.confidence != b.confidence) return a.confidence < b.confidence;
    if (a.source.kind != b.source.kind) return a.source.kind < b.source.kind;
    return a.canonical_attributes() < b.canonical_attributes();
}

std::map<Category, size_t> CaseReport::summary() const {
    std::map<Category, size_t> counts;
    for (auto c : {Category::credential, Category::identity, Category::file_activity,
                   Category::presence_indicator, Category::oauth_token,
                   Category::network_indicator, Category::install_state, Category::config})
        counts[c] = 0;
    for (const auto& f : findings) counts[f.category]++;
    return counts;
}

bool CaseReport::operator==(const CaseReport& other) const {
    auto a = *this;
    auto b = other;
    finalize_report(a);
    finalize_report(b);
    return a.case_id == b.case_id && a.tool_version == b.tool_version &&
           a.catalog_version == b.catalog_version && a.generated_at == b.generated_at &&
           a.inputs == b.inputs && a.findings == b.findings;
}

Result<CaseReport> new_case(std::string_view case_id) {
    if (case_id.empty()) return make_error("invalid-case-id", "case id must be non-empty");
    CaseReport r;
    r.case_id = std::string(case_id);
    r.tool_version = kToolVersion;
    return r;
}

Result<void> add_finding(CaseReport& report, const Catalog& catalog, Finding finding) {
    if (catalog.find(finding.rule_id) == nullptr)
        return make_error("unknown-rule", "rule '" + finding.rule_id + "' not in catalog");
    if (auto v = validate_finding(finding); !v) return v.error();
    report.findings.push_back(std::move(finding));
    return {};
}

void finalize_report(CaseReport& report) {
    std::stable_sort(report.findings.begin(), report.findings.end(), finding_order);
}

std::optional<RenderFormat> render_format_from(std::string_view s) {
    if (s == "json") return RenderFormat::json;
    if (s == "text") return RenderFormat::text;
    return std::nullopt;
}

namespace {

ordered_json source_to_json(const EvidenceSource& s) {
    ordered_json j;
    j["kind"] = std::string(to_string(s.kind));
    j["locator"] = s.locator;
    if (s.byte_range) {
        j["offset"] = s.byte_range->start;
        j["length"] = s.byte_range->length;
    }
    j["sha256"] = to_hex(ByteSpan{s.container_sha256.data(), s.container_sha256.size()});
    return j;
}

std::string escape_text_field(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '\\': out += "\\\\"; break;
            case '\t': out += "\\t"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case ';': out += "\\;"; break;
            case '=': out += "\\="; break;
            default: out.push_back(c);
        }
    }
    return out;
}

}  // namespace

std::string render_report(const CaseReport& input, RenderFormat format) {
    CaseReport report = input;
    finalize_report(report);

    if (format == RenderFormat::text) {
        std::string out;
        for (const auto& f : report.findings) {
            out += f.rule_id;
            out += '\t';
            out += to_string(f.category);
            out += '\t';
            out += to_string(f.platform);
            out += '\t';
            out += to_string(f.confidence);
            out += '\t';
            out += to_string(f.source.kind);
            out += '\t';
            out += escape_text_field(f.source.locator);
            out += '\t';
            out += f.source.byte_range ? std::to_string(f.source.byte_range->start) : "-";
            out += '\t';
            bool first = true;
            for (const auto& [k, v] : f.canonical_attributes()) {
                if (!first) out += ';';
                first = false;
                out += escape_text_field(k);
                out += '=';
                out += escape_text_field(v);
            }
            out += '\n';
        }
        return out;
    }

    ordered_json j;
    j["case_id"] = report.case_id;
    j["tool_version"] = report.tool_version;
    j["catalog_version"] = report.catalog_version;
    j["generated_at"] = report.generated_at;
    j["inputs"] = ordered_json::array();
    for (const auto& in : report.inputs) {
        ordered_json ji;
        ji["locator"] = in.locator;
        ji["kind"] = std::string(to_string(in.kind));
        ji["sha256"] = to_hex(ByteSpan{in.sha256.data(), in.sha256.size()});
        j["inputs"].push_back(std::move(ji));
    }
    j["findings"] = ordered_json::array();
    for (const auto& f : report.findings) {
        ordered_json jf;
        jf["rule_id"] = f.rule_id;
        jf["category"] = std::string(to_string(f.category));
        jf["platform"] = std::string(to_string(f.platform));
        jf["confidence"] = std::string(to_string(f.confidence));
        jf["source"] = source_to_json(f.source);
        ordered_json attrs;
        for (const auto& [k, v] : f.canonical_attributes()) attrs[k] = v;
        jf["attributes"] = std::move(attrs);
        j["findings"].push_back(std::move(jf));
    }
    ordered_json summary;
    for (const auto& [cat, count] : report.summary())
        summary[std::string(to_string(cat))] = count;
    j["summary"] = std::move(summary);
    return j.dump(2) + "\n";
}

Result<CaseReport> parse_report_json(std::string_view text) try {
    ordered_json j = ordered_json::parse(text, nullptr, false);
    if (j.is_discarded()) return make_error("parse-error", "report is not valid JSON");
    if (!j.is_object()) return make_error("parse-error", "report root must be an object");

    auto get_str = [&](const ordered_json& obj, const char* key) -> std::optional<std::string> {
        auto it = obj.find(key);
        if (it == obj.end() || !it->is_string()) return std::nullopt;
        return it->get<std::string>();
    };

    CaseReport r;
    auto cid = get_str(j, "case_id");
    if (!cid) return make_error("parse-error", "missing case_id");
    r.case_id = *cid;
    r.tool_version = get_str(j, "tool_version").value_or("");
    r.catalog_version = get_str(j, "catalog_version").value_or("");
    r.generated_at = get_str(j, "generated_at").value_or("");

    auto parse_sha = [](std::string_view hex, Sha256Digest& out) -> bool {
        auto bytes = from_hex(hex);
        if (!bytes || bytes->size() != 32) return false;
        std::copy(bytes->begin(), bytes->end(), out.begin());
        return true;
    };

    if (auto it = j.find("inputs"); it != j.end() && it->is_array()) {
        for (const auto& ji : *it) {
            InputRecord rec;
            auto loc = get_str(ji, "locator");
            auto kind = get_str(ji, "kind");
            auto sha = get_str(ji, "sha256");
            if (!loc || !kind || !sha) return make_error("parse-error", "malformed input record");
            auto k = source_kind_from(*kind);
            if (!k) return make_error("parse-error", "unknown input kind '" + *kind + "'");
            rec.locator = *loc;
            rec.kind = *k;
            if (!parse_sha(*sha, rec.sha256))
                return make_error("parse-error", "bad sha256 in input record");
            r.inputs.push_back(std::move(rec));
        }
    }

    if (auto it = j.find("findings"); it != j.end() && it->is_array()) {
        for (const auto& jf : *it) {
            Finding f;
            auto rid = get_str(jf, "rule_id");
            auto cat = rid ? category_from(get_str(jf, "category").value_or("")) : std::nullopt;
            auto plat = platform_from(get_str(jf, "platform").value_or(""));
            auto conf = confidence_from(get_str(jf, "confidence").value_or(""));
            if (!rid || !cat || !plat || !conf)
                return make_error("parse-error", "malformed finding");
            f.rule_id = *rid;
            f.category = *cat;
            f.platform = *plat;
            f.confidence = *conf;

            auto src_it = jf.find("source");
            if (src_it == jf.end() || !src_it->is_object())
                return make_error("parse-error", "finding missing source");
            auto skind = source_kind_from(get_str(*src_it, "kind").value_or(""));
            auto sloc = get_str(*src_it, "locator");
            auto ssha = get_str(*src_it, "sha256");
            if (!skind || !sloc || !ssha)
                return make_error("parse-error", "malformed finding source");
            f.source.kind = *skind;
            f.source.locator = *sloc;
            if (!parse_sha(*ssha, f.source.container_sha256))
                return make_error("parse-error", "bad sha256 in finding source");
            if (auto off = src_it->find("offset"); off != src_it->end()) {
                ByteRange br;
                if (!off->is_number_unsigned())
                    return make_error("parse-error", "bad offset in finding source");
                br.start = off->get<uint64_t>();
                if (auto len = src_it->find("length"); len != src_it->end() &&
                                                        len->is_number_unsigned())
                    br.length = len->get<uint64_t>();
                f.source.byte_range = br;
            }

            if (auto attrs = jf.find("attributes"); attrs != jf.end() && attrs->is_object()) {
                for (auto it2 = attrs->begin(); it2 != attrs->end(); ++it2) {
                    if (!it2.value().is_string())
                        return make_error("parse-error", "attribute values must be strings");
                    f.attributes.emplace_back(it2.key(), it2.value().get<std::string>());
                }
            }
            r.findings.push_back(std::move(f));
        }
    }
    return r;
} catch (const nlohmann::json::exception& e) {
    return make_error("parse-error", e.what());
}

namespace {

// Civil-date conversion (proleptic Gregorian); valid well beyond the
// FILETIME range on both sides of the epoch.
void civil_from_days(int64_t z, int& y, unsigned& m, unsigned& d) {
    z += 719468;
    int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    unsigned doe = static_cast<unsigned>(z - era * 146097);
    unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    int64_t yy = static_cast<int64_t>(yoe) + era * 400;
    unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp < 10 ? mp + 3 : mp - 9;
    y = static_cast<int>(yy + (m <= 2));
}

}  // namespace

std::string rfc3339_from_unix(int64_t seconds) {
    int64_t days = seconds / 86400;
    int64_t rem = seconds % 86400;
    if (rem < 0) {
        rem += 86400;
        days -= 1;
    }
    int y;
    unsigned m, d;
    civil_from_days(days, y, m, d);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02lld:%02lld:%02lldZ", y, m, d,
                  static_cast<long long>(rem / 3600), static_cast<long long>(rem / 60 % 60),
                  static_cast<long long>(rem % 60));
    return buf;
}

std::string rfc3339_utc_now() {
    return rfc3339_from_unix(static_cast<int64_t>(std::time(nullptr)));
}

bool looks_like_rfc3339(std::string_view s) {
    if (s.size() != 20) return false;
    for (size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u, 11u, 12u, 14u, 15u, 17u, 18u})
        if (s[i] < '0' || s[i] > '9') return false;
    return s[4] == '-' && s[7] == '-' && s[10] == 'T' && s[13] == ':' && s[16] == ':' &&
           s[19] == 'Z';
}

}  // namespace onetrace
