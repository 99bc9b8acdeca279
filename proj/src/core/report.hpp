#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "sha256.hpp"

namespace onetrace {

enum class SourceKind { memory_image, file, pcap, registry_export, database, cache_file };
enum class Category {
    credential,
    identity,
    file_activity,
    presence_indicator,
    oauth_token,
    network_indicator,
    install_state,
    config
};
enum class Platform { windows, macos, ios, any };
enum class Confidence { high, medium, low };

std::string_view to_string(SourceKind k);
std::string_view to_string(Category c);
std::string_view to_string(Platform p);
std::string_view to_string(Confidence c);

std::optional<SourceKind> source_kind_from(std::string_view s);
std::optional<Category> category_from(std::string_view s);
std::optional<Platform> platform_from(std::string_view s);
std::optional<Confidence> confidence_from(std::string_view s);

struct ByteRange {
    uint64_t start = 0;
    uint64_t length = 0;
    auto operator<=>(const ByteRange&) const = default;
};

struct EvidenceSource {
    SourceKind kind = SourceKind::file;
    std::string locator;
    std::optional<ByteRange> byte_range;
    Sha256Digest container_sha256{};

    bool operator==(const EvidenceSource&) const = default;
};

// One extracted evidentiary fact. Attributes keep insertion order; they are
// canonicalized (sorted by key) when rendered and compared.
struct Finding {
    std::string rule_id;
    Category category = Category::config;
    Platform platform = Platform::any;
    Confidence confidence = Confidence::medium;
    EvidenceSource source;
    std::vector<std::pair<std::string, std::string>> attributes;

    void set_attr(std::string key, std::string value);
    const std::string* attr(std::string_view key) const;
    std::vector<std::pair<std::string, std::string>> canonical_attributes() const;

    bool operator==(const Finding& other) const;
};

// Attribute keys permitted per category; the report schema documents these.
const std::vector<std::string>& attribute_vocabulary(Category c);
Result<void> validate_finding(const Finding& f);

// Comparison key for the report's total finding order:
// (locator, byte_range.start, rule_id), then full value comparison so the
// order never depends on insertion order.
bool finding_order(const Finding& a, const Finding& b);

struct InputRecord {
    std::string locator;
    SourceKind kind = SourceKind::file;
    Sha256Digest sha256{};

    bool operator==(const InputRecord&) const = default;
};

struct CaseReport {
    std::string case_id;
    std::string tool_version;
    std::string catalog_version;
    std::string generated_at;  // RFC 3339 UTC; injectable for determinism
    std::vector<InputRecord> inputs;
    std::vector<Finding> findings;

    std::map<Category, size_t> summary() const;
    bool operator==(const CaseReport& other) const;
};

class Catalog;  // catalog.hpp

Result<CaseReport> new_case(std::string_view case_id);
Result<void> add_finding(CaseReport& report, const Catalog& catalog, Finding finding);

// Sorts findings into the declared total order. Idempotent.
void finalize_report(CaseReport& report);

enum class RenderFormat { json, text };
std::optional<RenderFormat> render_format_from(std::string_view s);

// Deterministic serialization; finalizes a copy first so callers cannot
// observe insertion order.
std::string render_report(const CaseReport& report, RenderFormat format);
Result<CaseReport> parse_report_json(std::string_view text);

// RFC 3339 UTC timestamp helpers.
std::string rfc3339_utc_now();
std::string rfc3339_from_unix(int64_t seconds);
bool looks_like_rfc3339(std::string_view s);

}  // namespace onetrace
