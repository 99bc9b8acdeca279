#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "errors.hpp"
#include "report.hpp"
#include <json.hpp>

namespace onetrace {

enum class RuleKind {
    fs_path,
    process_name,
    registry_key,
    url_prefix,
    hostname,
    ip_range,
    memory_signature,
    log_grammar,
    db_schema,
    html_pattern
};

std::string_view to_string(RuleKind k);
std::optional<RuleKind> rule_kind_from(std::string_view s);

// One unit of detection knowledge. The payload is a kind-specific tagged
// object validated at load time; see docs/catalog.md for the field layout
// of every kind.
struct CatalogRule {
    std::string rule_id;
    Platform platform = Platform::any;
    RuleKind kind = RuleKind::fs_path;
    Category category = Category::presence_indicator;
    Confidence confidence = Confidence::medium;
    std::string citation;
    nlohmann::ordered_json payload;
};

class Catalog {
public:
    Catalog() = default;
    Catalog(std::string version, std::vector<CatalogRule> rules);

    const std::string& version() const { return version_; }
    const std::vector<CatalogRule>& rules() const { return rules_; }
    const CatalogRule* find(std::string_view rule_id) const;

    // Filtered subset in catalog order; a rule matches when its platform is
    // `any` or equals the requested platform exactly.
    std::vector<const CatalogRule*> rules_for(Platform platform, RuleKind kind) const;

private:
    std::string version_;
    std::vector<CatalogRule> rules_;
    std::unordered_map<std::string, size_t> index_;
};

// The full paper-derived rule set shipped with the tool.
const Catalog& builtin_catalog();

Result<Catalog> load_catalog(std::string_view text);
std::string render_catalog(const Catalog& catalog);

// IPv4 helpers shared by catalog validation and netwatch matching.
std::optional<uint32_t> parse_ipv4(std::string_view s);
std::string format_ipv4(uint32_t addr);

// Case-insensitive exact hostname match (whole labels, no suffix logic).
bool hostname_matches(std::string_view pattern, std::string_view name);

}  // namespace onetrace
