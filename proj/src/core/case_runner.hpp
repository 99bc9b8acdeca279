#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "catalog.hpp"
#include "errors.hpp"
#include "report.hpp"

namespace onetrace {

struct CaseInput {
    std::string path;
    std::string kind;  // memory-image | fs-tree | pcap | registry-export | database | cache-file | log
    std::optional<Platform> platform;
    std::string parser_hint;  // log kind or cache page
};

struct CaseConfig {
    std::string case_id = "case";
    std::vector<CaseInput> inputs;
    std::optional<std::string> generated_at;
    int jobs = 1;
    uint64_t chunk_size = 8ull << 20;
    uint64_t overlap = 64ull << 10;
};

bool valid_input_kind(std::string_view kind);

// Manifest JSON: {"case_id": ..., "inputs": [{"path","kind","platform"?,"parser"?}]}.
// Relative paths resolve against base_dir.
Result<CaseConfig> parse_manifest(std::string_view text, const std::string& base_dir);

struct CaseOutcome {
    CaseReport report;
    int exit_code = 1;  // 0 findings present, 1 none (usage/input errors surface earlier)
};

Result<CaseOutcome> run_case(const CaseConfig& config, const Catalog& catalog);

}  // namespace onetrace
