#include "case_runner.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <thread>

#include "bytes.hpp"
#include "cachepage.hpp"
#include "fsscan.hpp"
#include "logparse.hpp"
#include "memcarve.hpp"
#include "netwatch.hpp"
#include "plist.hpp"
#include "regparse.hpp"
#include "sha256.hpp"
#include "u1db.hpp"
#include "version.hpp"
#include <json.hpp>

namespace onetrace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

Result<std::vector<uint8_t>> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return make_error("input-error", "cannot open '" + path + "'");
    std::vector<uint8_t> data((std::istreambuf_iterator<char>(in)),
                              std::istreambuf_iterator<char>());
    return data;
}

// A directory has no byte stream; its digest is the hash of a sorted
// (relative path, file hash) manifest, recomputable from the tree.
Sha256Digest hash_tree(const fs::path& root) {
    std::vector<std::pair<std::string, std::string>> manifest;
    std::error_code ec;
    for (fs::recursive_directory_iterator
             it(root, fs::directory_options::skip_permission_denied, ec),
         end;
         !ec && it != end; it.increment(ec)) {
        std::error_code e;
        if (!it->is_regular_file(e) || it->is_symlink(e)) continue;
        std::ifstream in(it->path(), std::ios::binary);
        if (!in) continue;
        Sha256 h;
        char buf[1 << 16];
        while (in) {
            in.read(buf, sizeof(buf));
            std::streamsize got = in.gcount();
            if (got > 0)
                h.update(ByteSpan{reinterpret_cast<const uint8_t*>(buf),
                                  static_cast<size_t>(got)});
        }
        auto digest = h.finish();
        manifest.emplace_back(fs::relative(it->path(), root, e).generic_string(),
                              to_hex(ByteSpan{digest.data(), digest.size()}));
    }
    std::sort(manifest.begin(), manifest.end());
    Sha256 h;
    for (const auto& [rel, hex] : manifest) {
        h.update(as_bytes(rel));
        h.update(ByteSpan{reinterpret_cast<const uint8_t*>("\0"), 1});
        h.update(as_bytes(hex));
        h.update(ByteSpan{reinterpret_cast<const uint8_t*>("\n"), 1});
    }
    return h.finish();
}

SourceKind kind_for_input(std::string_view kind) {
    if (kind == "memory-image") return SourceKind::memory_image;
    if (kind == "pcap") return SourceKind::pcap;
    if (kind == "registry-export") return SourceKind::registry_export;
    if (kind == "database") return SourceKind::database;
    if (kind == "cache-file") return SourceKind::cache_file;
    return SourceKind::file;
}

Finding diagnostic_finding(const Catalog& catalog, const EvidenceSource& source,
                           const std::string& error, const std::string& detail) {
    Finding f;
    const CatalogRule* rule = catalog.find("core.diagnostic");
    f.rule_id = rule ? rule->rule_id : "core.diagnostic";
    f.category = Category::config;
    f.platform = Platform::any;
    f.confidence = Confidence::low;
    f.source = source;
    f.set_attr("error", error);
    if (!detail.empty()) f.set_attr("detail", detail);
    return f;
}

struct InputResult {
    InputRecord record;
    std::vector<Finding> findings;
};

std::string infer_log_kind(const std::string& path) {
    std::string base = ascii_lower(fs::path(path).filename().string());
    if (base.find("syncdaemon") != std::string::npos) return "syncdaemon";
    if (base.find("sso") != std::string::npos) return "sso";
    return "";
}

Result<InputResult> process_input(const CaseInput& input, const CaseConfig& config,
                                  const Catalog& catalog) {
    InputResult out;
    out.record.locator = input.path;
    out.record.kind = kind_for_input(input.kind);

    if (input.kind == "fs-tree") {
        out.record.sha256 = hash_tree(input.path);
        auto root = make_scan_root(input.path, input.platform);
        if (!root) return root.error();
        auto scan = scan_tree(*root, catalog);
        if (!scan) return scan.error();
        // Stamp presence findings with the tree digest.
        for (auto& f : scan->findings)
            if (f.source.locator == input.path) f.source.container_sha256 = out.record.sha256;

        if (root->platform == Platform::windows || root->platform == Platform::macos) {
            auto state = classify_install_state(root->platform, scan->observations);
            if (state && state->state != InstallVerdict::not_detected) {
                const char* rule_id = root->platform == Platform::windows
                                          ? "win.install-verdict"
                                          : "mac.install-verdict";
                if (const CatalogRule* rule = catalog.find(rule_id)) {
                    Finding f;
                    f.rule_id = rule->rule_id;
                    f.category = rule->category;
                    f.platform = rule->platform;
                    f.confidence = rule->confidence;
                    f.source.kind = SourceKind::file;
                    f.source.locator = input.path;
                    f.source.container_sha256 = out.record.sha256;
                    f.set_attr("state", std::string(to_string(state->state)));
                    std::string joined;
                    for (const auto& e : state->evidence)
                        joined += (joined.empty() ? "" : ";") + e;
                    if (!joined.empty()) f.set_attr("evidence", joined);
                    scan->findings.push_back(std::move(f));
                }
            }
        }

        // Route known artifacts into their parsers.
        for (const auto& [locator, parser] : route_artifacts(scan->findings)) {
            auto bytes = read_file(locator);
            if (!bytes) {
                scan->findings.push_back(diagnostic_finding(
                    catalog, EvidenceSource{SourceKind::file, locator, std::nullopt, {}},
                    "unreadable", bytes.error().message));
                continue;
            }
            EvidenceSource src;
            src.locator = locator;
            src.container_sha256 = Sha256::of(ByteSpan{bytes->data(), bytes->size()});
            std::vector<Finding> parsed;
            if (parser == "logparse.sso") {
                src.kind = SourceKind::file;
                parsed = parse_sso_log(as_text(ByteSpan{bytes->data(), bytes->size()}), src,
                                       catalog)
                             .findings;
            } else if (parser == "logparse.syncdaemon") {
                src.kind = SourceKind::file;
                parsed = parse_syncdaemon_log(as_text(ByteSpan{bytes->data(), bytes->size()}),
                                              src, catalog)
                             .findings;
            } else if (parser == "storeparse.u1db") {
                src.kind = SourceKind::database;
                auto db = parse_u1_db(ByteSpan{bytes->data(), bytes->size()}, src, catalog);
                if (db)
                    parsed = std::move(db->findings);
                else
                    parsed.push_back(diagnostic_finding(catalog, src, db.error().code,
                                                        db.error().message));
            } else if (parser == "storeparse.plist") {
                src.kind = SourceKind::file;
                auto r = parse_itunes_metadata(ByteSpan{bytes->data(), bytes->size()}, src,
                                               catalog);
                if (r)
                    parsed = std::move(*r);
                else
                    parsed.push_back(diagnostic_finding(catalog, src, r.error().code,
                                                        r.error().message));
            } else if (parser.starts_with("webreg.")) {
                src.kind = SourceKind::cache_file;
                auto page = cache_page_from(parser.substr(7));
                if (page)
                    parsed = parse_cache_page(*page,
                                              as_text(ByteSpan{bytes->data(), bytes->size()}),
                                              src, catalog);
            }
            for (auto& f : parsed) scan->findings.push_back(std::move(f));
        }
        out.findings = std::move(scan->findings);
        return out;
    }

    // All remaining kinds are single files.
    auto bytes = read_file(input.path);
    if (!bytes) return bytes.error();
    out.record.sha256 = Sha256::of(ByteSpan{bytes->data(), bytes->size()});

    EvidenceSource src;
    src.kind = out.record.kind;
    src.locator = input.path;
    src.container_sha256 = out.record.sha256;

    if (input.kind == "memory-image") {
        MemorySource image(ByteSpan{bytes->data(), bytes->size()});
        auto sigs = signatures_from_catalog(catalog);
        if (!sigs) return sigs.error();
        CarveParams params;
        params.chunk_size = config.chunk_size;
        params.overlap = config.overlap;
        params.jobs = config.jobs;
        auto hits = carve(image, *sigs, params);
        if (!hits) return hits.error();
        out.findings = hits_to_findings(*hits, src, catalog);
    } else if (input.kind == "pcap") {
        auto parsed = parse_pcap(ByteSpan{bytes->data(), bytes->size()});
        if (!parsed) return parsed.error();
        if (parsed->truncation)
            out.findings.push_back(diagnostic_finding(catalog, src, parsed->truncation->code,
                                                      parsed->truncation->describe()));
        auto analysis = analyze_packets(parsed->packets);
        auto findings = match_indicators(analysis, catalog, src);
        for (auto& f : findings) out.findings.push_back(std::move(f));
        auto verdict = infer_usage_mode(matched_hostnames(analysis, catalog), analysis, catalog);
        if (auto f = usage_mode_finding(verdict, catalog, src))
            out.findings.push_back(std::move(*f));
    } else if (input.kind == "registry-export") {
        auto parsed = parse_reg_export(ByteSpan{bytes->data(), bytes->size()}, src, catalog);
        if (!parsed) return parsed.error();
        out.findings = std::move(parsed->findings);
    } else if (input.kind == "database") {
        auto parsed = parse_u1_db(ByteSpan{bytes->data(), bytes->size()}, src, catalog);
        if (!parsed) return parsed.error();
        out.findings = std::move(parsed->findings);
    } else if (input.kind == "cache-file") {
        auto page = input.parser_hint.empty()
                        ? cache_page_for_filename(fs::path(input.path).filename().string())
                        : cache_page_from(input.parser_hint);
        if (!page)
            return make_error("unknown-cache-page",
                              "cannot infer the cache page kind of '" + input.path +
                                  "'; pass --page");
        out.findings = parse_cache_page(*page, as_text(ByteSpan{bytes->data(), bytes->size()}),
                                        src, catalog);
    } else if (input.kind == "log") {
        std::string kind =
            input.parser_hint.empty() ? infer_log_kind(input.path) : input.parser_hint;
        if (kind == "syncdaemon") {
            out.findings =
                parse_syncdaemon_log(as_text(ByteSpan{bytes->data(), bytes->size()}), src,
                                     catalog)
                    .findings;
        } else if (kind == "sso") {
            out.findings = parse_sso_log(as_text(ByteSpan{bytes->data(), bytes->size()}), src,
                                         catalog)
                               .findings;
        } else {
            return make_error("unknown-log-kind",
                              "cannot infer the log kind of '" + input.path +
                                  "'; pass --kind");
        }
    } else {
        return make_error("invalid-config", "unknown input kind '" + input.kind + "'");
    }
    return out;
}

}  // namespace

bool valid_input_kind(std::string_view kind) {
    return kind == "memory-image" || kind == "fs-tree" || kind == "pcap" ||
           kind == "registry-export" || kind == "database" || kind == "cache-file" ||
           kind == "log";
}

Result<CaseConfig> parse_manifest(std::string_view text, const std::string& base_dir) try {
    ordered_json j = ordered_json::parse(text, nullptr, false);
    if (j.is_discarded()) return make_error("parse-error", "manifest is not valid JSON");
    if (!j.is_object()) return make_error("invalid-config", "manifest root must be an object");

    CaseConfig config;
    if (auto it = j.find("case_id"); it != j.end() && it->is_string())
        config.case_id = it->get<std::string>();
    auto inputs = j.find("inputs");
    if (inputs == j.end() || !inputs->is_array() || inputs->empty())
        return make_error("invalid-config", "manifest needs a non-empty inputs array");
    for (const auto& ji : *inputs) {
        if (!ji.is_object())
            return make_error("invalid-config", "each input must be an object");
        CaseInput input;
        input.path = ji.value("path", "");
        input.kind = ji.value("kind", "");
        if (input.path.empty() || !valid_input_kind(input.kind))
            return make_error("invalid-config",
                              "input needs a path and a valid kind (got kind '" + input.kind +
                                  "')");
        if (auto p = ji.find("platform"); p != ji.end() && p->is_string()) {
            auto plat = platform_from(p->get<std::string>());
            if (!plat && p->get<std::string>() != "auto")
                return make_error("invalid-config",
                                  "unknown platform '" + p->get<std::string>() + "'");
            input.platform = plat;
        }
        input.parser_hint = ji.value("parser", "");
        fs::path path(input.path);
        if (path.is_relative() && !base_dir.empty())
            input.path = (fs::path(base_dir) / path).string();
        config.inputs.push_back(std::move(input));
    }
    return config;
} catch (const nlohmann::json::exception& e) {
    return make_error("invalid-config", e.what());
}

Result<CaseOutcome> run_case(const CaseConfig& config, const Catalog& catalog) {
    if (config.inputs.empty())
        return make_error("invalid-config", "a case needs at least one input");
    if (config.jobs < 1) return make_error("invalid-config", "worker count must be >= 1");
    for (const auto& input : config.inputs)
        if (!valid_input_kind(input.kind))
            return make_error("invalid-config", "unknown input kind '" + input.kind + "'");
    if (config.generated_at && !looks_like_rfc3339(*config.generated_at))
        return make_error("invalid-config",
                          "generated_at must be an RFC 3339 UTC timestamp like "
                          "2014-04-22T03:48:04Z");

    // Readability is a precondition; a missing input aborts the case.
    for (const auto& input : config.inputs) {
        std::error_code ec;
        bool ok = input.kind == "fs-tree" ? fs::is_directory(input.path, ec)
                                          : fs::is_regular_file(input.path, ec);
        if (!ok)
            return make_error("input-error",
                              "input '" + input.path + "' is missing or not readable");
    }

    auto report = new_case(config.case_id);
    if (!report) return report.error();
    report->catalog_version = catalog.version();
    report->generated_at = config.generated_at.value_or(rfc3339_utc_now());

    const size_t n = config.inputs.size();
    std::vector<Result<InputResult>> results(n, Result<InputResult>(InputResult{}));
    std::atomic<size_t> next{0};
    auto worker = [&]() {
        while (true) {
            size_t i = next.fetch_add(1);
            if (i >= n) return;
            results[i] = process_input(config.inputs[i], config, catalog);
        }
    };
    int pool = std::min<int>(config.jobs, static_cast<int>(n));
    if (pool <= 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        for (int t = 0; t < pool; ++t) threads.emplace_back(worker);
        for (auto& t : threads) t.join();
    }

    size_t failed = 0;
    for (size_t i = 0; i < n; ++i) {
        if (!results[i]) {
            const Error& err = results[i].error();
            if (err.code == "input-error") return err;  // precondition violations abort
            ++failed;
            EvidenceSource src;
            src.kind = kind_for_input(config.inputs[i].kind);
            src.locator = config.inputs[i].path;
            auto diag = diagnostic_finding(catalog, src, err.code, err.message);
            if (auto a = add_finding(*report, catalog, std::move(diag)); !a) {
                // Custom catalog without the diagnostics rule: nothing to cite.
            }
            InputRecord rec;
            rec.locator = config.inputs[i].path;
            rec.kind = kind_for_input(config.inputs[i].kind);
            if (auto bytes = read_file(config.inputs[i].path))
                rec.sha256 = Sha256::of(ByteSpan{bytes->data(), bytes->size()});
            report->inputs.push_back(std::move(rec));
            continue;
        }
        report->inputs.push_back(results[i]->record);
        for (auto& f : results[i]->findings) {
            if (auto a = add_finding(*report, catalog, std::move(f)); !a) {
                // Findings citing rules absent from a custom catalog are dropped.
            }
        }
    }
    if (failed == n && n > 0)
        return make_error("input-error", "every input failed to process");

    finalize_report(*report);
    bool evidence = std::any_of(report->findings.begin(), report->findings.end(),
                                [](const Finding& f) { return f.attr("error") == nullptr; });
    CaseOutcome outcome;
    outcome.report = std::move(*report);
    outcome.exit_code = evidence ? 0 : 1;
    return outcome;
}

}  // namespace onetrace
