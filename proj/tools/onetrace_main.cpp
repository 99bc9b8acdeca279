// onetrace: read-only triage of Ubuntu One cloud-storage remnants in memory
// images, file-system trees, registry exports, artifact files and captures.
//
// Exit codes: 0 ran with findings, 1 ran without findings, 2 usage or
// configuration error, 3 input error.

#include <cstdio>
#include <memory>
#include <string>

#include <CLI11.hpp>
#include <onetrace/onetrace.h>

namespace {

struct CommonOptions {
    std::string catalog_path;
    std::string out_path;
    std::string format = "json";
    int jobs = 1;
    std::string case_id;
    std::string generated_at;
};

struct CatalogHandle {
    ot_catalog* ptr = nullptr;
    ~CatalogHandle() { ot_catalog_free(ptr); }
};

struct CaseHandle {
    ot_case* ptr = nullptr;
    ~CaseHandle() { ot_case_free(ptr); }
};

int run_configured_case(const CommonOptions& opts, const std::string& default_case_id,
                        const std::function<int(ot_case*)>& add_inputs,
                        uint64_t chunk_size = 0) {
    CatalogHandle catalog;
    if (!opts.catalog_path.empty()) {
        if (ot_catalog_open(opts.catalog_path.c_str(), &catalog.ptr) != OT_OK) {
            std::fprintf(stderr, "onetrace: %s\n", ot_last_error());
            return 3;
        }
    } else {
        catalog.ptr = ot_catalog_builtin();
    }

    CaseHandle c;
    std::string case_id = opts.case_id.empty() ? default_case_id : opts.case_id;
    c.ptr = ot_case_new(case_id.c_str(), catalog.ptr);
    if (c.ptr == nullptr) {
        std::fprintf(stderr, "onetrace: %s\n", ot_last_error());
        return 2;
    }
    if (ot_case_set_jobs(c.ptr, opts.jobs) != OT_OK) {
        std::fprintf(stderr, "onetrace: %s\n", ot_last_error());
        return 2;
    }
    if (!opts.generated_at.empty() &&
        ot_case_set_generated_at(c.ptr, opts.generated_at.c_str()) != OT_OK) {
        std::fprintf(stderr, "onetrace: %s\n", ot_last_error());
        return 2;
    }
    if (chunk_size != 0 && ot_case_set_chunk_size(c.ptr, chunk_size) != OT_OK) {
        std::fprintf(stderr, "onetrace: %s\n", ot_last_error());
        return 2;
    }
    if (int rc = add_inputs(c.ptr); rc != 0) return rc;

    int rc = ot_case_run(c.ptr);
    if (rc != OT_OK) {
        std::fprintf(stderr, "onetrace: %s\n", ot_last_error());
        return rc == OT_ERR_IO ? 3 : rc == OT_ERR_VALIDATION ? 2 : 3;
    }

    if (!opts.out_path.empty()) {
        if (ot_case_write_report(c.ptr, opts.format.c_str(), opts.out_path.c_str()) != OT_OK) {
            std::fprintf(stderr, "onetrace: %s\n", ot_last_error());
            return 3;
        }
    } else {
        char* buf = nullptr;
        size_t len = 0;
        if (ot_case_render(c.ptr, opts.format.c_str(), &buf, &len) != OT_OK) {
            std::fprintf(stderr, "onetrace: %s\n", ot_last_error());
            return 2;
        }
        std::fwrite(buf, 1, len, stdout);
        ot_buffer_free(buf);
    }
    return ot_case_exit_code(c.ptr);
}

int single_input(const CommonOptions& opts, const std::string& case_id, const char* kind,
                 const std::string& path, const char* platform, const char* hint,
                 uint64_t chunk_size = 0) {
    return run_configured_case(
        opts, case_id,
        [&](ot_case* c) {
            if (ot_case_add_input(c, kind, path.c_str(), platform, hint) != OT_OK) {
                std::fprintf(stderr, "onetrace: %s\n", ot_last_error());
                return 2;
            }
            return 0;
        },
        chunk_size);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"onetrace - Ubuntu One cloud storage triage"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand
    app.set_version_flag("--version", []() { return std::string(ot_version()); });

    CommonOptions opts;
    app.add_option("--catalog", opts.catalog_path, "catalog JSON overriding the builtin")
        ->check(CLI::ExistingFile);
    app.add_option("--out", opts.out_path, "write the report here instead of stdout");
    app.add_option("--format", opts.format, "report format")
        ->check(CLI::IsMember({"json", "text"}));
    app.add_option("--jobs", opts.jobs, "worker count")->check(CLI::PositiveNumber);
    app.add_option("--case-id", opts.case_id, "case identifier stamped into the report");
    app.add_option("--generated-at", opts.generated_at,
                   "fixed RFC 3339 UTC report timestamp (for reproducible output)");

    std::string mem_path;
    uint64_t chunk_size = 0;
    auto* scan_memory = app.add_subcommand("scan-memory", "carve a raw memory image");
    scan_memory->add_option("image", mem_path, "raw flat memory image")->required();
    scan_memory->add_option("--chunk-size", chunk_size, "scan chunk size in bytes");

    std::string fs_path_arg, fs_platform = "auto";
    auto* scan_fs = app.add_subcommand("scan-fs", "scan a mounted or extracted tree");
    scan_fs->add_option("root", fs_path_arg, "tree root")->required();
    scan_fs->add_option("--platform", fs_platform, "tree platform")
        ->check(CLI::IsMember({"windows", "macos", "ios", "auto"}));

    std::string pcap_path;
    auto* scan_pcap = app.add_subcommand("scan-pcap", "match indicators in a capture");
    scan_pcap->add_option("capture", pcap_path, "classic pcap file")->required();

    std::string db_path;
    auto* parse_db = app.add_subcommand("parse-db", "extract the mobile client database");
    parse_db->add_option("file", db_path, "u1.db SQLite file")->required();

    std::string log_path, log_kind;
    auto* parse_log = app.add_subcommand("parse-log", "parse a client log file");
    parse_log->add_option("file", log_path, "log file")->required();
    parse_log->add_option("--kind", log_kind, "log grammar")
        ->check(CLI::IsMember({"sso", "syncdaemon"}))
        ->required();

    std::string reg_path;
    auto* parse_reg = app.add_subcommand("parse-reg", "parse a registry export (.reg)");
    parse_reg->add_option("file", reg_path, "registry export")->required();

    std::string cache_path, cache_page;
    auto* parse_cache = app.add_subcommand("parse-cache", "extract a browser cache page");
    parse_cache->add_option("file", cache_path, "cache page file")->required();
    parse_cache->add_option("--page", cache_page, "page kind")
        ->check(CLI::IsMember({"dashboard", "files", "opened"}))
        ->required();

    std::string manifest_path;
    auto* case_cmd = app.add_subcommand("case", "process a case manifest");
    case_cmd->add_option("manifest", manifest_path, "case manifest JSON")->required();

    auto* dump_catalog = app.add_subcommand("dump-catalog", "print the active catalog");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    if (scan_memory->parsed())
        return single_input(opts, "memory-scan", "memory-image", mem_path, nullptr, nullptr,
                            chunk_size);
    if (scan_fs->parsed())
        return single_input(opts, "fs-scan", "fs-tree", fs_path_arg, fs_platform.c_str(),
                            nullptr);
    if (scan_pcap->parsed())
        return single_input(opts, "pcap-scan", "pcap", pcap_path, nullptr, nullptr);
    if (parse_db->parsed())
        return single_input(opts, "db-parse", "database", db_path, nullptr, nullptr);
    if (parse_log->parsed())
        return single_input(opts, "log-parse", "log", log_path, nullptr, log_kind.c_str());
    if (parse_reg->parsed())
        return single_input(opts, "reg-parse", "registry-export", reg_path, nullptr, nullptr);
    if (parse_cache->parsed())
        return single_input(opts, "cache-parse", "cache-file", cache_path, nullptr,
                            cache_page.c_str());
    if (case_cmd->parsed()) {
        return run_configured_case(opts, "case", [&](ot_case* c) {
            if (ot_case_add_manifest(c, manifest_path.c_str()) != OT_OK) {
                std::fprintf(stderr, "onetrace: %s\n", ot_last_error());
                return 3;
            }
            return 0;
        });
    }
    if (dump_catalog->parsed()) {
        CatalogHandle catalog;
        if (!opts.catalog_path.empty()) {
            if (ot_catalog_open(opts.catalog_path.c_str(), &catalog.ptr) != OT_OK) {
                std::fprintf(stderr, "onetrace: %s\n", ot_last_error());
                return 3;
            }
        } else {
            catalog.ptr = ot_catalog_builtin();
        }
        char* buf = nullptr;
        size_t len = 0;
        if (ot_catalog_render(catalog.ptr, &buf, &len) != OT_OK) {
            std::fprintf(stderr, "onetrace: %s\n", ot_last_error());
            return 2;
        }
        std::fwrite(buf, 1, len, stdout);
        ot_buffer_free(buf);
        return 0;
    }
    return 2;
}
