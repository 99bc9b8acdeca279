#include "onetrace/onetrace.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>

#include "core/case_runner.hpp"
#include "core/catalog.hpp"
#include "core/report.hpp"
#include "core/version.hpp"

using namespace onetrace;

struct ot_catalog {
    const Catalog* ptr = nullptr;        // builtin
    std::unique_ptr<Catalog> owned;      // loaded
    const Catalog& get() const { return owned ? *owned : *ptr; }
};

struct ot_case {
    CaseConfig config;
    const Catalog* catalog = nullptr;  // borrowed from an ot_catalog or builtin
    CaseReport report;
    bool ran = false;
    int exit_code = 1;
};

namespace {

thread_local std::string g_last_error;

int fail(int code, const std::string& message) {
    g_last_error = message;
    return code;
}

int code_for(const Error& err) {
    const std::string& c = err.code;
    if (c == "io-error" || c == "input-error") return OT_ERR_IO;
    if (c == "parse-error" || c == "bad-magic" || c == "bad-header" || c == "not-sqlite" ||
        c.rfind("malformed", 0) == 0 || c.rfind("truncated", 0) == 0 ||
        c.rfind("corrupt", 0) == 0)
        return OT_ERR_PARSE;
    if (c.rfind("unsupported", 0) == 0 || c == "platform-unknown") return OT_ERR_UNSUPPORTED;
    if (c == "validation-error" || c == "unknown-rule" || c.rfind("invalid", 0) == 0)
        return OT_ERR_VALIDATION;
    return OT_ERR_STATE;
}

int fail(const Error& err) {
    g_last_error = err.describe();
    return code_for(err);
}

int copy_out(const std::string& s, char** out, size_t* out_len) {
    char* buf = static_cast<char*>(std::malloc(s.size() + 1));
    if (buf == nullptr) return fail(OT_ERR_STATE, "out of memory");
    std::memcpy(buf, s.data(), s.size());
    buf[s.size()] = '\0';
    *out = buf;
    if (out_len != nullptr) *out_len = s.size();
    return OT_OK;
}

}  // namespace

extern "C" {

const char* ot_version(void) { return kToolVersion; }

const char* ot_last_error(void) { return g_last_error.c_str(); }

ot_catalog* ot_catalog_builtin(void) {
    auto* handle = new ot_catalog;
    handle->ptr = &builtin_catalog();
    return handle;
}

int ot_catalog_open(const char* path, ot_catalog** out) {
    if (path == nullptr || out == nullptr)
        return fail(OT_ERR_INVALID_ARGUMENT, "path and out must be non-null");
    std::ifstream in(path, std::ios::binary);
    if (!in) return fail(OT_ERR_IO, std::string("cannot open '") + path + "'");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return ot_catalog_parse(text.data(), text.size(), out);
}

int ot_catalog_parse(const char* data, size_t len, ot_catalog** out) {
    if (data == nullptr || out == nullptr)
        return fail(OT_ERR_INVALID_ARGUMENT, "data and out must be non-null");
    auto parsed = load_catalog(std::string_view(data, len));
    if (!parsed) return fail(parsed.error());
    auto* handle = new ot_catalog;
    handle->owned = std::make_unique<Catalog>(std::move(*parsed));
    *out = handle;
    return OT_OK;
}

const char* ot_catalog_version(const ot_catalog* catalog) {
    return catalog == nullptr ? "" : catalog->get().version().c_str();
}

size_t ot_catalog_rule_count(const ot_catalog* catalog) {
    return catalog == nullptr ? 0 : catalog->get().rules().size();
}

int ot_catalog_render(const ot_catalog* catalog, char** out, size_t* out_len) {
    if (catalog == nullptr || out == nullptr)
        return fail(OT_ERR_INVALID_ARGUMENT, "catalog and out must be non-null");
    return copy_out(render_catalog(catalog->get()), out, out_len);
}

void ot_catalog_free(ot_catalog* catalog) { delete catalog; }

ot_case* ot_case_new(const char* case_id, const ot_catalog* catalog) {
    if (case_id == nullptr || *case_id == '\0') {
        g_last_error = "case id must be non-empty";
        return nullptr;
    }
    auto* c = new ot_case;
    c->config.case_id = case_id;
    c->catalog = catalog != nullptr ? &catalog->get() : &builtin_catalog();
    return c;
}

int ot_case_set_generated_at(ot_case* c, const char* rfc3339_utc) {
    if (c == nullptr || rfc3339_utc == nullptr)
        return fail(OT_ERR_INVALID_ARGUMENT, "case and timestamp must be non-null");
    if (!looks_like_rfc3339(rfc3339_utc))
        return fail(OT_ERR_INVALID_ARGUMENT,
                    "generated_at must look like 2014-04-22T03:48:04Z");
    c->config.generated_at = rfc3339_utc;
    return OT_OK;
}

int ot_case_set_jobs(ot_case* c, int jobs) {
    if (c == nullptr || jobs < 1)
        return fail(OT_ERR_INVALID_ARGUMENT, "worker count must be >= 1");
    c->config.jobs = jobs;
    return OT_OK;
}

int ot_case_set_chunk_size(ot_case* c, uint64_t bytes) {
    if (c == nullptr || bytes < (1u << 17))
        return fail(OT_ERR_INVALID_ARGUMENT, "chunk size must be at least 128 KiB");
    c->config.chunk_size = bytes;
    return OT_OK;
}

int ot_case_add_input(ot_case* c, const char* kind, const char* path, const char* platform,
                      const char* parser_hint) {
    if (c == nullptr || kind == nullptr || path == nullptr)
        return fail(OT_ERR_INVALID_ARGUMENT, "case, kind and path must be non-null");
    if (!valid_input_kind(kind))
        return fail(OT_ERR_INVALID_ARGUMENT, std::string("unknown input kind '") + kind + "'");
    CaseInput input;
    input.kind = kind;
    input.path = path;
    if (platform != nullptr && *platform != '\0' &&
        std::string_view(platform) != "auto") {
        auto p = platform_from(platform);
        if (!p)
            return fail(OT_ERR_INVALID_ARGUMENT,
                        std::string("unknown platform '") + platform + "'");
        input.platform = p;
    }
    if (parser_hint != nullptr) input.parser_hint = parser_hint;
    c->config.inputs.push_back(std::move(input));
    return OT_OK;
}

int ot_case_add_manifest(ot_case* c, const char* manifest_path) {
    if (c == nullptr || manifest_path == nullptr)
        return fail(OT_ERR_INVALID_ARGUMENT, "case and manifest path must be non-null");
    std::ifstream in(manifest_path, std::ios::binary);
    if (!in) return fail(OT_ERR_IO, std::string("cannot open '") + manifest_path + "'");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::string base = std::filesystem::path(manifest_path).parent_path().string();
    auto config = parse_manifest(text, base);
    if (!config) return fail(config.error());
    if (!config->case_id.empty() && config->case_id != "case")
        c->config.case_id = config->case_id;
    for (auto& input : config->inputs) c->config.inputs.push_back(std::move(input));
    return OT_OK;
}

int ot_case_run(ot_case* c) {
    if (c == nullptr) return fail(OT_ERR_INVALID_ARGUMENT, "case must be non-null");
    try {
        auto outcome = run_case(c->config, *c->catalog);
        if (!outcome) return fail(outcome.error());
        c->report = std::move(outcome->report);
        c->exit_code = outcome->exit_code;
        c->ran = true;
        return OT_OK;
    } catch (const std::exception& e) {
        return fail(OT_ERR_STATE, e.what());
    }
}

int ot_case_exit_code(const ot_case* c) {
    if (c == nullptr || !c->ran) return 2;
    return c->exit_code;
}

size_t ot_case_finding_count(const ot_case* c) {
    return (c == nullptr || !c->ran) ? 0 : c->report.findings.size();
}

int ot_case_render(const ot_case* c, const char* format, char** out, size_t* out_len) {
    if (c == nullptr || format == nullptr || out == nullptr)
        return fail(OT_ERR_INVALID_ARGUMENT, "case, format and out must be non-null");
    if (!c->ran) return fail(OT_ERR_STATE, "run the case before rendering");
    auto fmt = render_format_from(format);
    if (!fmt)
        return fail(OT_ERR_INVALID_ARGUMENT, std::string("unknown format '") + format + "'");
    return copy_out(render_report(c->report, *fmt), out, out_len);
}

int ot_case_write_report(const ot_case* c, const char* format, const char* path) {
    if (path == nullptr) return fail(OT_ERR_INVALID_ARGUMENT, "path must be non-null");
    char* buf = nullptr;
    size_t len = 0;
    if (int rc = ot_case_render(c, format, &buf, &len); rc != OT_OK) return rc;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        ot_buffer_free(buf);
        return fail(OT_ERR_IO, std::string("cannot write '") + path + "'");
    }
    out.write(buf, static_cast<std::streamsize>(len));
    ot_buffer_free(buf);
    if (!out) return fail(OT_ERR_IO, std::string("short write to '") + path + "'");
    return OT_OK;
}

void ot_case_free(ot_case* c) { delete c; }

void ot_buffer_free(char* buffer) { std::free(buffer); }

}  // extern "C"
