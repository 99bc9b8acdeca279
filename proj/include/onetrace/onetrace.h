/* onetrace C API: forensic triage for Ubuntu One cloud-storage remnants.
 *
 * All functions returning int use the OT_* codes below; 0 is success.
 * ot_last_error() describes the most recent failure on the calling thread.
 * Handles are opaque and must be released with the matching _free call.
 */
#ifndef ONETRACE_H
#define ONETRACE_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define ONETRACE_API __declspec(dllexport)
#else
#define ONETRACE_API __attribute__((visibility("default")))
#endif

enum {
    OT_OK = 0,
    OT_ERR_INVALID_ARGUMENT = 1,
    OT_ERR_PARSE = 2,
    OT_ERR_IO = 3,
    OT_ERR_VALIDATION = 4,
    OT_ERR_UNSUPPORTED = 5,
    OT_ERR_STATE = 6
};

typedef struct ot_catalog ot_catalog;
typedef struct ot_case ot_case;

ONETRACE_API const char* ot_version(void);
ONETRACE_API const char* ot_last_error(void);

/* ---- catalog ---------------------------------------------------------- */

ONETRACE_API ot_catalog* ot_catalog_builtin(void);
ONETRACE_API int ot_catalog_open(const char* path, ot_catalog** out);
ONETRACE_API int ot_catalog_parse(const char* data, size_t len, ot_catalog** out);
ONETRACE_API const char* ot_catalog_version(const ot_catalog* catalog);
ONETRACE_API size_t ot_catalog_rule_count(const ot_catalog* catalog);
/* Rendered catalog JSON; free with ot_buffer_free. */
ONETRACE_API int ot_catalog_render(const ot_catalog* catalog, char** out, size_t* out_len);
ONETRACE_API void ot_catalog_free(ot_catalog* catalog);

/* ---- case processing ---------------------------------------------------
 *
 * kind: memory-image | fs-tree | pcap | registry-export | database |
 *       cache-file | log
 * platform (optional): windows | macos | ios | auto
 * parser_hint (optional): log kind (sso | syncdaemon) or cache page
 *       (dashboard | files | opened)
 */

/* catalog may be NULL for the builtin; a non-NULL catalog handle must
 * outlive every case created from it. */
ONETRACE_API ot_case* ot_case_new(const char* case_id, const ot_catalog* catalog);
ONETRACE_API int ot_case_set_generated_at(ot_case* c, const char* rfc3339_utc);
ONETRACE_API int ot_case_set_jobs(ot_case* c, int jobs);
ONETRACE_API int ot_case_set_chunk_size(ot_case* c, uint64_t bytes);
ONETRACE_API int ot_case_add_input(ot_case* c, const char* kind, const char* path,
                                   const char* platform, const char* parser_hint);
ONETRACE_API int ot_case_add_manifest(ot_case* c, const char* manifest_path);

ONETRACE_API int ot_case_run(ot_case* c);

/* CLI exit code semantics: 0 findings present, 1 none; valid after run. */
ONETRACE_API int ot_case_exit_code(const ot_case* c);
ONETRACE_API size_t ot_case_finding_count(const ot_case* c);

/* format: "json" | "text"; free the buffer with ot_buffer_free. */
ONETRACE_API int ot_case_render(const ot_case* c, const char* format, char** out,
                                size_t* out_len);
ONETRACE_API int ot_case_write_report(const ot_case* c, const char* format, const char* path);
ONETRACE_API void ot_case_free(ot_case* c);

ONETRACE_API void ot_buffer_free(char* buffer);

#ifdef __cplusplus
}
#endif

#endif /* ONETRACE_H */
