#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "catalog.hpp"
#include "report.hpp"

namespace onetrace {

enum class LogLevel { debug, info, warning, error, unknown };
std::string_view to_string(LogLevel l);

// One log line. Unstructured lines are kept verbatim (structured == false,
// message holds the raw line) so no evidence is dropped silently.
struct LogEntry {
    bool structured = false;
    std::string timestamp;  // YYYY-MM-DD HH:MM:SS,mmm
    std::string logger;
    LogLevel level = LogLevel::unknown;
    std::string message;
};

enum class SyncEventKind { sv_file_new, fs_file_create, fs_file_delete, other };
std::string_view operation_for(SyncEventKind k);  // sync-new / upload / delete / other

struct SyncEvent {
    std::string timestamp;
    std::string path;
    SyncEventKind event = SyncEventKind::other;
    std::string event_name;
    std::string mdid;
    size_t line = 0;
};

struct SsoLogParse {
    std::vector<LogEntry> entries;
    std::vector<Finding> findings;
};

struct SyncLogParse {
    std::vector<LogEntry> entries;
    std::vector<SyncEvent> events;
    std::vector<Finding> findings;
};

// Lenient parsers: every line yields an entry, malformed lines are preserved
// as raw entries, and unparsed lines are swept against the catalog's generic
// keyword rules (the manual procedure for exported event logs).
SsoLogParse parse_sso_log(std::string_view text, const EvidenceSource& source,
                          const Catalog& catalog);
SyncLogParse parse_syncdaemon_log(std::string_view text, const EvidenceSource& source,
                                  const Catalog& catalog);

}  // namespace onetrace
