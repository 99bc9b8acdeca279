#include "logparse.hpp"

#include <algorithm>
#include <cctype>

#include "bytes.hpp"

namespace onetrace {

std::string_view to_string(LogLevel l) {
    switch (l) {
        case LogLevel::debug: return "DEBUG";
        case LogLevel::info: return "INFO";
        case LogLevel::warning: return "WARNING";
        case LogLevel::error: return "ERROR";
        case LogLevel::unknown: return "UNKNOWN";
    }
    return "UNKNOWN";
}

std::string_view operation_for(SyncEventKind k) {
    switch (k) {
        case SyncEventKind::sv_file_new: return "sync-new";
        case SyncEventKind::fs_file_create: return "upload";
        case SyncEventKind::fs_file_delete: return "delete";
        case SyncEventKind::other: return "other";
    }
    return "other";
}

namespace {

constexpr std::string_view kSep = " - ";
constexpr std::string_view kTimezoneNote = "local-time-unknown";

bool is_digit(char c) { return c >= '0' && c <= '9'; }

// YYYY-MM-DD HH:MM:SS,mmm
bool valid_timestamp(std::string_view s) {
    if (s.size() < 23) return false;
    for (size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u, 11u, 12u, 14u, 15u, 17u, 18u, 20u, 21u, 22u})
        if (!is_digit(s[i])) return false;
    return s[4] == '-' && s[7] == '-' && s[10] == ' ' && s[13] == ':' && s[16] == ':' &&
           s[19] == ',';
}

std::optional<LogLevel> level_from(std::string_view s) {
    if (s == "DEBUG") return LogLevel::debug;
    if (s == "INFO") return LogLevel::info;
    if (s == "WARNING") return LogLevel::warning;
    if (s == "ERROR") return LogLevel::error;
    return std::nullopt;
}

// `TIMESTAMP[:extra] - logger - LEVEL - message`; the timestamp field may
// carry a sub-millisecond tail which is dropped.
std::optional<LogEntry> parse_line(std::string_view line) {
    if (!valid_timestamp(line)) return std::nullopt;
    size_t p1 = line.find(kSep);
    if (p1 == std::string_view::npos || p1 < 23) return std::nullopt;
    size_t p2 = line.find(kSep, p1 + kSep.size());
    if (p2 == std::string_view::npos) return std::nullopt;
    size_t p3 = line.find(kSep, p2 + kSep.size());
    if (p3 == std::string_view::npos) return std::nullopt;

    auto level = level_from(trim_view(line.substr(p2 + kSep.size(), p3 - p2 - kSep.size())));
    if (!level) return std::nullopt;

    LogEntry e;
    e.structured = true;
    e.timestamp = std::string(line.substr(0, 23));
    e.logger = trim(line.substr(p1 + kSep.size(), p2 - p1 - kSep.size()));
    e.level = *level;
    e.message = std::string(line.substr(p3 + kSep.size()));
    return e;
}

// Generic keyword sweep from log-grammar rules carrying a "keyword" payload;
// applied to lines the structured grammar did not consume.
void sweep_keywords(std::string_view line, size_t line_no, const EvidenceSource& source,
                    const Catalog& catalog, std::vector<Finding>& findings) {
    for (const auto& r : catalog.rules()) {
        if (r.kind != RuleKind::log_grammar) continue;
        std::string keyword = r.payload.value("keyword", "");
        if (keyword.empty() || !icontains(line, keyword)) continue;
        Finding f;
        f.rule_id = r.rule_id;
        f.category = r.category;
        f.platform = r.platform;
        f.confidence = r.confidence;
        f.source = source;
        f.set_attr("keyword", keyword);
        f.set_attr("line", std::to_string(line_no));
        f.set_attr("detail", std::string(trim_view(line)));
        findings.push_back(std::move(f));
    }
}

const CatalogRule* grammar_rule(const Catalog& catalog, std::string_view grammar) {
    for (const auto& r : catalog.rules()) {
        if (r.kind == RuleKind::log_grammar && r.payload.value("grammar", "") == grammar)
            return &r;
    }
    return nullptr;
}

// Last 'quoted' span ending before `limit`.
std::optional<std::string_view> last_quoted_before(std::string_view s, size_t limit) {
    size_t close = s.rfind('\'', limit);
    if (close == std::string_view::npos || close == 0) return std::nullopt;
    size_t open = s.rfind('\'', close - 1);
    if (open == std::string_view::npos) return std::nullopt;
    return s.substr(open + 1, close - open - 1);
}

std::optional<std::string_view> quoted_after(std::string_view s, size_t from) {
    size_t open = s.find('\'', from);
    if (open == std::string_view::npos) return std::nullopt;
    size_t close = s.find('\'', open + 1);
    if (close == std::string_view::npos) return std::nullopt;
    return s.substr(open + 1, close - open - 1);
}

std::string event_token(std::string_view s, size_t from) {
    size_t end = from;
    while (end < s.size() &&
           (std::isupper(static_cast<unsigned char>(s[end])) || s[end] == '_' ||
            is_digit(s[end])))
        ++end;
    return std::string(s.substr(from, end - from));
}

SyncEventKind event_kind(std::string_view name) {
    if (name == "SV_FILE_NEW") return SyncEventKind::sv_file_new;
    if (name == "FS_FILE_CREATE") return SyncEventKind::fs_file_create;
    if (name == "FS_FILE_DELETE") return SyncEventKind::fs_file_delete;
    return SyncEventKind::other;
}

}  // namespace

SsoLogParse parse_sso_log(std::string_view text, const EvidenceSource& source,
                          const Catalog& catalog) {
    SsoLogParse out;
    const CatalogRule* signin = grammar_rule(catalog, "sso");
    std::string marker = signin ? signin->payload.value("marker", "") : std::string();

    size_t line_no = 0;
    for (auto line : split_lines(text)) {
        ++line_no;
        auto entry = parse_line(line);
        if (!entry) {
            LogEntry raw;
            raw.message = std::string(line);
            out.entries.push_back(std::move(raw));
            if (!trim_view(line).empty())
                sweep_keywords(line, line_no, source, catalog, out.findings);
            continue;
        }
        if (signin && !marker.empty()) {
            if (size_t pos = entry->message.find(marker); pos != std::string::npos) {
                std::string email =
                    trim(std::string_view(entry->message).substr(pos + marker.size()));
                if (!email.empty()) {
                    Finding f;
                    f.rule_id = signin->rule_id;
                    f.category = signin->category;
                    f.platform = signin->platform;
                    f.confidence = signin->confidence;
                    f.source = source;
                    f.set_attr("email", email);
                    f.set_attr("timestamp", entry->timestamp);
                    f.set_attr("timezone", std::string(kTimezoneNote));
                    f.set_attr("line", std::to_string(line_no));
                    out.findings.push_back(std::move(f));
                }
            }
        }
        out.entries.push_back(std::move(*entry));
    }
    return out;
}

SyncLogParse parse_syncdaemon_log(std::string_view text, const EvidenceSource& source,
                                  const Catalog& catalog) {
    SyncLogParse out;
    const CatalogRule* event_rule = grammar_rule(catalog, "syncdaemon");
    std::vector<std::pair<std::string, std::string>> mdid_by_path;

    auto mdid_for = [&](const std::string& path) -> std::string {
        for (const auto& [p, m] : mdid_by_path)
            if (p == path) return m;
        return {};
    };

    size_t line_no = 0;
    for (auto line : split_lines(text)) {
        ++line_no;
        auto entry = parse_line(line);
        std::string_view body = entry ? std::string_view(entry->message) : line;
        std::string timestamp = entry ? entry->timestamp : std::string();

        // fsm bookkeeping lines associate a path with its metadata id.
        size_t path_eq = body.find("path='");
        size_t mdid_eq = body.find("mdid='");
        if (path_eq != std::string_view::npos && mdid_eq != std::string_view::npos) {
            auto path = quoted_after(body, path_eq + 4);
            auto mdid = quoted_after(body, mdid_eq + 4);
            if (path && mdid && !path->empty() && !mdid->empty()) {
                std::string key(*path);
                if (mdid_for(key).empty()) mdid_by_path.emplace_back(key, std::string(*mdid));
            }
        }

        SyncEvent ev;
        bool have_event = false;
        if (size_t epos = body.find("EVENT: "); epos != std::string_view::npos) {
            ev.event_name = event_token(body, epos + 7);
            if (auto path = last_quoted_before(body, epos)) ev.path = std::string(*path);
            have_event = !ev.event_name.empty();
        } else if (size_t ppos = body.find("push_event: "); ppos != std::string_view::npos) {
            ev.event_name = event_token(body, ppos + 12);
            if (size_t kw = body.find("'path':", ppos); kw != std::string_view::npos) {
                if (auto path = quoted_after(body, kw + 7)) ev.path = std::string(*path);
            }
            have_event = !ev.event_name.empty();
        }

        if (have_event) {
            ev.event = event_kind(ev.event_name);
            ev.timestamp = timestamp;
            ev.line = line_no;
            out.events.push_back(ev);
        }

        if (entry) {
            out.entries.push_back(std::move(*entry));
        } else {
            LogEntry raw;
            raw.message = std::string(line);
            out.entries.push_back(std::move(raw));
            if (!have_event && !trim_view(line).empty())
                sweep_keywords(line, line_no, source, catalog, out.findings);
        }
    }

    for (auto& ev : out.events)
        if (ev.mdid.empty() && !ev.path.empty()) ev.mdid = mdid_for(ev.path);

    if (event_rule) {
        for (const auto& ev : out.events) {
            if (ev.path.empty()) continue;
            Finding f;
            f.rule_id = event_rule->rule_id;
            f.category = event_rule->category;
            f.platform = event_rule->platform;
            f.confidence = event_rule->confidence;
            f.source = source;
            f.set_attr("path", ev.path);
            f.set_attr("operation", std::string(operation_for(ev.event)));
            f.set_attr("event", ev.event_name);
            if (!ev.timestamp.empty()) {
                f.set_attr("timestamp", ev.timestamp);
                f.set_attr("timezone", std::string(kTimezoneNote));
            }
            if (!ev.mdid.empty()) f.set_attr("mdid", ev.mdid);
            f.set_attr("line", std::to_string(ev.line));
            out.findings.push_back(std::move(f));
        }
    }
    return out;
}

}  // namespace onetrace
