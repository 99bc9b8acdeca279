#include "catalog.hpp"

#include <algorithm>

#include "bytes.hpp"
#include "version.hpp"

namespace onetrace {

using ordered_json = nlohmann::ordered_json;

std::string_view to_string(RuleKind k) {
    switch (k) {
        case RuleKind::fs_path: return "fs-path";
        case RuleKind::process_name: return "process-name";
        case RuleKind::registry_key: return "registry-key";
        case RuleKind::url_prefix: return "url-prefix";
        case RuleKind::hostname: return "hostname";
        case RuleKind::ip_range: return "ip-range";
        case RuleKind::memory_signature: return "memory-signature";
        case RuleKind::log_grammar: return "log-grammar";
        case RuleKind::db_schema: return "db-schema";
        case RuleKind::html_pattern: return "html-pattern";
    }
    return "fs-path";
}

std::optional<RuleKind> rule_kind_from(std::string_view s) {
    if (s == "fs-path") return RuleKind::fs_path;
    if (s == "process-name") return RuleKind::process_name;
    if (s == "registry-key") return RuleKind::registry_key;
    if (s == "url-prefix") return RuleKind::url_prefix;
    if (s == "hostname") return RuleKind::hostname;
    if (s == "ip-range") return RuleKind::ip_range;
    if (s == "memory-signature") return RuleKind::memory_signature;
    if (s == "log-grammar") return RuleKind::log_grammar;
    if (s == "db-schema") return RuleKind::db_schema;
    if (s == "html-pattern") return RuleKind::html_pattern;
    return std::nullopt;
}

Catalog::Catalog(std::string version, std::vector<CatalogRule> rules)
    : version_(std::move(version)), rules_(std::move(rules)) {
    for (size_t i = 0; i < rules_.size(); ++i) index_[rules_[i].rule_id] = i;
}

const CatalogRule* Catalog::find(std::string_view rule_id) const {
    auto it = index_.find(std::string(rule_id));
    return it == index_.end() ? nullptr : &rules_[it->second];
}

std::vector<const CatalogRule*> Catalog::rules_for(Platform platform, RuleKind kind) const {
    std::vector<const CatalogRule*> out;
    for (const auto& r : rules_) {
        if (r.kind != kind) continue;
        if (r.platform == Platform::any || r.platform == platform) out.push_back(&r);
    }
    return out;
}

std::optional<uint32_t> parse_ipv4(std::string_view s) {
    uint32_t addr = 0;
    int octets = 0;
    size_t i = 0;
    while (i <= s.size() && octets < 4) {
        size_t dot = s.find('.', i);
        std::string_view part =
            (dot == std::string_view::npos) ? s.substr(i) : s.substr(i, dot - i);
        if (part.empty() || part.size() > 3) return std::nullopt;
        uint32_t v = 0;
        for (char c : part) {
            if (c < '0' || c > '9') return std::nullopt;
            v = v * 10 + static_cast<uint32_t>(c - '0');
        }
        if (v > 255) return std::nullopt;
        addr = addr << 8 | v;
        ++octets;
        if (dot == std::string_view::npos) {
            i = s.size() + 1;
            break;
        }
        i = dot + 1;
    }
    if (octets != 4 || i != s.size() + 1) return std::nullopt;
    return addr;
}

std::string format_ipv4(uint32_t addr) {
    return std::to_string(addr >> 24) + "." + std::to_string(addr >> 16 & 0xff) + "." +
           std::to_string(addr >> 8 & 0xff) + "." + std::to_string(addr & 0xff);
}

bool hostname_matches(std::string_view pattern, std::string_view name) {
    return iequals(pattern, name);
}

namespace {

CatalogRule rule(std::string id, Platform platform, RuleKind kind, Category category,
                 Confidence confidence, std::string citation, ordered_json payload) {
    CatalogRule r;
    r.rule_id = std::move(id);
    r.platform = platform;
    r.kind = kind;
    r.category = category;
    r.confidence = confidence;
    r.citation = std::move(citation);
    r.payload = std::move(payload);
    return r;
}

// Terminator sets used by the memory signatures: delimiters seen around the
// captured values in browser form bodies, HTML, and serialized paths.
const ordered_json kFormTerms = {38, 34, 0, 13, 10};          // & " NUL CR LF
const ordered_json kQuoteTerm = {34};                         // "
const ordered_json kSingleQuoteTerm = {39};                   // '
const ordered_json kLineTerms = {0, 13, 10, 38, 60};          // NUL CR LF & <
const ordered_json kPathTerms = {34, 92, 0};                  // " backslash NUL
const ordered_json kPosixPathTerms = {0, 13, 10, 34, 39};     // NUL CR LF " '

std::vector<CatalogRule> builtin_rules() {
    std::vector<CatalogRule> rules;
    auto add = [&rules](CatalogRule r) { rules.push_back(std::move(r)); };

    // --- Windows client file system --------------------------------------
    add(rule("win.fs.startmenu", Platform::windows, RuleKind::fs_path,
             Category::presence_indicator, Confidence::high, "survey: windows client folders",
             {{"path", R"(C:\ProgramData\Microsoft\Windows\Start Menu\Programs\Ubuntu One)"}}));
    add(rule("win.fs.programfiles", Platform::windows, RuleKind::fs_path,
             Category::presence_indicator, Confidence::high, "survey: windows client folders",
             {{"path", R"(C:\Program Files (x86)\ubuntuone)"},
              {"install_role", "win-pf"}}));
    add(rule("win.fs.appdata-ubuntuone", Platform::windows, RuleKind::fs_path,
             Category::presence_indicator, Confidence::high, "survey: windows client folders",
             {{"path", R"(C:\Users\{user}\AppData\Local\ubuntuone)"},
              {"install_role", "win-residue"}}));
    add(rule("win.fs.xdg-cache", Platform::windows, RuleKind::fs_path,
             Category::presence_indicator, Confidence::high, "survey: windows client folders",
             {{"path", R"(C:\Users\{user}\AppData\Local\xdg\cache)"},
              {"install_role", "win-residue"}}));
    add(rule("win.fs.xdg-ubuntuone", Platform::windows, RuleKind::fs_path,
             Category::presence_indicator, Confidence::high, "survey: windows client folders",
             {{"path", R"(C:\Users\{user}\AppData\Local\xdg\ubuntuone)"},
              {"install_role", "win-residue"}}));
    add(rule("win.fs.programdata-ubuntuone", Platform::windows, RuleKind::fs_path,
             Category::presence_indicator, Confidence::high, "survey: windows client folders",
             {{"path", R"(C:\ProgramData\ubuntuone)"},
              {"install_role", "win-residue"}}));
    add(rule("win.fs.default-folder", Platform::windows, RuleKind::fs_path,
             Category::presence_indicator, Confidence::high, "survey: windows client folders",
             {{"path", R"(C:\Users\{user}\Ubuntu One)"},
              {"install_role", "win-residue"}}));

    // Known log locations inside the folders above.
    add(rule("win.fs.sso-log", Platform::windows, RuleKind::fs_path,
             Category::presence_indicator, Confidence::high, "survey: windows client logs",
             {{"path", R"(C:\Users\{user}\AppData\Local\xdg\cache\sso\sso-client.log)"}}));
    add(rule("win.fs.sso-gui-log", Platform::windows, RuleKind::fs_path,
             Category::presence_indicator, Confidence::high, "survey: windows client logs",
             {{"path", R"(C:\Users\{user}\AppData\Local\xdg\cache\sso\sso-client-gui.log)"}}));
    add(rule("win.fs.install-log", Platform::windows, RuleKind::fs_path,
             Category::presence_indicator, Confidence::medium, "survey: windows client logs",
             {{"path", R"(C:\Program Files (x86)\ubuntuone\install.log)"}}));

    // --- Windows client processes ----------------------------------------
    add(rule("win.proc.sso-login", Platform::windows, RuleKind::process_name,
             Category::presence_indicator, Confidence::high, "survey: windows client processes",
             {{"name", "ubuntu-sso-login.exe"}}));
    add(rule("win.proc.control-panel", Platform::windows, RuleKind::process_name,
             Category::presence_indicator, Confidence::high, "survey: windows client processes",
             {{"name", "ubuntuone-control-panel-qt.exe"}}));
    add(rule("win.proc.syncdaemon", Platform::windows, RuleKind::process_name,
             Category::presence_indicator, Confidence::high, "survey: windows client processes",
             {{"name", "ubuntuonesyncdaemon.exe"}}));

    // --- Windows registry --------------------------------------------------
    add(rule("win.reg.hklm-ubuntuone", Platform::windows, RuleKind::registry_key,
             Category::presence_indicator, Confidence::high, "survey: registry after install",
             {{"key", R"(HKEY_LOCAL_MACHINE\SOFTWARE\Wow6432Node\Ubuntu One)"},
              {"match", "exact"}}));
    add(rule("win.reg.hkcu-ubuntuone", Platform::windows, RuleKind::registry_key,
             Category::presence_indicator, Confidence::high, "survey: registry after install",
             {{"key", R"(HKEY_CURRENT_USER\Software\Ubuntu One)"}, {"match", "exact"}}));
    add(rule("win.reg.run-syncdaemon", Platform::windows, RuleKind::registry_key,
             Category::presence_indicator, Confidence::high, "survey: registry run key",
             {{"key", R"(HKEY_CURRENT_USER\Software\Microsoft\Windows\CurrentVersion\Run)"},
              {"match", "suffix"},
              {"value_contains", "ubuntuone-syncdaemon.exe"}}));
    add(rule("win.reg.uninstall", Platform::windows, RuleKind::registry_key,
             Category::presence_indicator, Confidence::high, "survey: uninstall key",
             {{"key",
               R"(HKEY_LOCAL_MACHINE\SOFTWARE\Wow6432Node\Microsoft\Windows\CurrentVersion\Uninstall\Ubuntu One 4.2)"},
              {"match", "exact"}}));
    add(rule("win.reg.ufh-shc", Platform::windows, RuleKind::registry_key,
             Category::presence_indicator, Confidence::medium, "survey: UFH shortcut cache",
             {{"key", R"(HKEY_CURRENT_USER\Software\Microsoft\Windows\CurrentVersion\UFH\SHC)"},
              {"match", "suffix"},
              {"value_contains", "Ubuntu One"}}));
    add(rule("win.reg.typedurls", Platform::windows, RuleKind::registry_key,
             Category::presence_indicator, Confidence::high, "survey: typed URL history",
             {{"key", R"(Software\Microsoft\Internet Explorer\TypedURLs)"},
              {"match", "suffix"}}));
    add(rule("win.reg.typedurlstime", Platform::windows, RuleKind::registry_key,
             Category::presence_indicator, Confidence::high, "survey: typed URL timestamps",
             {{"key", R"(Software\Microsoft\Internet Explorer\TypedURLsTime)"},
              {"match", "suffix"}}));
    add(rule("win.reg.recentdocs", Platform::windows, RuleKind::registry_key,
             Category::file_activity, Confidence::high, "survey: recent documents MRU",
             {{"key", R"(Software\Microsoft\Windows\CurrentVersion\Explorer\RecentDocs)"},
              {"match", "suffix"}}));

    // --- Mac OS X client ----------------------------------------------------
    add(rule("mac.fs.app", Platform::macos, RuleKind::fs_path, Category::presence_indicator,
             Confidence::high, "survey: macos install directories",
             {{"path", "/Applications/Ubuntu One.app"}, {"install_role", "mac-app"}}));
    add(rule("mac.fs.default-folder", Platform::macos, RuleKind::fs_path,
             Category::presence_indicator, Confidence::high, "survey: macos install directories",
             {{"path", "/Users/{user}/Ubuntu One"}}));
    add(rule("mac.fs.app-support", Platform::macos, RuleKind::fs_path,
             Category::presence_indicator, Confidence::high, "survey: macos install directories",
             {{"path", "/Users/{user}/Library/Application Support/Ubuntuone"},
              {"install_role", "mac-library"}}));
    add(rule("mac.fs.caches-ubuntuone", Platform::macos, RuleKind::fs_path,
             Category::presence_indicator, Confidence::high, "survey: macos install directories",
             {{"path", "/Users/{user}/Library/Caches/ubuntuone"},
              {"install_role", "mac-library"}}));
    add(rule("mac.fs.caches-sso", Platform::macos, RuleKind::fs_path,
             Category::presence_indicator, Confidence::high, "survey: macos install directories",
             {{"path", "/Users/{user}/Library/Caches/sso"},
              {"install_role", "mac-library"}}));
    add(rule("mac.fs.sso-log", Platform::macos, RuleKind::fs_path, Category::presence_indicator,
             Confidence::high, "survey: macos client logs",
             {{"path", "/Users/{user}/Library/Caches/sso/sso-client.log"}}));
    add(rule("mac.fs.sso-gui-log", Platform::macos, RuleKind::fs_path,
             Category::presence_indicator, Confidence::high, "survey: macos client logs",
             {{"path", "/Users/{user}/Library/Caches/sso/sso-client-gui.log"}}));
    add(rule("mac.fs.syncdaemon-log", Platform::macos, RuleKind::fs_path,
             Category::presence_indicator, Confidence::high, "survey: macos client logs",
             {{"path", "/Users/{user}/Library/Caches/ubuntuone/syncdaemon.log"}}));

    // --- iOS (unofficial U1Files client) -----------------------------------
    add(rule("ios.fs.app-documents", Platform::ios, RuleKind::fs_path,
             Category::presence_indicator, Confidence::high, "survey: ios app container",
             {{"path", "/private/var/mobile/Applications/{uuid}/Documents/Ubuntu One"}}));

    // --- Service URLs seen in browser cache and history ---------------------
    add(rule("web.url.media", Platform::any, RuleKind::url_prefix,
             Category::presence_indicator, Confidence::high, "survey: browser history URLs",
             {{"prefix", "https://media.one.ubuntu.com"}}));
    add(rule("web.url.one", Platform::any, RuleKind::url_prefix, Category::presence_indicator,
             Confidence::high, "survey: browser history URLs",
             {{"prefix", "https://one.ubuntu.com"}}));
    add(rule("web.url.login", Platform::any, RuleKind::url_prefix, Category::presence_indicator,
             Confidence::high, "survey: browser history URLs",
             {{"prefix", "https://login.ubuntu.com/"}}));
    add(rule("web.url.files", Platform::any, RuleKind::url_prefix, Category::presence_indicator,
             Confidence::high, "survey: browser history URLs",
             {{"prefix", "https://files.one.ubuntu.com/"}}));

    // --- Network indicators --------------------------------------------------
    // mode_marker feeds the usage-mode heuristic: "web" hostnames only appear
    // for browser sessions, "core" hostnames appear for both browser and
    // client sessions.
    add(rule("net.host.one", Platform::any, RuleKind::hostname, Category::network_indicator,
             Confidence::high, "survey: capture hostnames",
             {{"host", "one.ubuntu.com"}, {"mode_marker", "core"}}));
    add(rule("net.host.media-one", Platform::any, RuleKind::hostname,
             Category::network_indicator, Confidence::high, "survey: capture hostnames",
             {{"host", "media.one.ubuntu.com"}, {"mode_marker", "web"}}));
    add(rule("net.host.login-one", Platform::any, RuleKind::hostname,
             Category::network_indicator, Confidence::high, "survey: capture hostnames",
             {{"host", "login.one.ubuntu.com"}, {"mode_marker", "core"}}));
    add(rule("net.host.login-sso", Platform::any, RuleKind::hostname,
             Category::network_indicator, Confidence::high, "survey: SSO endpoint",
             {{"host", "login.ubuntu.com"}, {"mode_marker", "core"}}));
    add(rule("net.host.files-one", Platform::any, RuleKind::hostname,
             Category::network_indicator, Confidence::high, "survey: file download endpoint",
             {{"host", "files.one.ubuntu.com"}}));
    // Reported once as "media.ubuntu.com"; kept as its own rule next to
    // media.one.ubuntu.com instead of assuming one of the two is a typo.
    add(rule("net.host.media-plain", Platform::any, RuleKind::hostname,
             Category::network_indicator, Confidence::medium, "survey: capture hostnames",
             {{"host", "media.ubuntu.com"}, {"mode_marker", "web"}}));

    add(rule("net.ip.one", Platform::any, RuleKind::ip_range, Category::network_indicator,
             Confidence::high, "survey: capture address ranges",
             {{"low", "91.189.89.77"}, {"high", "91.189.89.78"},
              {"label", "one.ubuntu.com"}}));
    add(rule("net.ip.media-one", Platform::any, RuleKind::ip_range, Category::network_indicator,
             Confidence::high, "survey: capture address ranges",
             {{"low", "91.189.89.182"}, {"high", "91.189.89.183"},
              {"label", "media.one.ubuntu.com"}}));
    add(rule("net.ip.login-one", Platform::any, RuleKind::ip_range, Category::network_indicator,
             Confidence::high, "survey: capture address ranges",
             {{"low", "91.189.89.206"}, {"high", "91.189.89.207"},
              {"label", "login.one.ubuntu.com"}}));

    // --- Memory signatures -----------------------------------------------
    add(rule("mem.web.credentials", Platform::windows, RuleKind::memory_signature,
             Category::credential, Confidence::high, "memory: login form post body",
             {{"anchor", "login&password="},
              {"operation", "login"},
              {"encodings", {"ascii", "utf16le"}},
              {"captures",
               {{{"name", "password"}, {"direction", "after"}, {"terminators", kFormTerms},
                 {"max_len", 64}, {"required", true}},
                {{"name", "email"}, {"direction", "before"}, {"marker", "&email="},
                 {"terminators", kFormTerms}, {"max_len", 128}, {"required", false},
                 {"window", 192}, {"transform", "percent-decode"}}}}}));
    add(rule("mem.web.openid-email", Platform::windows, RuleKind::memory_signature,
             Category::identity, Confidence::high, "memory: openid attribute exchange",
             {{"anchor", "openid.ax.value.email"},
              {"encodings", {"ascii", "utf16le"}},
              {"captures",
               {{{"name", "email"}, {"direction", "after"}, {"marker", "value=\""},
                 {"terminators", kQuoteTerm}, {"max_len", 128}, {"required", true},
                 {"window", 64}, {"transform", "strip-crlf"}}}}}));
    add(rule("mem.web.delete", Platform::windows, RuleKind::memory_signature,
             Category::file_activity, Confidence::high, "memory: delete control markup",
             {{"anchor", "title=\"Delete File\""},
              {"operation", "delete"},
              {"encodings", {"ascii", "utf16le"}},
              {"captures",
               {{{"name", "filename"}, {"direction", "after"}, {"marker", "<a title=\""},
                 {"terminators", kQuoteTerm}, {"max_len", 256}, {"required", true},
                 {"window", 600},
                 {"confirm", "href=\"https://files.one.ubuntu.com/"},
                 {"confirm_window", 64}}}}}));
    add(rule("mem.web.download", Platform::windows, RuleKind::memory_signature,
             Category::file_activity, Confidence::high, "memory: attachment response header",
             {{"anchor", "Content-Disposition: attachment; filename="},
              {"operation", "download-open"},
              {"encodings", {"ascii", "utf16le"}},
              {"captures",
               {{{"name", "filename"}, {"direction", "after"}, {"terminators", kLineTerms},
                 {"max_len", 256}, {"required", true}, {"transform", "trim"}}}}}));
    add(rule("mem.web.upload", Platform::windows, RuleKind::memory_signature,
             Category::file_activity, Confidence::high, "memory: multipart upload part",
             {{"anchor", "name=\"file\"; filename=\""},
              {"operation", "upload"},
              {"encodings", {"ascii", "utf16le"}},
              {"captures",
               {{{"name", "filename"}, {"direction", "after"}, {"terminators", kQuoteTerm},
                 {"max_len", 256}, {"required", true}}}}}));
    add(rule("mem.client.openid", Platform::windows, RuleKind::memory_signature,
             Category::identity, Confidence::medium, "memory: client openid identity URL",
             {{"anchor", "https://login.ubuntu.com/+id"},
              {"encodings", {"ascii", "utf16le"}},
              {"captures",
               {{{"name", "openid-suffix"}, {"direction", "after"}, {"marker", "/"},
                 {"terminators", kFormTerms}, {"max_len", 64}, {"required", true},
                 {"window", 4}},
                {{"name", "email"}, {"direction", "before"},
                 {"terminators", {0, 13, 10}}, {"max_len", 128}, {"required", false},
                 {"window", 128}, {"transform", "email-token"}}}}}));
    add(rule("mem.client.syncpath", Platform::windows, RuleKind::memory_signature,
             Category::file_activity, Confidence::high,
             "memory: escaped default-folder path",
             {{"anchor", "\\\\\\\\Ubuntu One\\\\\\\\"},
              {"operation", "sync"},
              {"encodings", {"ascii", "utf16le"}},
              {"captures",
               {{{"name", "filename"}, {"direction", "after"}, {"terminators", kPathTerms},
                 {"max_len", 256}, {"required", true}, {"transform", "trim"}}}}}));
    add(rule("mem.mac.syncpath", Platform::macos, RuleKind::memory_signature,
             Category::file_activity, Confidence::high, "memory: default-folder posix path",
             {{"anchor", "/Ubuntu One/"},
              {"operation", "sync"},
              {"encodings", {"ascii", "utf16le"}},
              {"requires_before", "/Users/"},
              {"requires_before_window", 64},
              {"captures",
               {{{"name", "filename"}, {"direction", "after"},
                 {"terminators", kPosixPathTerms}, {"max_len", 256},
                 {"required", true}}}}}));
    add(rule("mem.mac.push-create", Platform::macos, RuleKind::memory_signature,
             Category::file_activity, Confidence::high, "memory: sync daemon create event",
             {{"anchor", "push_event: FS_FILE_CREATE, kwargs: {'path':"},
              {"operation", "upload"},
              {"encodings", {"ascii", "utf16le"}},
              {"captures",
               {{{"name", "filename"}, {"direction", "after"}, {"marker", "'"},
                 {"terminators", kSingleQuoteTerm}, {"max_len", 256}, {"required", true},
                 {"window", 8}}}}}));
    add(rule("mem.mac.event-delete", Platform::macos, RuleKind::memory_signature,
             Category::file_activity, Confidence::high, "memory: sync daemon delete event",
             {{"anchor", "EVENT: FS_FILE_DELETE"},
              {"operation", "delete"},
              {"encodings", {"ascii", "utf16le"}},
              {"captures",
               {{{"name", "filename"}, {"direction", "before"}, {"marker", "/Ubuntu One/"},
                 {"terminators", kSingleQuoteTerm}, {"max_len", 256}, {"required", false},
                 {"window", 300}}}}}));

    // --- Artifact files routed to structured parsers ------------------------
    auto artifact = [&](std::string id, std::string file, std::string parser,
                        Category category, std::string citation, std::string path_hint = "") {
        ordered_json payload{{"file", std::move(file)}};
        if (!parser.empty()) payload["parser"] = std::move(parser);
        if (!path_hint.empty()) payload["requires"] = std::move(path_hint);
        add(rule(std::move(id), Platform::any, RuleKind::fs_path, category, Confidence::high,
                 std::move(citation), std::move(payload)));
    };
    artifact("art.log.sso", "sso-client.log", "logparse.sso", Category::presence_indicator,
             "artifact: sso client log");
    artifact("art.log.sso-gui", "sso-client-gui.log", "logparse.sso",
             Category::presence_indicator, "artifact: sso client gui log");
    artifact("art.log.syncdaemon", "syncdaemon.log", "logparse.syncdaemon",
             Category::presence_indicator, "artifact: sync daemon log");
    artifact("art.log.install", "install.log", "", Category::presence_indicator,
             "artifact: installer log", "ubuntuone");
    artifact("art.db.u1", "u1.db", "storeparse.u1db", Category::presence_indicator,
             "artifact: mobile client database");
    artifact("art.plist.itunes", "iTunesMetadata.plist", "storeparse.plist",
             Category::presence_indicator, "artifact: app store purchase metadata");
    artifact("art.cache.dashboard", "dashboard.htm", "webreg.dashboard",
             Category::presence_indicator, "artifact: dashboard cache page");
    artifact("art.cache.files", "files.htm", "webreg.files", Category::presence_indicator,
             "artifact: file list cache page");
    artifact("art.cache.opened", "opened.htm", "webreg.opened", Category::presence_indicator,
             "artifact: login continuation cache page");
    artifact("art.cache.opened-plus", "+opened.htm", "webreg.opened",
             Category::presence_indicator, "artifact: login continuation cache page");

    // --- Install-state decision tables -------------------------------------
    add(rule("win.install-verdict", Platform::windows, RuleKind::db_schema,
             Category::install_state, Confidence::high, "survey: windows uninstall residue",
             {{"decision_table", "windows-uninstall"}}));
    add(rule("mac.install-verdict", Platform::macos, RuleKind::db_schema,
             Category::install_state, Confidence::high, "survey: macos uninstall residue",
             {{"decision_table", "macos-uninstall"}}));

    // --- Log grammars ---------------------------------------------------------
    add(rule("log.sso.signin", Platform::any, RuleKind::log_grammar, Category::identity,
             Confidence::high, "log: sso sign-in line",
             {{"grammar", "sso"}, {"marker", "CurrentUserSignInPage.login for:"}}));
    add(rule("log.syncdaemon.event", Platform::any, RuleKind::log_grammar,
             Category::file_activity, Confidence::high, "log: sync daemon event line",
             {{"grammar", "syncdaemon"}}));
    add(rule("log.keyword.ubuntu", Platform::any, RuleKind::log_grammar,
             Category::presence_indicator, Confidence::medium,
             "log: generic keyword sweep for exported text logs",
             {{"keyword", "Ubuntu"}}));

    // --- Structured store schemas ----------------------------------------
    add(rule("db.u1.login-info", Platform::ios, RuleKind::db_schema, Category::oauth_token,
             Confidence::high, "store: mobile auth token table",
             {{"table", "login_info_table"},
              {"columns", {"id", "consumer_key", "consumer_secret", "token", "token_secret"}}}));
    add(rule("db.u1.nodes", Platform::ios, RuleKind::db_schema, Category::file_activity,
             Confidence::high, "store: mobile node table",
             {{"table", "nodes_table"},
              {"columns",
               {"parent_path", "type", "path", "content_path", "name", "is_public",
                "public_url", "size", "last_modified", "hash"}}}));
    add(rule("db.u1.version", Platform::ios, RuleKind::db_schema, Category::config,
             Confidence::high, "store: mobile app version table",
             {{"table", "version_table"}, {"columns", {"id", "version"}}}));
    add(rule("db.sqlite.journal", Platform::any, RuleKind::db_schema, Category::config,
             Confidence::low, "store: database journal mode",
             {{"feature", "journal-mode"}}));
    add(rule("plist.itunes.apple-id", Platform::ios, RuleKind::db_schema, Category::identity,
             Confidence::high, "store: purchase metadata apple id",
             {{"store", "itunes-metadata"}, {"key", "appleId"}}));
    add(rule("plist.itunes.purchase-date", Platform::ios, RuleKind::db_schema,
             Category::config, Confidence::high, "store: purchase metadata date",
             {{"store", "itunes-metadata"}, {"key", "purchaseDate"}}));

    // --- Browser cache page patterns ---------------------------------------
    add(rule("web.cache.dashboard-welcome", Platform::any, RuleKind::html_pattern,
             Category::identity, Confidence::high, "cache: dashboard welcome span",
             {{"page", "dashboard"}, {"marker", "<span>Welcome"}, {"end", "</span>"}}));
    add(rule("web.cache.opened-email", Platform::any, RuleKind::html_pattern,
             Category::identity, Confidence::high, "cache: openid email attribute",
             {{"page", "opened"}, {"name", "openid.ax.value.email"}}));
    add(rule("web.cache.opened-fullname", Platform::any, RuleKind::html_pattern,
             Category::identity, Confidence::high, "cache: openid fullname attribute",
             {{"page", "opened"}, {"name", "openid.ax.value.fullname"}}));
    add(rule("web.cache.opened-identity", Platform::any, RuleKind::html_pattern,
             Category::identity, Confidence::high, "cache: openid identity URL",
             {{"page", "opened"}, {"name", "openid.identity"},
              {"url_prefix", "https://login.ubuntu.com/+id/"}}));
    add(rule("web.cache.files-row", Platform::any, RuleKind::html_pattern,
             Category::file_activity, Confidence::high, "cache: file table row",
             {{"page", "files"},
              {"name_cell", "files-td-name"},
              {"size_cell", "files-td-size"},
              {"date_cell", "files-td-date"},
              {"href_prefix", "https://files.one.ubuntu.com/"}}));

    // Tool diagnostics (unreadable inputs, skipped records) are reported as
    // config findings against this rule so that every finding cites the
    // active catalog.
    add(rule("core.diagnostic", Platform::any, RuleKind::log_grammar, Category::config,
             Confidence::low, "tool diagnostic", {{"grammar", "diagnostic"}}));

    return rules;
}

Result<void> validate_payload(const CatalogRule& r) {
    const auto& p = r.payload;
    auto err = [&](const std::string& why) {
        return make_error("validation-error", "rule '" + r.rule_id + "': " + why);
    };
    if (!p.is_object()) return err("payload must be an object");

    auto has_str = [&](const char* key) {
        auto it = p.find(key);
        return it != p.end() && it->is_string() && !it->get<std::string>().empty();
    };

    switch (r.kind) {
        case RuleKind::fs_path: {
            if (!has_str("path") && !has_str("file"))
                return err("fs-path payload needs 'path' or 'file'");
            if (has_str("path")) {
                std::string path = p["path"].get<std::string>();
                for (size_t i = 0; i < path.size(); ++i) {
                    if (path[i] != '{') continue;
                    size_t close = path.find('}', i);
                    if (close == std::string::npos) return err("unterminated placeholder");
                    std::string token = path.substr(i + 1, close - i - 1);
                    if (token != "user" && token != "uuid")
                        return err("placeholder '{" + token + "}' not allowed");
                    i = close;
                }
                if (path.find("..") != std::string::npos)
                    return err("path may not contain '..'");
            }
            break;
        }
        case RuleKind::process_name:
            if (!has_str("name")) return err("process-name payload needs 'name'");
            break;
        case RuleKind::registry_key:
            if (!has_str("key")) return err("registry-key payload needs 'key'");
            break;
        case RuleKind::url_prefix:
            if (!has_str("prefix")) return err("url-prefix payload needs 'prefix'");
            break;
        case RuleKind::hostname: {
            if (!has_str("host")) return err("hostname payload needs 'host'");
            if (auto it = p.find("mode_marker"); it != p.end()) {
                if (!it->is_string() ||
                    (it->get<std::string>() != "web" && it->get<std::string>() != "core"))
                    return err("mode_marker must be 'web' or 'core'");
            }
            break;
        }
        case RuleKind::ip_range: {
            if (!has_str("low") || !has_str("high"))
                return err("ip-range payload needs 'low' and 'high'");
            auto low = parse_ipv4(p["low"].get<std::string>());
            auto high = parse_ipv4(p["high"].get<std::string>());
            if (!low || !high) return err("ip-range bounds must be valid IPv4 addresses");
            if (*low > *high) return err("ip-range low must not exceed high");
            break;
        }
        case RuleKind::memory_signature: {
            if (!has_str("anchor")) return err("memory-signature payload needs 'anchor'");
            auto caps = p.find("captures");
            if (caps != p.end()) {
                if (!caps->is_array()) return err("captures must be an array");
                for (const auto& c : *caps) {
                    if (!c.is_object()) return err("capture must be an object");
                    if (!c.contains("name") || !c["name"].is_string() ||
                        c["name"].get<std::string>().empty())
                        return err("capture needs a name");
                    std::string dir = c.value("direction", "");
                    if (dir != "before" && dir != "after")
                        return err("capture direction must be 'before' or 'after'");
                    auto terms = c.find("terminators");
                    if (terms == c.end() || !terms->is_array() || terms->empty())
                        return err("capture terminator set must be non-empty");
                    for (const auto& t : *terms)
                        if (!t.is_number_integer() || t.get<int>() < 0 || t.get<int>() > 255)
                            return err("terminators must be byte values");
                    int max_len = c.value("max_len", 0);
                    if (max_len < 1 || max_len > 256)
                        return err("capture max_len must be in [1, 256]");
                }
            }
            break;
        }
        case RuleKind::log_grammar:
            if (!has_str("grammar") && !has_str("keyword"))
                return err("log-grammar payload needs 'grammar' or 'keyword'");
            break;
        case RuleKind::db_schema:
        case RuleKind::html_pattern:
            break;
    }
    return {};
}

Result<Catalog> load_catalog_json(const ordered_json& j) {
    if (!j.is_object()) return make_error("parse-error", "catalog root must be an object");
    auto ver = j.find("version");
    if (ver == j.end() || !ver->is_string() || ver->get<std::string>().empty())
        return make_error("validation-error", "catalog version must be a non-empty string");
    auto jrules = j.find("rules");
    if (jrules == j.end() || !jrules->is_array())
        return make_error("validation-error", "catalog needs a rules array");

    std::vector<CatalogRule> rules;
    std::unordered_map<std::string, bool> seen;
    for (const auto& jr : *jrules) {
        if (!jr.is_object())
            return make_error("validation-error", "each rule must be an object");
        CatalogRule r;
        r.rule_id = jr.value("id", "");
        if (r.rule_id.empty()) return make_error("validation-error", "rule missing id");
        if (seen.count(r.rule_id))
            return make_error("validation-error", "duplicate rule_id '" + r.rule_id + "'");
        seen[r.rule_id] = true;

        auto plat = platform_from(jr.value("platform", ""));
        auto kind = rule_kind_from(jr.value("kind", ""));
        auto cat = category_from(jr.value("category", ""));
        auto conf = confidence_from(jr.value("confidence", ""));
        if (!plat || !kind || !cat || !conf)
            return make_error("validation-error",
                              "rule '" + r.rule_id + "': bad platform/kind/category/confidence");
        r.platform = *plat;
        r.kind = *kind;
        r.category = *cat;
        r.confidence = *conf;
        r.citation = jr.value("citation", "");
        if (auto it = jr.find("payload"); it != jr.end())
            r.payload = *it;
        else
            r.payload = ordered_json::object();
        if (auto v = validate_payload(r); !v) return v.error();
        rules.push_back(std::move(r));
    }
    return Catalog(ver->get<std::string>(), std::move(rules));
}

}  // namespace

const Catalog& builtin_catalog() {
    static const Catalog catalog(kBuiltinCatalogVersion, builtin_rules());
    return catalog;
}

Result<Catalog> load_catalog(std::string_view text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        return make_error("parse-error", e.what(), e.byte);
    }
    try {
        return load_catalog_json(j);
    } catch (const nlohmann::json::exception& e) {
        return make_error("validation-error", e.what());
    }
}

std::string render_catalog(const Catalog& catalog) {
    ordered_json j;
    j["version"] = catalog.version();
    j["rules"] = ordered_json::array();
    for (const auto& r : catalog.rules()) {
        ordered_json jr;
        jr["id"] = r.rule_id;
        jr["platform"] = std::string(to_string(r.platform));
        jr["kind"] = std::string(to_string(r.kind));
        jr["category"] = std::string(to_string(r.category));
        jr["confidence"] = std::string(to_string(r.confidence));
        jr["citation"] = r.citation;
        jr["payload"] = r.payload;
        j["rules"].push_back(std::move(jr));
    }
    return j.dump(2) + "\n";
}

}  // namespace onetrace
