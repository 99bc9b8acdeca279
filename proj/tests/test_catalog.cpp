#include <doctest.h>

#include <set>

#include "core/catalog.hpp"

using namespace onetrace;

TEST_CASE("builtin catalog carries the expected knowledge") {
    const Catalog& c = builtin_catalog();
    CHECK_FALSE(c.version().empty());

    // Windows folder list entry.
    const CatalogRule* xdg = c.find("win.fs.xdg-ubuntuone");
    REQUIRE(xdg != nullptr);
    CHECK(xdg->kind == RuleKind::fs_path);
    CHECK(xdg->payload.value("path", "") == R"(C:\Users\{user}\AppData\Local\xdg\ubuntuone)");

    // IP range for the login hosts.
    const CatalogRule* login_range = c.find("net.ip.login-one");
    REQUIRE(login_range != nullptr);
    CHECK(login_range->payload.value("low", "") == "91.189.89.206");
    CHECK(login_range->payload.value("high", "") == "91.189.89.207");
    CHECK(login_range->payload.value("label", "") == "login.one.ubuntu.com");

    // Unique rule ids.
    std::set<std::string> ids;
    for (const auto& r : c.rules()) CHECK(ids.insert(r.rule_id).second);

    // The other pinned knowledge units.
    CHECK(c.find("win.reg.hklm-ubuntuone") != nullptr);
    CHECK(c.find("win.reg.hkcu-ubuntuone") != nullptr);
    CHECK(c.find("win.reg.run-syncdaemon") != nullptr);
    CHECK(c.find("win.reg.uninstall") != nullptr);
    CHECK(c.find("ios.fs.app-documents") != nullptr);
    CHECK(c.find("web.url.one") != nullptr);
    CHECK(c.find("web.url.media") != nullptr);
    CHECK(c.find("web.url.login") != nullptr);
    CHECK(c.find("web.url.files") != nullptr);
    // Both spellings of the media hostname stay catalogued.
    CHECK(c.find("net.host.media-one") != nullptr);
    CHECK(c.find("net.host.media-plain") != nullptr);
    // Both names of the login continuation page stay catalogued.
    CHECK(c.find("art.cache.opened") != nullptr);
    CHECK(c.find("art.cache.opened-plus") != nullptr);
}

TEST_CASE("rules_for filters by platform and kind") {
    const Catalog& c = builtin_catalog();

    auto procs = c.rules_for(Platform::windows, RuleKind::process_name);
    CHECK(procs.size() == 3);
    std::set<std::string> names;
    for (const auto* r : procs) names.insert(r->payload.value("name", ""));
    CHECK(names == std::set<std::string>{"ubuntu-sso-login.exe", "ubuntuone-control-panel-qt.exe",
                                         "ubuntuonesyncdaemon.exe"});

    CHECK(c.rules_for(Platform::ios, RuleKind::registry_key).empty());

    auto mac_paths = c.rules_for(Platform::macos, RuleKind::fs_path);
    bool found_sso_cache = false;
    for (const auto* r : mac_paths)
        if (r->payload.value("path", "") == "/Users/{user}/Library/Caches/sso")
            found_sso_cache = true;
    CHECK(found_sso_cache);
}

TEST_CASE("catalog renders and loads back equal") {
    const Catalog& c = builtin_catalog();
    std::string rendered = render_catalog(c);
    auto loaded = load_catalog(rendered);
    REQUIRE(loaded.ok());
    CHECK(loaded->version() == c.version());
    CHECK(loaded->rules().size() == c.rules().size());
    CHECK(render_catalog(*loaded) == rendered);
}

TEST_CASE("catalog validation failures") {
    auto dup = load_catalog(R"({"version":"v","rules":[
        {"id":"a","platform":"any","kind":"hostname","category":"network-indicator",
         "confidence":"high","payload":{"host":"x.example"}},
        {"id":"a","platform":"any","kind":"hostname","category":"network-indicator",
         "confidence":"high","payload":{"host":"y.example"}}]})");
    REQUIRE_FALSE(dup.ok());
    CHECK(dup.error().code == "validation-error");

    auto bad_range = load_catalog(R"({"version":"v","rules":[
        {"id":"r","platform":"any","kind":"ip-range","category":"network-indicator",
         "confidence":"high","payload":{"low":"10.0.0.9","high":"10.0.0.1"}}]})");
    REQUIRE_FALSE(bad_range.ok());
    CHECK(bad_range.error().code == "validation-error");

    auto bad_placeholder = load_catalog(R"({"version":"v","rules":[
        {"id":"p","platform":"windows","kind":"fs-path","category":"presence-indicator",
         "confidence":"high","payload":{"path":"C:\\Users\\{house}\\x"}}]})");
    REQUIRE_FALSE(bad_placeholder.ok());

    auto traversal = load_catalog(R"({"version":"v","rules":[
        {"id":"p","platform":"windows","kind":"fs-path","category":"presence-indicator",
         "confidence":"high","payload":{"path":"C:\\Users\\..\\x"}}]})");
    REQUIRE_FALSE(traversal.ok());

    auto not_json = load_catalog("{bad");
    REQUIRE_FALSE(not_json.ok());
    CHECK(not_json.error().code == "parse-error");
    CHECK(not_json.error().offset.has_value());
}

TEST_CASE("ipv4 parsing and hostname matching") {
    CHECK(parse_ipv4("91.189.89.77").value() == 0x5BBD594Du);
    CHECK(format_ipv4(0x5BBD594Du) == "91.189.89.77");
    CHECK_FALSE(parse_ipv4("91.189.89").has_value());
    CHECK_FALSE(parse_ipv4("91.189.89.256").has_value());
    CHECK_FALSE(parse_ipv4("a.b.c.d").has_value());

    CHECK(hostname_matches("media.one.ubuntu.com", "MEDIA.One.Ubuntu.Com"));
    CHECK_FALSE(hostname_matches("one.ubuntu.com", "media.one.ubuntu.com"));
    CHECK_FALSE(hostname_matches("media.one.ubuntu.com", "one.ubuntu.com"));
}
