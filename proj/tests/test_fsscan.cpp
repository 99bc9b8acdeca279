#include <doctest.h>

#include <set>

#include "core/case_runner.hpp"
#include "core/fsscan.hpp"
#include "core/sha256.hpp"
#include "support/fig_fixtures.hpp"
#include "support/temp_dir.hpp"

using namespace onetrace;
using namespace onetrace::testsupport;

namespace {

// The seven catalogued Windows client directories.
void make_windows_dirs(const TempDir& tree) {
    tree.mkdirs("ProgramData/Microsoft/Windows/Start Menu/Programs/Ubuntu One");
    tree.mkdirs("Program Files (x86)/ubuntuone");
    tree.mkdirs("Users/Amid/AppData/Local/ubuntuone");
    tree.mkdirs("Users/Amid/AppData/Local/xdg/cache");
    tree.mkdirs("Users/Amid/AppData/Local/xdg/ubuntuone");
    tree.mkdirs("ProgramData/ubuntuone");
    tree.mkdirs("Users/Amid/Ubuntu One");
    tree.mkdirs("Windows/System32");
}

std::multiset<std::string> presence_rules(const std::vector<Finding>& findings) {
    std::multiset<std::string> out;
    for (const auto& f : findings)
        if (f.category == Category::presence_indicator) out.insert(f.rule_id);
    return out;
}

}  // namespace

TEST_CASE("windows tree with all seven catalogued dirs yields seven presence findings") {
    TempDir tree;
    make_windows_dirs(tree);

    auto root = make_scan_root(tree.path(), Platform::windows);
    REQUIRE(root.ok());
    CHECK(root->user_names == std::vector<std::string>{"Amid"});

    auto scan = scan_tree(*root, builtin_catalog());
    REQUIRE(scan.ok());
    auto rules = presence_rules(scan->findings);
    CHECK(rules.size() == 7);
    CHECK(rules.count("win.fs.startmenu") == 1);
    CHECK(rules.count("win.fs.programfiles") == 1);
    CHECK(rules.count("win.fs.appdata-ubuntuone") == 1);
    CHECK(rules.count("win.fs.xdg-cache") == 1);
    CHECK(rules.count("win.fs.xdg-ubuntuone") == 1);
    CHECK(rules.count("win.fs.programdata-ubuntuone") == 1);
    CHECK(rules.count("win.fs.default-folder") == 1);

    const Finding* default_dir = nullptr;
    for (const auto& f : scan->findings)
        if (f.rule_id == "win.fs.default-folder") default_dir = &f;
    REQUIRE(default_dir != nullptr);
    CHECK(*default_dir->attr("user") == "Amid");
    CHECK(*default_dir->attr("path") == "Users/Amid/Ubuntu One");
}

TEST_CASE("windows path matching is case-insensitive") {
    TempDir tree;
    tree.mkdirs("users/amid/ubuntu one");
    tree.mkdirs("Windows/System32");
    auto root = make_scan_root(tree.path(), Platform::windows);
    REQUIRE(root.ok());
    auto scan = scan_tree(*root, builtin_catalog());
    REQUIRE(scan.ok());
    CHECK(presence_rules(scan->findings).count("win.fs.default-folder") == 1);
}

TEST_CASE("macos paths match case-sensitively") {
    TempDir tree;
    tree.mkdirs("users/test/ubuntu one");  // wrong case: must not match
    tree.mkdirs("Users/Test/Ubuntu One");
    auto root = make_scan_root(tree.path(), Platform::macos);
    REQUIRE(root.ok());
    auto scan = scan_tree(*root, builtin_catalog());
    REQUIRE(scan.ok());
    CHECK(presence_rules(scan->findings).count("mac.fs.default-folder") == 1);
}

TEST_CASE("ios app container match carries the uuid") {
    TempDir tree;
    tree.mkdirs("private/var/mobile/Applications/EDF4B87E-CBC0-466C-2377A089DB10/Documents/"
                "Ubuntu One");
    auto root = make_scan_root(tree.path(), std::nullopt);
    REQUIRE(root.ok());
    CHECK(root->platform == Platform::ios);
    auto scan = scan_tree(*root, builtin_catalog());
    REQUIRE(scan.ok());
    const Finding* f = nullptr;
    for (const auto& it : scan->findings)
        if (it.rule_id == "ios.fs.app-documents") f = &it;
    REQUIRE(f != nullptr);
    CHECK(*f->attr("uuid") == "EDF4B87E-CBC0-466C-2377A089DB10");
}

TEST_CASE("empty tree: no findings, not-detected") {
    TempDir tree;
    tree.mkdirs("Windows/System32");
    auto root = make_scan_root(tree.path(), Platform::windows);
    REQUIRE(root.ok());
    auto scan = scan_tree(*root, builtin_catalog());
    REQUIRE(scan.ok());
    CHECK(presence_rules(scan->findings).empty());
    auto state = classify_install_state(Platform::windows, scan->observations);
    REQUIRE(state.ok());
    CHECK(state->state == InstallVerdict::not_detected);
}

TEST_CASE("artifact files are reported and routed to parsers") {
    TempDir tree;
    tree.mkdirs("Windows/System32");
    tree.write("Users/Amid/AppData/Local/xdg/cache/sso/sso-client.log",
               sso_log_fixture("fixture.user@gmail.com"));
    tree.write("Users/Amid/Documents/u1.db", std::string("placeholder"));
    tree.write("Users/Amid/Documents/iTunesMetadata.plist", std::string("placeholder"));
    tree.write("Users/Amid/Cache/dashboard.htm", dashboard_page_fixture());
    tree.write("Users/Amid/Cache/+opened.htm", std::string("placeholder"));
    tree.write("Users/Amid/Downloads/notes.txt", std::string("nothing to see"));
    tree.write("Program Files (x86)/ubuntuone/install.log", std::string("installed ok"));
    tree.write("Temp/install.log", std::string("unrelated install log"));

    auto root = make_scan_root(tree.path(), Platform::windows);
    REQUIRE(root.ok());
    auto scan = scan_tree(*root, builtin_catalog());
    REQUIRE(scan.ok());

    auto routed = route_artifacts(scan->findings);
    std::set<std::string> parsers;
    for (const auto& [locator, parser] : routed) parsers.insert(parser);
    CHECK(parsers == std::set<std::string>{"logparse.sso", "storeparse.u1db",
                                           "storeparse.plist", "webreg.dashboard",
                                           "webreg.opened"});

    // install.log outside an ubuntuone path is not an artifact.
    int install_logs = 0;
    for (const auto& f : scan->findings)
        if (f.rule_id == "art.log.install") ++install_logs;
    CHECK(install_logs == 1);

    // The artifact finding's digest matches the file content.
    for (const auto& f : scan->findings) {
        if (f.rule_id != "art.db.u1") continue;
        auto bytes = read_file_bytes(f.source.locator);
        CHECK(Sha256::of(ByteSpan{bytes.data(), bytes.size()}) == f.source.container_sha256);
    }
}

TEST_CASE("scan leaves the tree untouched") {
    TempDir tree;
    make_windows_dirs(tree);
    tree.write("Users/Amid/Ubuntu One/AQUA-OS2.BMP", std::string(4096, 'B'));
    tree.write("Users/Amid/AppData/Local/xdg/cache/sso/sso-client.log",
               sso_log_fixture("x@example.com"));

    auto digest_tree = [&]() {
        std::vector<std::string> entries;
        for (auto& p :
             std::filesystem::recursive_directory_iterator(tree.path())) {
            std::string line = p.path().string();
            if (p.is_regular_file()) {
                auto bytes = read_file_bytes(p.path());
                line += ":" + sha256_hex(ByteSpan{bytes.data(), bytes.size()});
            }
            entries.push_back(line);
        }
        std::sort(entries.begin(), entries.end());
        std::string joined;
        for (auto& e : entries) joined += e + "\n";
        return sha256_hex(as_bytes(joined));
    };

    std::string before = digest_tree();
    auto root = make_scan_root(tree.path(), Platform::windows);
    REQUIRE(root.ok());
    auto scan = scan_tree(*root, builtin_catalog());
    REQUIRE(scan.ok());
    CHECK(digest_tree() == before);
}

TEST_CASE("install-state decision table: windows, full enumeration") {
    using O = InstallObservation;
    for (int mask = 0; mask < 8; ++mask) {
        bool pf_other = mask & 1, pf_dist = mask & 2, residue = mask & 4;
        std::vector<PathObservation> obs;
        if (pf_other)
            obs.push_back({O::win_pf_other, "Program Files (x86)/ubuntuone/data"});
        if (pf_dist) obs.push_back({O::win_pf_dist, "Program Files (x86)/ubuntuone/dist"});
        if (residue) obs.push_back({O::win_residue, "Users/Amid/Ubuntu One"});
        auto state = classify_install_state(Platform::windows, obs);
        REQUIRE(state.ok());
        CAPTURE(mask);
        if (pf_other)
            CHECK(state->state == InstallVerdict::installed);
        else if (pf_dist && residue)
            CHECK(state->state == InstallVerdict::uninstalled_residue);
        else
            CHECK(state->state == InstallVerdict::not_detected);
    }
}

TEST_CASE("install-state decision table: macos, full enumeration") {
    using O = InstallObservation;
    for (int mask = 0; mask < 8; ++mask) {
        bool bundle = mask & 1, trash = mask & 2, library = mask & 4;
        std::vector<PathObservation> obs;
        if (bundle) obs.push_back({O::mac_app_bundle, "Applications/Ubuntu One.app"});
        if (trash) obs.push_back({O::mac_app_in_trash, "Users/Test/.Trash/Ubuntu One.app"});
        if (library) obs.push_back({O::mac_library_dirs, "Users/Test/Library/Caches/ubuntuone"});
        auto state = classify_install_state(Platform::macos, obs);
        REQUIRE(state.ok());
        CAPTURE(mask);
        if (bundle)
            CHECK(state->state == InstallVerdict::installed);
        else if (library)
            CHECK(state->state == InstallVerdict::uninstalled_residue);
        else
            CHECK(state->state == InstallVerdict::not_detected);
    }
}

TEST_CASE("install-state is undefined for ios") {
    auto state = classify_install_state(Platform::ios, {});
    REQUIRE_FALSE(state.ok());
    CHECK(state.error().code == "unsupported-platform");
}

TEST_CASE("dist-only residue tree classifies as uninstalled-residue end to end") {
    TempDir tree;
    tree.mkdirs("Windows/System32");
    tree.mkdirs("Program Files (x86)/ubuntuone/dist");
    tree.mkdirs("Users/Amid/AppData/Local/xdg/ubuntuone");
    tree.mkdirs("Users/Amid/Ubuntu One");
    auto root = make_scan_root(tree.path(), Platform::windows);
    REQUIRE(root.ok());
    auto scan = scan_tree(*root, builtin_catalog());
    REQUIRE(scan.ok());
    auto state = classify_install_state(Platform::windows, scan->observations);
    REQUIRE(state.ok());
    CHECK(state->state == InstallVerdict::uninstalled_residue);
    REQUIRE_FALSE(state->evidence.empty());
}

TEST_CASE("macos trashed bundle with library residue classifies as residue") {
    TempDir tree;
    tree.mkdirs("Applications");
    tree.mkdirs("Library");
    tree.mkdirs("Users/Test/.Trash/Ubuntu One.app");
    tree.mkdirs("Users/Test/Library/Caches/ubuntuone");
    tree.mkdirs("Users/Test/Library/Caches/sso");
    auto root = make_scan_root(tree.path(), std::nullopt);
    REQUIRE(root.ok());
    CHECK(root->platform == Platform::macos);
    auto scan = scan_tree(*root, builtin_catalog());
    REQUIRE(scan.ok());
    auto state = classify_install_state(Platform::macos, scan->observations);
    REQUIRE(state.ok());
    CHECK(state->state == InstallVerdict::uninstalled_residue);
}

TEST_CASE("auto-detection identifies the platforms") {
    TempDir win;
    win.mkdirs("Windows/System32");
    CHECK(make_scan_root(win.path(), std::nullopt)->platform == Platform::windows);

    TempDir mac;
    mac.mkdirs("Library");
    mac.mkdirs("Applications");
    CHECK(make_scan_root(mac.path(), std::nullopt)->platform == Platform::macos);

    TempDir unknown;
    unknown.mkdirs("opt");
    CHECK_FALSE(make_scan_root(unknown.path(), std::nullopt).ok());

    CHECK_FALSE(make_scan_root("/nonexistent-path-for-test", Platform::windows).ok());
}
