#include <doctest.h>

#include "core/case_runner.hpp"
#include "core/catalog.hpp"
#include "core/report.hpp"
#include "support/fig_fixtures.hpp"
#include "support/pcap_builder.hpp"
#include "support/temp_dir.hpp"

using namespace onetrace;
using namespace onetrace::testsupport;

namespace {

std::filesystem::path write_memory_fixture(const TempDir& dir) {
    std::vector<uint8_t> image(2 << 20, 0);
    Plant plant = plant_for("mem.web.credentials", Encoding::ascii);
    std::copy(plant.bytes.begin(), plant.bytes.end(), image.begin() + 12345);
    return dir.write("mem.raw", ByteSpan{image.data(), image.size()});
}

}  // namespace

TEST_CASE("memory input produces a credential finding and exit 0") {
    TempDir dir;
    auto img = write_memory_fixture(dir);

    CaseConfig config;
    config.case_id = "case-001";
    config.generated_at = "2014-04-22T03:48:04Z";
    config.chunk_size = 1 << 20;
    config.inputs.push_back({img.string(), "memory-image", std::nullopt, ""});

    auto outcome = run_case(config, builtin_catalog());
    REQUIRE(outcome.ok());
    CHECK(outcome->exit_code == 0);
    bool credential = false;
    for (const auto& f : outcome->report.findings)
        if (f.category == Category::credential && *f.attr("email") == "fixture.user@gmail.com")
            credential = true;
    CHECK(credential);
    REQUIRE(outcome->report.inputs.size() == 1);
    CHECK(outcome->report.inputs[0].kind == SourceKind::memory_image);
}

TEST_CASE("empty directory tree runs clean with exit 1") {
    TempDir dir;
    dir.mkdirs("tree/Windows/System32");

    CaseConfig config;
    config.case_id = "case-002";
    config.inputs.push_back({(dir.path() / "tree").string(), "fs-tree", Platform::windows, ""});
    auto outcome = run_case(config, builtin_catalog());
    REQUIRE(outcome.ok());
    CHECK(outcome->exit_code == 1);
    CHECK(outcome->report.findings.empty());
}

TEST_CASE("missing input aborts with input-error") {
    CaseConfig config;
    config.inputs.push_back({"/nonexistent/file.raw", "memory-image", std::nullopt, ""});
    auto outcome = run_case(config, builtin_catalog());
    REQUIRE_FALSE(outcome.ok());
    CHECK(outcome.error().code == "input-error");
}

TEST_CASE("config validation failures") {
    CaseConfig none;
    auto r = run_case(none, builtin_catalog());
    REQUIRE_FALSE(r.ok());
    CHECK(r.error().code == "invalid-config");

    TempDir dir;
    auto img = write_memory_fixture(dir);
    CaseConfig bad_jobs;
    bad_jobs.inputs.push_back({img.string(), "memory-image", std::nullopt, ""});
    bad_jobs.jobs = 0;
    CHECK_FALSE(run_case(bad_jobs, builtin_catalog()).ok());

    CaseConfig bad_time;
    bad_time.inputs.push_back({img.string(), "memory-image", std::nullopt, ""});
    bad_time.generated_at = "yesterday";
    CHECK_FALSE(run_case(bad_time, builtin_catalog()).ok());
}

TEST_CASE("corrupt single input degrades to a config finding, not an abort") {
    TempDir dir;
    auto img = write_memory_fixture(dir);
    auto bad_db = dir.write("u1.db", std::string("this is not a database"));

    CaseConfig config;
    config.case_id = "case-003";
    config.chunk_size = 1 << 20;
    config.inputs.push_back({img.string(), "memory-image", std::nullopt, ""});
    config.inputs.push_back({bad_db.string(), "database", std::nullopt, ""});

    auto outcome = run_case(config, builtin_catalog());
    REQUIRE(outcome.ok());
    CHECK(outcome->exit_code == 0);
    bool warned = false;
    for (const auto& f : outcome->report.findings)
        if (f.category == Category::config && f.attr("error") != nullptr &&
            *f.attr("error") == "not-sqlite")
            warned = true;
    CHECK(warned);
    CHECK(outcome->report.inputs.size() == 2);
}

TEST_CASE("manifest parsing resolves relative paths and validates kinds") {
    TempDir dir;
    dir.write("evidence/mem.raw", std::string(1024, '\0'));
    std::string manifest = R"({
      "case_id": "case-manifest",
      "inputs": [
        {"path": "evidence/mem.raw", "kind": "memory-image"},
        {"path": "evidence/sso-client.log", "kind": "log", "parser": "sso"}
      ]
    })";
    auto config = parse_manifest(manifest, dir.path().string());
    REQUIRE(config.ok());
    CHECK(config->case_id == "case-manifest");
    REQUIRE(config->inputs.size() == 2);
    CHECK(config->inputs[0].path == (dir.path() / "evidence/mem.raw").string());
    CHECK(config->inputs[1].parser_hint == "sso");

    CHECK_FALSE(parse_manifest(R"({"inputs": []})", "").ok());
    CHECK_FALSE(parse_manifest(R"({"inputs": [{"path": "x", "kind": "floppy"}]})", "").ok());
    CHECK_FALSE(parse_manifest("not json", "").ok());
}

TEST_CASE("full case is byte-identical across runs and worker counts") {
    TempDir dir;
    auto img = write_memory_fixture(dir);
    dir.mkdirs("tree/Windows/System32");
    dir.mkdirs("tree/Program Files (x86)/ubuntuone/dist");
    dir.mkdirs("tree/Users/Amid/Ubuntu One");
    dir.write("tree/Users/Amid/AppData/Local/xdg/cache/sso/sso-client.log",
              sso_log_fixture("fixture.user@gmail.com"));
    auto reg = dir.write("export.reg", reg_export_fixture());
    auto dash = dir.write("dashboard.htm", dashboard_page_fixture());

    PcapBuilder pcap;
    uint32_t ts = 1000;
    add_tls_session(pcap, ts, ip(10, 0, 0, 2), ip(91, 189, 89, 77), 50000, "one.ubuntu.com");
    auto pcap_path = dir.write("capture.pcap",
                               ByteSpan{pcap.bytes().data(), pcap.bytes().size()});

    CaseConfig config;
    config.case_id = "case-deterministic";
    config.generated_at = "2014-04-22T03:48:04Z";
    config.chunk_size = 1 << 20;
    config.inputs.push_back({img.string(), "memory-image", std::nullopt, ""});
    config.inputs.push_back({(dir.path() / "tree").string(), "fs-tree", Platform::windows, ""});
    config.inputs.push_back({reg.string(), "registry-export", std::nullopt, ""});
    config.inputs.push_back({dash.string(), "cache-file", std::nullopt, "dashboard"});
    config.inputs.push_back({pcap_path.string(), "pcap", std::nullopt, ""});

    std::string first;
    for (int jobs : {1, 8}) {
        config.jobs = jobs;
        for (int repeat = 0; repeat < 2; ++repeat) {
            auto outcome = run_case(config, builtin_catalog());
            REQUIRE(outcome.ok());
            CHECK(outcome->exit_code == 0);
            std::string rendered = render_report(outcome->report, RenderFormat::json);
            if (first.empty())
                first = rendered;
            else
                CHECK(rendered == first);
        }
    }
    // The fs-tree produced an uninstalled-residue verdict inside the report.
    CHECK(first.find("uninstalled-residue") != std::string::npos);
    // Round-trip of the full report.
    auto parsed = parse_report_json(first);
    REQUIRE(parsed.ok());
    CHECK(render_report(*parsed, RenderFormat::json) == first);
    // Every finding cites a rule in the active catalog.
    for (const auto& f : parsed->findings)
        CHECK(builtin_catalog().find(f.rule_id) != nullptr);
}

TEST_CASE("no payload bytes beyond handshake metadata reach the report") {
    TempDir dir;
    const std::string marker = "UNIQUE-PAYLOAD-MARKER-0451";
    std::string http = "POST /upload HTTP/1.1\r\nHost: one.ubuntu.com\r\n\r\n" + marker;
    PcapBuilder pcap;
    uint32_t client = ip(10, 0, 0, 2), server = ip(91, 189, 89, 77);
    pcap.add_record(1, 0, eth_ipv4_tcp(client, server, 50050, 443, 1, 0x02, {}));
    pcap.add_record(1, 1,
                    eth_ipv4_tcp(client, server, 50050, 443, 2, 0x18,
                                 std::vector<uint8_t>(http.begin(), http.end())));
    uint32_t ts = 2;
    add_tls_session(pcap, ts, client, server, 50051, "one.ubuntu.com");
    auto cap = dir.write("capture.pcap", ByteSpan{pcap.bytes().data(), pcap.bytes().size()});

    CaseConfig config;
    config.case_id = "case-privacy";
    config.generated_at = "2014-04-22T03:48:04Z";
    config.inputs.push_back({cap.string(), "pcap", std::nullopt, ""});
    auto outcome = run_case(config, builtin_catalog());
    REQUIRE(outcome.ok());
    std::string rendered = render_report(outcome->report, RenderFormat::json);
    CHECK(rendered.find(marker) == std::string::npos);
    rendered = render_report(outcome->report, RenderFormat::text);
    CHECK(rendered.find(marker) == std::string::npos);
}

TEST_CASE("routed artifacts from a tree are parsed into content findings") {
    TempDir dir;
    dir.mkdirs("tree/Windows/System32");
    dir.write("tree/Users/Amid/AppData/Local/xdg/cache/sso/sso-client.log",
              sso_log_fixture("fixture.user@gmail.com"));

    CaseConfig config;
    config.case_id = "case-artifacts";
    config.inputs.push_back({(dir.path() / "tree").string(), "fs-tree", Platform::windows, ""});
    auto outcome = run_case(config, builtin_catalog());
    REQUIRE(outcome.ok());
    bool artifact_presence = false, identity = false;
    for (const auto& f : outcome->report.findings) {
        if (f.rule_id == "art.log.sso") artifact_presence = true;
        if (f.rule_id == "log.sso.signin" && *f.attr("email") == "fixture.user@gmail.com")
            identity = true;
    }
    CHECK(artifact_presence);
    CHECK(identity);
}
