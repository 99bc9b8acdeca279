#include <doctest.h>

#include "core/cachepage.hpp"
#include "core/sha256.hpp"
#include "support/fig_fixtures.hpp"

using namespace onetrace;
using namespace onetrace::testsupport;

namespace {

EvidenceSource page_source(const char* name) {
    EvidenceSource s;
    s.kind = SourceKind::cache_file;
    s.locator = name;
    s.container_sha256 = Sha256::of(as_bytes(name));
    return s;
}

}  // namespace

TEST_CASE("dashboard welcome span yields the full name") {
    auto f = parse_dashboard_html(dashboard_page_fixture(), page_source("dashboard.htm"),
                                  builtin_catalog());
    REQUIRE(f.has_value());
    CHECK(f->category == Category::identity);
    CHECK(*f->attr("full-name") == "Test Project");
}

TEST_CASE("dashboard without a welcome span yields nothing") {
    CHECK_FALSE(parse_dashboard_html("<html><body>nothing here</body></html>",
                                     page_source("dashboard.htm"), builtin_catalog())
                    .has_value());
}

TEST_CASE("irregular whitespace in the welcome span is normalized") {
    // Oracle: collapse whitespace runs and trim.
    std::string page = "<span>Welcome   A  B </span>";
    auto f = parse_dashboard_html(page, page_source("dashboard.htm"), builtin_catalog());
    REQUIRE(f.has_value());
    CHECK(*f->attr("full-name") == "A B");

    // "Welcomed" must not match.
    CHECK_FALSE(parse_dashboard_html("<span>Welcomed guests</span>",
                                     page_source("dashboard.htm"), builtin_catalog())
                    .has_value());
}

TEST_CASE("opened page yields email, full name and identity URL") {
    auto findings = parse_opened_html(opened_page_fixture(false), page_source("opened.htm"),
                                      builtin_catalog());
    REQUIRE(findings.size() == 3);
    const Finding* email = nullptr;
    const Finding* name = nullptr;
    const Finding* identity = nullptr;
    for (const auto& f : findings) {
        if (f.attr("email")) email = &f;
        if (f.attr("full-name")) name = &f;
        if (f.attr("openid-url")) identity = &f;
    }
    REQUIRE(email != nullptr);
    CHECK(*email->attr("email") == "fixture.user@gmail.com");
    REQUIRE(name != nullptr);
    CHECK(*name->attr("full-name") == "Test Project");
    REQUIRE(identity != nullptr);
    CHECK(*identity->attr("openid-url") == "https://login.ubuntu.com/+id/mftrBm4w");
    CHECK(*identity->attr("openid-suffix") == "mftrBm4w");
}

TEST_CASE("email split across a wrapped line is still extracted") {
    auto findings = parse_opened_html(opened_page_fixture(true), page_source("opened.htm"),
                                      builtin_catalog());
    const Finding* email = nullptr;
    for (const auto& f : findings)
        if (f.attr("email")) email = &f;
    REQUIRE(email != nullptr);
    CHECK(*email->attr("email") == "fixture.user@gmail.com");
}

TEST_CASE("empty opened page yields nothing") {
    CHECK(parse_opened_html("", page_source("opened.htm"), builtin_catalog()).empty());
}

TEST_CASE("files page rows decode name, size, timestamp and id") {
    auto findings = parse_files_html(files_page_fixture(3), page_source("files.htm"),
                                     builtin_catalog());
    REQUIRE(findings.size() == 3);
    CHECK(*findings[0].attr("filename") == "AQUA-OS2.BMP");
    CHECK(*findings[0].attr("size") == "150.1 KB");
    CHECK(*findings[0].attr("timestamp") == "2014-04-22 03:15:30");
    CHECK(*findings[0].attr("url-id") == "YUS8op0ZQSOcavYpI-3sDQ");
    // Document order is preserved through the row offsets.
    CHECK(*findings[1].attr("filename") == "HANGING.DOC");
    CHECK(*findings[2].attr("filename") == "HANGING.txt");
    REQUIRE(findings[0].source.byte_range.has_value());
    REQUIRE(findings[1].source.byte_range.has_value());
    CHECK(findings[0].source.byte_range->start < findings[1].source.byte_range->start);
}

TEST_CASE("files page with no rows yields nothing") {
    CHECK(parse_files_html("<table class=\"files\"></table>", page_source("files.htm"),
                           builtin_catalog())
              .empty());
}

TEST_CASE("cache page kinds map from names") {
    CHECK(cache_page_for_filename("dashboard.htm") == CachePage::dashboard);
    CHECK(cache_page_for_filename("files.htm") == CachePage::files);
    CHECK(cache_page_for_filename("opened.htm") == CachePage::opened);
    CHECK(cache_page_for_filename("+opened.htm") == CachePage::opened);
    CHECK_FALSE(cache_page_for_filename("notes.txt").has_value());
}
