#include <doctest.h>

#include "core/plist.hpp"
#include "core/sha256.hpp"
#include "support/temp_dir.hpp"
#include <json.hpp>

using namespace onetrace;
using namespace onetrace::testsupport;

namespace {

std::vector<uint8_t> fixture(const char* name) {
    return read_file_bytes(std::string(ONETRACE_FIXTURE_DIR) + "/" + name);
}

EvidenceSource plist_source(const std::vector<uint8_t>& bytes) {
    EvidenceSource s;
    s.kind = SourceKind::file;
    s.locator = "iTunesMetadata.plist";
    s.container_sha256 = Sha256::of(ByteSpan{bytes.data(), bytes.size()});
    return s;
}

nlohmann::json expected_values() {
    auto text = read_file_text(std::string(ONETRACE_FIXTURE_DIR) + "/itunes_expected.json");
    return nlohmann::json::parse(text);
}

}  // namespace

TEST_CASE("xml purchase metadata yields identity and config findings") {
    auto bytes = fixture("itunes_metadata.plist");
    REQUIRE_FALSE(bytes.empty());
    auto expected = expected_values();

    auto findings = parse_itunes_metadata(ByteSpan{bytes.data(), bytes.size()},
                                          plist_source(bytes), builtin_catalog());
    REQUIRE(findings.ok());
    REQUIRE(findings->size() == 2);

    const Finding* identity = nullptr;
    const Finding* config = nullptr;
    for (const auto& f : *findings) {
        if (f.category == Category::identity) identity = &f;
        if (f.category == Category::config) config = &f;
    }
    REQUIRE(identity != nullptr);
    REQUIRE(config != nullptr);
    CHECK(*identity->attr("apple-id") == expected["appleId"].get<std::string>());
    CHECK(*config->attr("key") == "purchase-date");
    CHECK(*config->attr("value") == expected["purchaseDate"].get<std::string>());
}

TEST_CASE("binary plist with nested keys yields the same findings") {
    auto bytes = fixture("itunes_metadata_binary.plist");
    REQUIRE_FALSE(bytes.empty());
    auto expected = expected_values();

    auto findings = parse_itunes_metadata(ByteSpan{bytes.data(), bytes.size()},
                                          plist_source(bytes), builtin_catalog());
    REQUIRE(findings.ok());
    REQUIRE(findings->size() == 2);
    bool apple_id = false, purchase = false;
    for (const auto& f : *findings) {
        if (f.attr("apple-id") != nullptr)
            apple_id = *f.attr("apple-id") == expected["appleId"].get<std::string>();
        if (f.attr("value") != nullptr)
            purchase = *f.attr("value") == expected["purchaseDate"].get<std::string>();
    }
    CHECK(apple_id);
    CHECK(purchase);
}

TEST_CASE("plist lacking the documented keys yields nothing") {
    std::string xml =
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        "<plist version=\"1.0\"><dict><key>itemName</key><string>U1Files</string></dict>"
        "</plist>\n";
    auto bytes = std::vector<uint8_t>(xml.begin(), xml.end());
    auto findings = parse_itunes_metadata(ByteSpan{bytes.data(), bytes.size()},
                                          plist_source(bytes), builtin_catalog());
    REQUIRE(findings.ok());
    CHECK(findings->empty());
}

TEST_CASE("truncated binary plist is a malformed-plist error") {
    auto bytes = fixture("itunes_truncated.plist");
    REQUIRE_FALSE(bytes.empty());
    auto findings = parse_itunes_metadata(ByteSpan{bytes.data(), bytes.size()},
                                          plist_source(bytes), builtin_catalog());
    REQUIRE_FALSE(findings.ok());
    CHECK(findings.error().code == "malformed-plist");
}

TEST_CASE("xml plist value coverage") {
    std::string xml =
        "<?xml version=\"1.0\"?><plist version=\"1.0\"><dict>"
        "<key>s</key><string>a &amp; b &lt;c&gt;</string>"
        "<key>i</key><integer>-42</integer>"
        "<key>r</key><real>1.5</real>"
        "<key>t</key><true/>"
        "<key>f</key><false/>"
        "<key>d</key><date>2014-05-10T03:18:33Z</date>"
        "<key>blob</key><data>aGVsbG8=</data>"
        "<key>arr</key><array><integer>1</integer><integer>2</integer></array>"
        "<key>nested</key><dict><key>inner</key><string>x</string></dict>"
        "</dict></plist>";
    auto parsed = parse_plist(as_bytes(xml));
    REQUIRE(parsed.ok());
    REQUIRE(parsed->type == PlistValue::Type::dict);
    CHECK(parsed->dict_get("s")->str == "a & b <c>");
    CHECK(parsed->dict_get("i")->int_v == -42);
    CHECK(parsed->dict_get("r")->real_v == doctest::Approx(1.5));
    CHECK(parsed->dict_get("t")->bool_v);
    CHECK_FALSE(parsed->dict_get("f")->bool_v);
    CHECK(parsed->dict_get("d")->str == "2014-05-10T03:18:33Z");
    CHECK(parsed->dict_get("blob")->data_v ==
          std::vector<uint8_t>{'h', 'e', 'l', 'l', 'o'});
    CHECK(parsed->dict_get("arr")->array_v.size() == 2);
    CHECK(parsed->find_key("inner")->str == "x");

    CHECK_FALSE(parse_plist(as_bytes("not a plist")).ok());
    CHECK_FALSE(parse_plist(as_bytes("<plist><dict><key>x</key></dict></plist>")).ok());
}
