#include <doctest.h>

#include <map>

#include "core/sha256.hpp"
#include "core/sqlite_reader.hpp"
#include "core/u1db.hpp"
#include "support/temp_dir.hpp"

using namespace onetrace;
using namespace onetrace::testsupport;

namespace {

std::vector<uint8_t> fixture(const char* name) {
    return read_file_bytes(std::string(ONETRACE_FIXTURE_DIR) + "/" + name);
}

EvidenceSource db_source(const std::vector<uint8_t>& bytes) {
    EvidenceSource s;
    s.kind = SourceKind::database;
    s.locator = "u1.db";
    s.container_sha256 = Sha256::of(ByteSpan{bytes.data(), bytes.size()});
    return s;
}

// Cell-by-cell comparison against the dump produced by an independent
// SQLite implementation.
void check_against_dump(const SqliteReader& reader, const std::string& dump_text) {
    std::map<std::string, std::vector<std::vector<std::pair<std::string, std::string>>>> want;
    for (auto line : split_lines(dump_text)) {
        if (line.empty()) continue;
        std::vector<std::string_view> parts;
        size_t pos = 0;
        while (pos <= line.size()) {
            size_t tab = line.find('\t', pos);
            parts.push_back(line.substr(pos, tab == std::string_view::npos ? line.size() - pos
                                                                           : tab - pos));
            if (tab == std::string_view::npos) break;
            pos = tab + 1;
        }
        REQUIRE(parts.size() >= 2);
        std::vector<std::pair<std::string, std::string>> row;
        for (size_t i = 1; i < parts.size(); ++i) {
            size_t eq = parts[i].find('=');
            REQUIRE(eq != std::string_view::npos);
            row.emplace_back(std::string(parts[i].substr(0, eq)),
                             std::string(parts[i].substr(eq + 1)));
        }
        want[std::string(parts[0])].push_back(std::move(row));
    }

    for (const auto& [table_name, rows] : want) {
        auto table = reader.read_table(table_name);
        REQUIRE_MESSAGE(table.ok(), table_name);
        REQUIRE(table->rows.size() == rows.size());
        REQUIRE(table->columns.size() == rows.front().size());
        for (size_t r = 0; r < rows.size(); ++r) {
            for (size_t c = 0; c < rows[r].size(); ++c) {
                CAPTURE(table_name);
                CAPTURE(r);
                CHECK(table->columns[c] == rows[r][c].first);
                CHECK(table->rows[r].values[c].display() == rows[r][c].second);
            }
        }
    }
}

}  // namespace

TEST_CASE("u1.db extraction matches the reference dump and the documented rows") {
    auto bytes = fixture("u1.db");
    REQUIRE_FALSE(bytes.empty());

    auto reader = SqliteReader::open(ByteSpan{bytes.data(), bytes.size()});
    REQUIRE(reader.ok());
    check_against_dump(*reader, read_file_text(std::string(ONETRACE_FIXTURE_DIR) +
                                               "/u1.db.dump.tsv"));

    auto parsed = parse_u1_db(ByteSpan{bytes.data(), bytes.size()}, db_source(bytes),
                              builtin_catalog());
    REQUIRE(parsed.ok());

    REQUIRE(parsed->tokens.size() == 1);
    CHECK(parsed->tokens[0].consumer_key == "mHrBm4w");
    CHECK(parsed->tokens[0].consumer_secret == "wYFYcQSIIdFyMSNGfEeQmUSEWUEP");
    CHECK(parsed->tokens[0].token == "kdEYALSLiecsKwMulBrYJcpNIDswSfzZHYvPQvNvFfPdnDRkf");
    CHECK(parsed->tokens[0].token_secret.rfind("ERYAtMidazPTMHylkFYnbooQJmsrAsmlTmPeQhBknkQRlaL",
                                               0) == 0);

    REQUIRE(parsed->nodes.size() == 4);
    CHECK(parsed->nodes[0].node_type == 1);
    CHECK(parsed->nodes[0].size == -1);
    CHECK(parsed->nodes[0].path == "/~/Ubuntu One");

    std::map<std::string, const NodeRecord*> by_name;
    for (const auto& n : parsed->nodes) by_name[n.name] = &n;
    REQUIRE(by_name.count("AQUA-OS2.BMP"));
    CHECK(by_name["AQUA-OS2.BMP"]->size == 153674);
    CHECK(by_name["AQUA-OS2.BMP"]->hash.rfind("sha1:93e06221", 0) == 0);
    CHECK(by_name["AQUA-OS2.BMP"]->node_type == 2);
    REQUIRE(by_name.count("HANGING.DOC"));
    CHECK(by_name["HANGING.DOC"]->size == 22016);
    REQUIRE(by_name.count("HANGING.txt"));
    CHECK(by_name["HANGING.txt"]->size == 2019);

    CHECK(parsed->version == "0.5");
    CHECK_FALSE(parsed->wal_mode);

    // One oauth-token finding with high confidence, nodes as file activity.
    size_t oauth = 0, activity = 0, config = 0;
    for (const auto& f : parsed->findings) {
        if (f.category == Category::oauth_token) {
            ++oauth;
            CHECK(f.confidence == Confidence::high);
            CHECK(*f.attr("consumer-key") == "mHrBm4w");
        }
        if (f.category == Category::file_activity) ++activity;
        if (f.category == Category::config) ++config;
    }
    CHECK(oauth == 1);
    CHECK(activity == 4);
    CHECK(config == 1);  // app version
}

TEST_CASE("overflow pages and varied serial types decode exactly") {
    auto bytes = fixture("overflow.db");
    REQUIRE_FALSE(bytes.empty());
    auto reader = SqliteReader::open(ByteSpan{bytes.data(), bytes.size()});
    REQUIRE(reader.ok());
    check_against_dump(*reader, read_file_text(std::string(ONETRACE_FIXTURE_DIR) +
                                               "/overflow.db.dump.tsv"));
}

TEST_CASE("wal-mode database is reported as a config finding") {
    auto bytes = fixture("wal.db");
    REQUIRE_FALSE(bytes.empty());
    auto parsed = parse_u1_db(ByteSpan{bytes.data(), bytes.size()}, db_source(bytes),
                              builtin_catalog());
    REQUIRE(parsed.ok());
    CHECK(parsed->wal_mode);
    bool reported = false;
    for (const auto& f : parsed->findings)
        if (f.rule_id == "db.sqlite.journal" && f.attr("value") != nullptr &&
            *f.attr("value") == "wal")
            reported = true;
    CHECK(reported);
}

TEST_CASE("non-sqlite input is rejected by magic") {
    std::vector<uint8_t> junk(4096, 0x41);
    auto r = SqliteReader::open(ByteSpan{junk.data(), junk.size()});
    REQUIRE_FALSE(r.ok());
    CHECK(r.error().code == "not-sqlite");
}

TEST_CASE("truncated database reports a corrupt page with an offset") {
    auto bytes = fixture("overflow.db");
    REQUIRE(bytes.size() > 600);
    bytes.resize(600);  // header survives, page 1 cells point past the end
    auto reader = SqliteReader::open(ByteSpan{bytes.data(), bytes.size()});
    if (reader.ok()) {
        auto table = reader->read_table("overflow_table");
        REQUIRE_FALSE(table.ok());
        CHECK(table.error().code == "corrupt-page");
    } else {
        CHECK(reader.error().code == "corrupt-page");
    }
}

TEST_CASE("missing tables are tolerated as partial results") {
    auto bytes = fixture("wal.db");  // has version_table only
    auto parsed = parse_u1_db(ByteSpan{bytes.data(), bytes.size()}, db_source(bytes),
                              builtin_catalog());
    REQUIRE(parsed.ok());
    CHECK(parsed->tokens.empty());
    CHECK(parsed->nodes.empty());
    CHECK(parsed->version == "0.5");
}
