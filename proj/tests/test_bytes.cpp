#include <doctest.h>

#include "core/bytes.hpp"

using namespace onetrace;

TEST_CASE("hex round trip") {
    std::vector<uint8_t> data = {0x00, 0x7f, 0x80, 0xff, 0x12};
    auto hex = to_hex(ByteSpan{data.data(), data.size()});
    CHECK(hex == "007f80ff12");
    auto back = from_hex(hex);
    REQUIRE(back.has_value());
    CHECK(*back == data);
    CHECK_FALSE(from_hex("abc").has_value());
    CHECK_FALSE(from_hex("zz").has_value());
}

TEST_CASE("case-insensitive helpers") {
    CHECK(iequals("Ubuntu One", "ubuntu ONE"));
    CHECK_FALSE(iequals("ubuntu", "ubuntu1"));
    CHECK(icontains("C:\\Program Files (x86)\\ubuntuone", "UBUNTUONE"));
    CHECK_FALSE(icontains("short", "longer-needle"));
}

TEST_CASE("whitespace normalization") {
    CHECK(normalize_ws("  A  B ") == "A B");
    CHECK(normalize_ws("\r\n x\t\ty \n") == "x y");
    CHECK(normalize_ws("") == "");
}

TEST_CASE("percent decoding") {
    CHECK(percent_decode("fixture.user%40gmail.com") == "fixture.user@gmail.com");
    CHECK(percent_decode("100%") == "100%");
    CHECK(percent_decode("%4") == "%4");
}

TEST_CASE("line splitting strips carriage returns") {
    auto lines = split_lines("a\r\nb\nc");
    REQUIRE(lines.size() == 3);
    CHECK(lines[0] == "a");
    CHECK(lines[1] == "b");
    CHECK(lines[2] == "c");
    CHECK(split_lines("").empty());
}

TEST_CASE("little and big endian readers") {
    const uint8_t data[] = {0x01, 0x02, 0x03, 0x04, 0x05, 0x06, 0x07, 0x08};
    CHECK(read_le16(data) == 0x0201);
    CHECK(read_be16(data) == 0x0102);
    CHECK(read_le32(data) == 0x04030201u);
    CHECK(read_be32(data) == 0x01020304u);
    CHECK(read_le64(data) == 0x0807060504030201ull);
    CHECK(read_be64(data) == 0x0102030405060708ull);
}
