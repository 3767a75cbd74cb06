// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 Agora Contributors

#include <catch2/catch_amalgamated.hpp>

#include <sstream>
#include <string>
#include <vector>

#include "agora/csv.hpp"

namespace {

std::vector<std::vector<std::string>> read_all(const std::string& text, char delimiter = ',') {
    std::istringstream in(text);
    agora::CsvReader reader(in, delimiter);
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    while (reader.next(row)) rows.push_back(row);
    return rows;
}

} // namespace

TEST_CASE("csv: plain rows", "[csv]") {
    const auto rows = read_all("a,b,c\nd,e,f\n");
    REQUIRE(rows.size() == 2);
    CHECK(rows[0] == std::vector<std::string>{"a", "b", "c"});
    CHECK(rows[1] == std::vector<std::string>{"d", "e", "f"});
}

TEST_CASE("csv: last row without trailing newline", "[csv]") {
    const auto rows = read_all("a,b\nc,d");
    REQUIRE(rows.size() == 2);
    CHECK(rows[1] == std::vector<std::string>{"c", "d"});
}

TEST_CASE("csv: empty fields are preserved", "[csv]") {
    const auto rows = read_all(",x,\n,,\n");
    REQUIRE(rows.size() == 2);
    CHECK(rows[0] == std::vector<std::string>{"", "x", ""});
    CHECK(rows[1] == std::vector<std::string>{"", "", ""});
}

TEST_CASE("csv: quoted fields with delimiters and newlines", "[csv]") {
    const auto rows = read_all("\"a,b\",\"line1\nline2\",plain\n");
    REQUIRE(rows.size() == 1);
    REQUIRE(rows[0].size() == 3);
    CHECK(rows[0][0] == "a,b");
    CHECK(rows[0][1] == "line1\nline2");
    CHECK(rows[0][2] == "plain");
}

TEST_CASE("csv: doubled quotes escape a quote", "[csv]") {
    const auto rows = read_all("\"she said \"\"hi\"\"\",x\n");
    REQUIRE(rows.size() == 1);
    CHECK(rows[0][0] == "she said \"hi\"");
    CHECK(rows[0][1] == "x");
}

TEST_CASE("csv: crlf row endings", "[csv]") {
    const auto rows = read_all("a,b\r\nc,d\r\n");
    REQUIRE(rows.size() == 2);
    CHECK(rows[0] == std::vector<std::string>{"a", "b"});
    CHECK(rows[1] == std::vector<std::string>{"c", "d"});
}

TEST_CASE("csv: carriage return inside a quoted field survives", "[csv]") {
    const auto rows = read_all("\"a\r\nb\",x\n");
    REQUIRE(rows.size() == 1);
    CHECK(rows[0][0] == "a\r\nb");
}

TEST_CASE("csv: custom delimiter", "[csv]") {
    const auto rows = read_all("a;b;\"c;d\"\n", ';');
    REQUIRE(rows.size() == 1);
    CHECK(rows[0] == std::vector<std::string>{"a", "b", "c;d"});
}

TEST_CASE("csv: empty input yields no rows", "[csv]") {
    CHECK(read_all("").empty());
}

TEST_CASE("csv: escape only when needed", "[csv]") {
    CHECK(agora::csv_escape("plain") == "plain");
    CHECK(agora::csv_escape("a,b") == "\"a,b\"");
    CHECK(agora::csv_escape("say \"hi\"") == "\"say \"\"hi\"\"\"");
    CHECK(agora::csv_escape("two\nlines") == "\"two\nlines\"");
    CHECK(agora::csv_escape("a;b", ';') == "\"a;b\"");
    CHECK(agora::csv_escape("a,b", ';') == "a,b");
}

TEST_CASE("csv: writer and reader round-trip tricky fields", "[csv]") {
    const std::vector<std::string> original{"plain", "with,comma", "with \"quotes\"",
                                            "multi\nline", "", "trailing space "};
    std::ostringstream out;
    agora::write_csv_row(out, original);
    const auto rows = read_all(out.str());
    REQUIRE(rows.size() == 1);
    CHECK(rows[0] == original);
}
