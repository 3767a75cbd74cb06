// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 Agora Contributors

#include <catch2/catch_amalgamated.hpp>

#include "agora/digest.hpp"

// Reference values from the published FNV-1a 64-bit test vectors.
TEST_CASE("fnv-1a 64 known vectors", "[digest]") {
    CHECK(agora::digest_hex("") == "cbf29ce484222325");
    CHECK(agora::digest_hex("a") == "af63dc4c8601ec8c");
    CHECK(agora::digest_hex("foobar") == "85944171f73967e8");
}

TEST_CASE("streaming digest equals one-shot digest", "[digest]") {
    agora::Digest d;
    d.update("foo");
    d.update("bar");
    CHECK(d.hex() == agora::digest_hex("foobar"));
}

TEST_CASE("digest is sensitive to every byte", "[digest]") {
    CHECK(agora::digest_hex("abc") != agora::digest_hex("abd"));
    CHECK(agora::digest_hex("abc") != agora::digest_hex("ab"));
    CHECK(agora::digest_hex(std::string("a\0b", 3)) != agora::digest_hex("ab"));
}
