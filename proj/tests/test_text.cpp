#include "concap/text.hpp"

#include <catch_amalgamated.hpp>

using namespace concap;

TEST_CASE("normalize_text lowercases, collapses and trims") {
    CHECK(normalize_text("  A  Dog\tRuns\n ") == "a dog runs");
    CHECK(normalize_text("") == "");
    CHECK(normalize_text(" \t\n") == "");
}

TEST_CASE("word_tokens splits on non-word characters") {
    auto w = word_tokens("The dog's ball, in FRONT-of 6 cats!");
    CHECK(w == std::vector<std::string>{"the", "dog's", "ball", "in", "front", "of", "6", "cats"});
}

TEST_CASE("sha256 matches known vectors") {
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("hash64 takes the leading digest bytes big-endian") {
    // sha256("abc") starts ba7816bf8f01cfea
    CHECK(hash64("abc") == 0xba7816bf8f01cfeaULL);
    CHECK(hex64(0xba7816bf8f01cfeaULL) == "ba7816bf8f01cfea");
}

TEST_CASE("join_key separates parts unambiguously") {
    CHECK(join_key(std::string("ab"), std::string("c")) != join_key(std::string("a"), std::string("bc")));
    CHECK(join_key(std::string("a"), std::string("b")) == std::string("a\x1f" "b"));
}

TEST_CASE("scale_draw stays in range and covers the ends") {
    CHECK(scale_draw(0, 5) == 0);
    CHECK(scale_draw(~0ULL, 5) == 4);
    CHECK(scale_draw(1ULL << 63, 2) == 1);
    CHECK(unit_from_u64(0) == 0.0);
    CHECK(unit_from_u64(~0ULL) < 1.0);
}
