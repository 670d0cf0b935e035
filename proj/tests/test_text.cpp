#include <catch2/catch_amalgamated.hpp>

#include "songbias/text.hpp"

using namespace songbias;

TEST_CASE("whitespace token counting") {
    CHECK(text::count_whitespace_tokens("") == 0);
    CHECK(text::count_whitespace_tokens("one") == 1);
    CHECK(text::count_whitespace_tokens("a b  c\td\ne") == 5);
    CHECK(text::count_whitespace_tokens("  padded  ") == 1);
    // NBSP and em-space separate words too
    CHECK(text::count_whitespace_tokens("a b c") == 3);
    // punctuation does not split for the raw word count
    CHECK(text::count_whitespace_tokens("don't stop") == 2);
}

TEST_CASE("word tokenizer lowercases and splits on punctuation") {
    CHECK(text::word_tokens("Hello, World!") == std::vector<std::string>{"hello", "world"});
    CHECK(text::word_tokens("don't") == std::vector<std::string>{"don", "t"});
    CHECK(text::word_tokens("a-b_c") == std::vector<std::string>{"a", "b", "c"});
    CHECK(text::word_tokens("").empty());
    CHECK(text::word_tokens("...").empty());
    CHECK(text::word_tokens("ab12 CD") == std::vector<std::string>{"ab12", "cd"});
}

TEST_CASE("non-empty line extraction") {
    const auto lines = text::non_empty_lines("a\n\n  \nb\nc\n");
    REQUIRE(lines.size() == 3);
    CHECK(lines[0] == "a");
    CHECK(lines[1] == "b");
    CHECK(lines[2] == "c");
    CHECK(text::non_empty_lines("").empty());
    CHECK(text::non_empty_lines("\n\n").empty());
    CHECK(text::non_empty_lines("last").size() == 1);
}

TEST_CASE("utf8 decode round trip") {
    const std::string s = "aé中";
    std::size_t pos = 0;
    CHECK(text::decode_utf8(s, pos) == U'a');
    CHECK(text::decode_utf8(s, pos) == 0xE9);
    CHECK(text::decode_utf8(s, pos) == 0x4E2D);
    CHECK(pos == s.size());

    std::string out;
    text::append_utf8(out, U'a');
    text::append_utf8(out, 0xE9);
    text::append_utf8(out, 0x4E2D);
    CHECK(out == s);
}

TEST_CASE("diacritic folding") {
    CHECK(std::string(text::fold_diacritic(0xE9)) == "e");   // é
    CHECK(std::string(text::fold_diacritic(0xF1)) == "n");   // ñ
    CHECK(std::string(text::fold_diacritic(0xDF)) == "ss");  // ß
    CHECK(text::fold_diacritic(U'a') == nullptr);
    CHECK(text::fold_diacritic(0x4E2D) == nullptr);
}
