#include <random>
#include <sstream>

#include <catch2/catch_amalgamated.hpp>

#include "songbias/matching.hpp"

using namespace songbias;

namespace {

SongRecord song(const std::string& id, const std::string& artist, const std::string& title,
                int year) {
    SongRecord r;
    r.song_id = id;
    r.artist_id = "id-" + artist;
    r.artist_name = artist;
    r.title = title;
    r.year = year;
    return r;
}

ChartEntry entry(const std::string& artist, const std::string& title,
                 ChartSource src = ChartSource::billboard_hot100) {
    ChartEntry e;
    e.source = src;
    e.artist_name = artist;
    e.title = title;
    return e;
}

}  // namespace

TEST_CASE("normalize_name rule list") {
    CHECK(normalize_name("The Beatles") == "beatles");
    CHECK(normalize_name("beatles") == "beatles");  // idempotence
    CHECK(normalize_name("Beyoncé (feat. Jay-Z)") == "beyonce");
    CHECK(normalize_name("  AC/DC  ") == "acdc");
    CHECK(normalize_name("The The") == "the");
    CHECK(normalize_name("The The Band") == "band");
    CHECK(normalize_name("Sinéad O'Connor") == "sinead oconnor");
    CHECK(normalize_name("Hey Jude [Remastered]") == "hey jude");
    CHECK(normalize_name("") == "");
}

TEST_CASE("normalize_name is idempotent on random-ish inputs") {
    const std::vector<std::string> inputs = {
        "The  Rolling  Stones", "(feat. X) Y", "Zoë", "the the the", "A(B)C",
        "  spaced   out  ", "Motörhead", "N.W.A", "The (Parenthetical) Rest"};
    for (const auto& s : inputs) {
        const auto once = normalize_name(s);
        CHECK(normalize_name(once) == once);
    }
}

TEST_CASE("levenshtein and similarity") {
    CHECK(levenshtein("kitten", "sitting") == 3);
    CHECK(levenshtein("", "abc") == 3);
    CHECK(levenshtein("abc", "abc") == 0);
    // worked example: d("hey judee","hey jude") = 1, max len 9
    CHECK(levenshtein("hey judee", "hey jude") == 1);
    CHECK(name_similarity("hey judee", "hey jude") == Catch::Approx(1.0 - 1.0 / 9.0));
    CHECK(name_similarity("", "") == 1.0);
}

TEST_CASE("exact match after normalization scores 1") {
    Corpus corpus = {song("s1", "Beatles", "hey jude", 1968)};
    const auto res = match_records({entry("The Beatles", "Hey Jude")}, corpus);
    REQUIRE(res.size() == 1);
    CHECK(res[0].method == MatchMethod::exact);
    CHECK(res[0].score == 1.0);
    CHECK(res[0].matched_song_id == "s1");
}

TEST_CASE("absent artist is unmatched") {
    Corpus corpus = {song("s1", "Beatles", "Hey Jude", 1968)};
    const auto res = match_records({entry("Totally Unknown Artist", "Hey Jude")}, corpus);
    REQUIRE(res.size() == 1);
    CHECK(res[0].method == MatchMethod::unmatched);
    CHECK(!res[0].matched_song_id.has_value());
}

TEST_CASE("fuzzy title match uses edit-distance similarity") {
    Corpus corpus = {song("s1", "Beatles", "Hey Jude", 1968)};
    const auto res = match_records({entry("Beatles", "Hey Judee")}, corpus);
    REQUIRE(res.size() == 1);
    CHECK(res[0].method == MatchMethod::fuzzy);
    CHECK(res[0].matched_song_id == "s1");
    CHECK(res[0].score == Catch::Approx(1.0 - 1.0 / 9.0));
}

TEST_CASE("title below threshold is unmatched") {
    Corpus corpus = {song("s1", "Beatles", "Hey Jude", 1968)};
    const auto res = match_records({entry("Beatles", "Something Else Entirely")}, corpus);
    CHECK(res[0].method == MatchMethod::unmatched);
}

TEST_CASE("ties break toward earliest year then song_id") {
    Corpus corpus = {song("s2", "Beatles", "Hey Jude", 1970), song("s1", "Beatles", "Hey Jude", 1968),
                     song("s0", "Beatles", "Hey Jude", 1968)};
    const auto res = match_records({entry("Beatles", "Hey Jude")}, corpus);
    CHECK(res[0].matched_song_id == "s0");
}

TEST_CASE("each entry maps to at most one song; songs can repeat") {
    Corpus corpus = {song("s1", "Beatles", "Hey Jude", 1968)};
    const auto res =
        match_records({entry("Beatles", "Hey Jude"), entry("The Beatles", "hey jude")}, corpus);
    REQUIRE(res.size() == 2);
    CHECK(res[0].matched_song_id == "s1");
    CHECK(res[1].matched_song_id == "s1");
}

TEST_CASE("raising thresholds never increases the matched count") {
    std::mt19937 rng(5);
    Corpus corpus;
    const std::vector<std::string> artists = {"alpha band", "beta crew", "gamma trio", "delta duo"};
    const std::vector<std::string> titles = {"first song", "second song", "third tune",
                                             "fourth tune"};
    int id = 0;
    for (const auto& a : artists)
        for (const auto& t : titles) {
            corpus.push_back(song("s" + std::to_string(id), a, t, 1970 + id));
            ++id;
        }

    auto mutate = [&](std::string s) {
        if (!s.empty() && rng() % 2) s[rng() % s.size()] = 'x';
        return s;
    };
    std::vector<ChartEntry> entries;
    for (int i = 0; i < 60; ++i) {
        const auto& a = artists[rng() % artists.size()];
        const auto& t = titles[rng() % titles.size()];
        entries.push_back(entry(mutate(a), mutate(t)));
    }

    std::size_t prev = entries.size() + 1;
    for (double thr : {0.70, 0.80, 0.90, 0.95, 1.0}) {
        MatchConfig cfg;
        cfg.artist_threshold = thr;
        cfg.title_threshold = thr;
        std::size_t matched = 0;
        for (const auto& r : match_records(entries, corpus, cfg))
            if (r.method != MatchMethod::unmatched) ++matched;
        CHECK(matched <= prev);
        prev = matched;
    }
}

TEST_CASE("thresholds at 1.0 reproduce the exact normalized join") {
    Corpus corpus = {song("s1", "Beatles", "Hey Jude", 1968),
                     song("s2", "The Kinks", "Lola", 1970)};
    MatchConfig strict;
    strict.artist_threshold = 1.0;
    strict.title_threshold = 1.0;
    const std::vector<ChartEntry> entries = {
        entry("the beatles", "HEY JUDE"),  // normalized-equal: matches
        entry("Beatles", "Hey Judee"),     // off by one: must not match
        entry("Kinksy", "Lola"),           // fuzzy artist: must not match
    };
    const auto res = match_records(entries, corpus, strict);
    CHECK(res[0].method == MatchMethod::exact);
    CHECK(res[1].method == MatchMethod::unmatched);
    CHECK(res[2].method == MatchMethod::unmatched);
}

TEST_CASE("chart entry loader") {
    std::istringstream in(
        "source\tartist\ttitle\tdate\tpayload\n"
        "billboard_hot100\tBeatles\tHey Jude\t1968-09-14\t\n"
        "gold_labels\tSomeone\tSomething\t\t1\n");
    const auto entries = load_chart_entries(in, "test");
    REQUIRE(entries.size() == 2);
    CHECK(entries[0].source == ChartSource::billboard_hot100);
    CHECK(entries[0].week_or_year == "1968-09-14");
    CHECK(entries[1].source == ChartSource::gold_labels);
    CHECK(entries[1].payload == "1");

    std::istringstream bad("header\nbillboard_hot100\tonlyartist\n");
    CHECK_THROWS_AS(load_chart_entries(bad, "bad"), DataError);
}
