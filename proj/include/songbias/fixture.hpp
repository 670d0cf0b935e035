#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "songbias/errors.hpp"
#include "songbias/records.hpp"

namespace songbias {

// Synthetic corpus with planted ground truth: word-set pairs with a known
// association sign, lexicon-detectable sexist passages with gold labels,
// injected duplicates/covers, chart entries with controlled fuzz, and a few
// records every filter rule should reject.
struct FixtureConfig {
    int n_male_solo = 10;
    int n_female_solo = 8;
    int n_group = 5;
    int songs_per_artist = 14;  // above the default >10 threshold
    int year_min = 1960;
    int year_max = 2009;
    unsigned seed = 1;
    double planted_strength = 0.45;  // fraction of lines carrying association blocks
    bool reverse_planting = false;   // swap the attribute blocks: flips the sign
    double sexist_fraction = 0.30;
    double chart_fraction = 0.30;
    double top10_fraction = 0.30;  // of charted songs
    double fuzz_fraction = 0.20;   // chart entries with a perturbed title
    int n_exact_duplicates = 5;
    int n_near_duplicates = 5;
    int min_lines = 8;
    int max_lines = 18;
    bool with_rejects = true;  // sprinkle records that the ingest filter rejects
};

namespace fixture_detail {

inline const std::vector<std::string>& filler_words() {
    static const std::vector<std::string> words = {
        "love",  "night", "heart",  "baby",   "time",   "road",   "fire",  "rain",
        "dream", "dance", "light",  "shadow", "river",  "sound",  "story", "silver",
        "gold",  "blue",  "wild",   "home",   "stone",  "wind",   "smoke", "train",
        "moon",  "sun",   "ground", "city",   "summer", "winter", "young", "free",
        "slow",  "fast",  "high",   "low",    "sweet",  "cold",   "warm",  "still"};
    return words;
}

inline const std::vector<std::string>& genre_pool() {
    static const std::vector<std::string> genres = {"gangsta rap", "indie rock", "synth pop",
                                                    "soul",        "hard rock",  "pop rap"};
    return genres;
}

struct WordSets {
    std::vector<std::string> x = {"xalpha", "xbeta", "xgamma", "xdelta"};
    std::vector<std::string> y = {"yalpha", "ybeta", "ygamma", "ydelta"};
    std::vector<std::string> a = {"aalpha", "abeta", "agamma", "adelta"};
    std::vector<std::string> b = {"balpha", "bbeta", "bgamma", "bdelta"};
};

inline const std::vector<std::pair<std::string, double>>& sexist_terms() {
    static const std::vector<std::pair<std::string, double>> terms = {
        {"grimword", 3.6}, {"slurword", 4.0}, {"scornword", 3.4}, {"jeerword", 3.8}};
    return terms;
}

}  // namespace fixture_detail

struct FixtureResult {
    std::filesystem::path dir;
    int n_songs = 0;
    int n_gold = 0;
    int n_chart_entries = 0;
};

inline FixtureResult write_fixture(const std::filesystem::path& dir, const FixtureConfig& cfg) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    fs::create_directories(dir / "wordsets");

    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    const auto& fillers = fixture_detail::filler_words();
    fixture_detail::WordSets sets;
    auto pick = [&](const std::vector<std::string>& v) { return v[rng() % v.size()]; };

    // planted association line: two target words and two attribute words in
    // interchangeable slots, so the pair lands in matching contexts
    auto planted_line = [&](bool xa) {
        const auto& tgt = xa ? sets.x : sets.y;
        const auto& att = (xa != cfg.reverse_planting) ? sets.a : sets.b;
        switch (rng() % 3) {
            case 0: return pick(tgt) + " " + pick(att) + " " + pick(tgt) + " " + pick(att);
            case 1: return pick(fillers) + " " + pick(tgt) + " " + pick(att) + " " + pick(fillers);
            default: return pick(att) + " " + pick(tgt) + " " + pick(att) + " " + pick(fillers);
        }
    };
    auto filler_line = [&] {
        std::string line = pick(fillers);
        const int n = 3 + static_cast<int>(rng() % 5);
        for (int i = 0; i < n; ++i) line += " " + pick(fillers);
        return line;
    };

    struct PlannedSong {
        SongRecord rec;
        bool gold_sexist = false;
    };
    std::vector<PlannedSong> songs;

    auto make_lyrics = [&](bool sexist) {
        const int n_lines = cfg.min_lines + static_cast<int>(rng() % (cfg.max_lines - cfg.min_lines + 1));
        std::vector<std::string> lines;
        for (int i = 0; i < n_lines; ++i) {
            if (u01(rng) < cfg.planted_strength)
                lines.push_back(planted_line(rng() % 2 == 0));
            else
                lines.push_back(filler_line());
        }
        if (sexist) {
            // one to three lines carrying a lexicon term
            const int hits = 1 + static_cast<int>(rng() % 3);
            for (int h = 0; h < hits; ++h) {
                const auto& term = fixture_detail::sexist_terms()[rng() % 4].first;
                lines[rng() % lines.size()] = pick(fillers) + " " + term + " " + pick(fillers);
            }
        }
        std::string out;
        for (const auto& l : lines) {
            out += l;
            out.push_back('\n');
        }
        return out;
    };

    int artist_no = 0, song_no = 0;
    auto add_artist = [&](ArtistType type, Gender gender, int n_songs) {
        const std::string artist_id = "art" + std::to_string(1000 + artist_no);
        const std::string artist_name =
            (type == ArtistType::solo ? "Artist " : "Band ") + std::to_string(1000 + artist_no);
        ++artist_no;
        const std::string genre = fixture_detail::genre_pool()[rng() % 6];
        for (int i = 0; i < n_songs; ++i) {
            PlannedSong s;
            s.gold_sexist = u01(rng) < cfg.sexist_fraction;
            s.rec.song_id = "song" + std::to_string(10000 + song_no++);
            s.rec.title = "Tune " + std::to_string(song_no);
            s.rec.artist_id = artist_id;
            s.rec.artist_name = artist_name;
            s.rec.artist_type = type;
            s.rec.gender = gender;
            s.rec.year = cfg.year_min + static_cast<int>(rng() % (cfg.year_max - cfg.year_min + 1));
            if (rng() % 10 != 0) s.rec.genre_raw = genre;  // some songs lack a genre
            s.rec.language = "english";
            s.rec.lyrics = make_lyrics(s.gold_sexist);
            songs.push_back(std::move(s));
        }
    };

    for (int i = 0; i < cfg.n_male_solo; ++i) add_artist(ArtistType::solo, Gender::male, cfg.songs_per_artist);
    for (int i = 0; i < cfg.n_female_solo; ++i)
        add_artist(ArtistType::solo, Gender::female, cfg.songs_per_artist);
    for (int i = 0; i < cfg.n_group; ++i) {
        const Gender g = i % 3 == 0 ? Gender::mixed : (i % 3 == 1 ? Gender::male : Gender::female);
        add_artist(ArtistType::group, g, cfg.songs_per_artist);
    }

    // exact duplicates: same artist, later year; the dedup stage must drop them
    const std::size_t n_base = songs.size();
    for (int i = 0; i < cfg.n_exact_duplicates; ++i) {
        const auto& src = songs[rng() % n_base];
        if (src.gold_sexist) continue;  // keep gold references out of dropped songs
        PlannedSong dup = src;
        dup.rec.song_id = "song" + std::to_string(10000 + song_no++);
        dup.rec.title = src.rec.title + " (album version)";
        dup.rec.year = std::min(cfg.year_max, src.rec.year + 1 + static_cast<int>(rng() % 5));
        songs.push_back(std::move(dup));
    }
    // near duplicates performed by another established artist: covers, retained
    // (a brand-new one-song artist would fall to the >min-songs filter)
    for (int i = 0; i < cfg.n_near_duplicates; ++i) {
        const auto& src = songs[rng() % n_base];
        if (src.gold_sexist) continue;
        std::size_t other = rng() % n_base;
        while (songs[other].rec.artist_id == src.rec.artist_id) other = rng() % n_base;
        PlannedSong cover = src;
        cover.rec.song_id = "song" + std::to_string(10000 + song_no++);
        cover.rec.artist_id = songs[other].rec.artist_id;
        cover.rec.artist_name = songs[other].rec.artist_name;
        cover.rec.artist_type = songs[other].rec.artist_type;
        cover.rec.gender = songs[other].rec.gender;
        cover.rec.year = std::min(cfg.year_max, src.rec.year + 2 + static_cast<int>(rng() % 6));
        // perturb well under 20% of tokens
        auto toks = [&] {
            std::vector<std::string> t;
            std::string cur;
            for (char c : cover.rec.lyrics) {
                if (c == ' ' || c == '\n') {
                    if (!cur.empty()) t.push_back(cur);
                    if (c == '\n') t.push_back("\n");
                    cur.clear();
                } else
                    cur.push_back(c);
            }
            if (!cur.empty()) t.push_back(cur);
            return t;
        }();
        // each changed token destroys up to 3 shingles; keep the rate around
        // 1/40 so the pair stays above jaccard 0.80 and clusters
        const int n_swaps = std::max<int>(1, static_cast<int>(toks.size()) / 40);
        for (int sw = 0; sw < n_swaps; ++sw) {
            std::size_t at = rng() % toks.size();
            if (toks[at] != "\n") toks[at] = "altered" + std::to_string(sw);
        }
        std::string rebuilt;
        for (const auto& t : toks) {
            if (t == "\n") {
                if (!rebuilt.empty() && rebuilt.back() == ' ') rebuilt.pop_back();
                rebuilt.push_back('\n');
            } else {
                rebuilt += t;
                rebuilt.push_back(' ');
            }
        }
        if (!rebuilt.empty() && rebuilt.back() == ' ') rebuilt.back() = '\n';
        cover.rec.lyrics = rebuilt;
        songs.push_back(std::move(cover));
    }

    FixtureResult result;
    result.dir = dir;

    // corpus.jsonl, with deliberate rejects mixed in
    {
        std::ofstream out(dir / "corpus.jsonl");
        if (!out) throw DataError("cannot write fixture corpus");
        for (const auto& s : songs) out << song_record_to_json(s.rec).dump() << "\n";
        result.n_songs = static_cast<int>(songs.size());
        if (cfg.with_rejects) {
            SongRecord r = songs[0].rec;
            r.song_id = "reject-year";
            r.year = cfg.year_min - 5;
            out << song_record_to_json(r).dump() << "\n";
            r = songs[1].rec;
            r.song_id = "reject-lang";
            r.language = "italian";
            out << song_record_to_json(r).dump() << "\n";
            r = songs[2].rec;
            r.song_id = "reject-short";
            r.lyrics = "just five words right here";
            out << song_record_to_json(r).dump() << "\n";
            r = songs[3].rec;
            r.song_id = "reject-gender";
            r.gender = Gender::unknown;
            r.artist_type = ArtistType::solo;
            out << song_record_to_json(r).dump() << "\n";
            // an artist with too few songs
            for (int i = 0; i < 3; ++i) {
                r = songs[4 + i].rec;
                r.song_id = "reject-fewsongs-" + std::to_string(i);
                r.artist_id = "art-tiny";
                r.artist_name = "Tiny Catalog";
                out << song_record_to_json(r).dump() << "\n";
            }
            out << "{this is not valid json\n";
        }
    }

    // gold labels and charts reference songs by artist/title
    {
        std::ofstream gold(dir / "gold.tsv");
        gold << "source\tartist\ttitle\tdate\tpayload\n";
        int n_gold = 0;
        for (const auto& s : songs) {
            if (s.rec.artist_type != ArtistType::solo) continue;
            if (u01(rng) < 0.35 || s.gold_sexist) {
                gold << "gold_labels\t" << s.rec.artist_name << '\t' << s.rec.title << "\t\t"
                     << (s.gold_sexist ? 1 : 0) << "\n";
                ++n_gold;
            }
        }
        result.n_gold = n_gold;
    }
    {
        std::ofstream charts(dir / "charts.tsv");
        charts << "source\tartist\ttitle\tdate\tpayload\n";
        int n_entries = 0;
        for (std::size_t i = 0; i < n_base; ++i) {
            const auto& s = songs[i];
            if (u01(rng) >= cfg.chart_fraction) continue;
            std::string title = s.rec.title;
            if (u01(rng) < cfg.fuzz_fraction && title.size() > 4)
                title[title.size() - 2] = 'x';  // one-character typo: fuzzy match
            const int weeks = 1 + static_cast<int>(rng() % 3);
            for (int w = 0; w < weeks; ++w) {
                charts << "billboard_hot100\t" << s.rec.artist_name << '\t' << title << '\t'
                       << s.rec.year << "-W" << (w + 1) << "\t\n";
                ++n_entries;
            }
            if (u01(rng) < cfg.top10_fraction) {
                charts << "billboard_top10\t" << s.rec.artist_name << '\t' << title << '\t'
                       << s.rec.year << "-W1\t\n";
                ++n_entries;
            }
        }
        // entries that match nothing
        for (int i = 0; i < 5; ++i) {
            charts << "billboard_hot100\tGhost Act " << i << "\tNo Such Tune\t1999-W1\t\n";
            ++n_entries;
        }
        result.n_chart_entries = n_entries;
    }

    {
        std::ofstream gm(dir / "genre_map.tsv");
        gm << "gangsta rap\tHip hop\npop rap\tHip hop\nindie rock\tRock\nhard rock\tRock\n"
              "synth pop\tPop\nsoul\tR&B and soul\nRock\tRock\nPop\tPop\n";
    }
    {
        std::ofstream lex(dir / "lexicon.tsv");
        lex << "__bias__\t-2.0\n";
        for (const auto& [term, w] : fixture_detail::sexist_terms())
            lex << term << '\t' << w << "\n";
    }
    auto write_set = [&](const std::string& name, const std::vector<std::string>& words) {
        std::ofstream out(dir / "wordsets" / (name + ".txt"));
        for (const auto& w : words) out << w << "\n";
    };
    write_set("setx", sets.x);
    write_set("sety", sets.y);
    write_set("seta", sets.a);
    write_set("setb", sets.b);
    {
        std::ofstream battery(dir / "battery.tsv");
        battery << "A\tB\tX\tY\nseta\tsetb\tsetx\tsety\n";
    }

    nlohmann::json conf;
    conf["paths"] = {{"corpus", "corpus.jsonl"},
                     {"genre_map", "genre_map.tsv"},
                     {"charts", {"charts.tsv"}},
                     {"gold", {"gold.tsv"}},
                     {"wordsets_dir", "wordsets"},
                     {"battery", "battery.tsv"},
                     {"lexicon", "lexicon.tsv"},
                     {"out_dir", "out"}};
    conf["filter"] = {{"year_min", cfg.year_min}, {"year_max", cfg.year_max}};
    conf["dedup"] = {{"threshold", 0.80}};
    conf["train"] = {{"window", 3},  {"dim", 32},           {"epochs", 6},
                     {"min_count", 5}, {"negatives", 5},    {"learning_rate", 0.025},
                     {"subsample_threshold", 0.0}};
    conf["seeds"] = {0, 1, 2, 3, 4};
    conf["label"] = {{"threshold", 0.725}, {"n_b", 1}};
    conf["scorer"] = "lexicon";
    conf["assoc"] = {{"n_permutations", 1000}, {"min_word_frequency", 5}};
    conf["sweep_thresholds"] = {0.5, 0.725, 0.9};
    conf["analytics"] = {{"median_window", 5}, {"n_boot", 200}, {"ci_level", 95.0}, {"svg", true}};
    conf["rng_seed"] = 42;
    conf["threads"] = 1;
    std::ofstream cj(dir / "config.json");
    cj << conf.dump(2) << "\n";

    return result;
}

}  // namespace songbias
