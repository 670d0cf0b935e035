#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <catch2/catch_amalgamated.hpp>

#include "songbias/fixture.hpp"
#include "songbias/pipeline.hpp"

using namespace songbias;
namespace fs = std::filesystem;

namespace {

fs::path test_root() {
    const auto p = fs::temp_directory_path() / "songbias_test_pipeline";
    return p;
}

int run_cli(const std::string& args, const fs::path& stderr_to = {}) {
    std::string cmd = std::string(SONGBIAS_CLI_PATH) + " " + args + " >/dev/null";
    if (!stderr_to.empty()) cmd += " 2>" + stderr_to.string();
    else cmd += " 2>/dev/null";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("fixture writes every companion file") {
    const auto dir = test_root() / "fixture_files";
    fs::remove_all(dir);
    FixtureConfig fx;
    fx.seed = 3;
    const auto res = write_fixture(dir, fx);
    CHECK(res.n_songs > 0);
    CHECK(res.n_gold > 0);
    CHECK(res.n_chart_entries > 0);
    for (const char* name : {"corpus.jsonl", "genre_map.tsv", "charts.tsv", "gold.tsv",
                             "lexicon.tsv", "battery.tsv", "config.json"})
        CHECK(fs::exists(dir / name));
    for (const char* name : {"setx", "sety", "seta", "setb"})
        CHECK(fs::exists(dir / "wordsets" / (std::string(name) + ".txt")));

    SECTION("fixture generation is deterministic") {
        const auto dir2 = test_root() / "fixture_files2";
        fs::remove_all(dir2);
        write_fixture(dir2, fx);
        CHECK(slurp(dir / "corpus.jsonl") == slurp(dir2 / "corpus.jsonl"));
        CHECK(slurp(dir / "charts.tsv") == slurp(dir2 / "charts.tsv"));
    }
}

TEST_CASE("full pipeline over a fixture") {
    const auto dir = test_root() / "run";
    fs::remove_all(dir);
    FixtureConfig fx;
    fx.seed = 11;
    fx.n_male_solo = 6;
    fx.n_female_solo = 5;
    fx.n_group = 3;
    fx.songs_per_artist = 12;
    write_fixture(dir, fx);

    auto cfg = load_project_config(dir / "config.json");
    const auto paths = artifacts(cfg);

    const auto ingest = run_ingest(cfg);
    CHECK(ingest.accepted > 100);
    CHECK(ingest.rejected >= 7);  // the planted reject-me records
    CHECK(fs::exists(paths.accepted()));
    const std::string rejections = slurp(paths.rejections());
    for (const char* reason : {"year_range", "language", "min_words", "gender_unknown",
                               "artist_min_songs", "parse_error"})
        CHECK(rejections.find(reason) != std::string::npos);

    const auto dedup = run_dedup(cfg);
    CHECK(dedup.retained + dedup.dropped == ingest.accepted);
    CHECK(dedup.dropped >= 1);   // injected same-artist duplicates
    CHECK(dedup.covers >= 1);    // injected different-artist covers
    CHECK(dedup.clusters >= 1);

    const auto match = run_match(cfg);
    CHECK(match.entries > 0);
    CHECK(match.matched > 0);
    CHECK(match.matched < match.entries);  // ghost entries stay unmatched

    const auto train = run_train_embed(cfg);
    CHECK(train.spaces_trained == 15);  // 3 partitions x 5 seeds
    for (const char* part : {"all_solo", "male_solo", "female_solo"}) {
        CHECK(fs::exists(paths.embeddings_dir() / (std::string(part) + ".freq.tsv")));
        for (int seed = 0; seed < 5; ++seed)
            CHECK(fs::exists(paths.embeddings_dir() /
                             (std::string(part) + ".seed" + std::to_string(seed) + ".vec")));
    }

    const auto assoc = run_assoc(cfg);
    CHECK(assoc.battery_rows == 1);
    // per row: 3 corpora x 5 seeds x 3 tests + 2 target sets x 5 sweat seeds
    CHECK(assoc.results == 3 * 5 * 3 + 2 * 5);
    {
        // the planted direction: positive weat effect on every corpus and seed
        std::ifstream in(paths.assoc_results());
        std::string line;
        int weat_rows = 0;
        while (std::getline(in, line)) {
            const auto j = nlohmann::json::parse(line);
            if (j["test"] != "weat") continue;
            ++weat_rows;
            CHECK(j["effect_or_score"].get<double>() > 0.5);
            CHECK(j["exact_enumeration"].get<bool>());  // C(8,4)/2 = 35 <= 1000
        }
        CHECK(weat_rows == 15);
    }
    CHECK(slurp(paths.assoc_table()).find("SC-WEAT X") != std::string::npos);

    const auto score = run_score(cfg);
    CHECK(score.songs == dedup.retained);
    CHECK(score.batches > score.songs);

    const auto label = run_label(cfg);
    CHECK(label.songs == dedup.retained);
    CHECK(label.sexist > 0);
    CHECK(label.sexist < label.songs);

    const auto eval = run_evaluate(cfg);
    CHECK(eval.gold_songs > 20);
    // the lexicon scorer recovers the planted terms exactly
    CHECK(eval.macro_f1 == 1.0);
    const auto report_json = nlohmann::json::parse(slurp(paths.eval_report()));
    CHECK(report_json["sexist"]["precision"].get<double>() == 1.0);
    CHECK(report_json["auc"].get<double>() == 1.0);
    CHECK(fs::exists(paths.roc_csv()));

    const auto sweep = run_sweep(cfg);
    CHECK(sweep.best_macro_f1_threshold > 0.0);
    CHECK(fs::exists(paths.sweep_table()));

    const auto analyze = run_analyze(cfg);
    CHECK(analyze.series_rows > 0);
    for (const char* name :
         {"counts_by_group.csv", "sexist_fraction_by_group.csv", "sexist_fraction_by_genre.csv",
          "series_sexist.csv", "series_group_share.csv", "series_genre_share.csv",
          "series_sexist_by_genre.csv", "sexist_fraction_all.svg"})
        CHECK(fs::exists(paths.analytics_dir() / name));

    const auto summary = run_report(cfg);
    CHECK(summary.find("association tests") != std::string::npos);
    CHECK(fs::exists(paths.report_dir() / "summary.txt"));

    SECTION("stages are idempotent: rerunning reproduces identical artifacts") {
        const std::string before = slurp(paths.assoc_results());
        run_assoc(cfg);
        CHECK(slurp(paths.assoc_results()) == before);
        const std::string labels_before = slurp(paths.song_labels());
        run_label(cfg);
        CHECK(slurp(paths.song_labels()) == labels_before);
    }

    SECTION("genre mapping filled genre_top") {
        const auto corpus = load_corpus_artifact(paths.accepted(), "accepted");
        bool any_top = false;
        for (const auto& r : corpus)
            if (r.genre_top) {
                any_top = true;
                break;
            }
        CHECK(any_top);
    }
}

TEST_CASE("name selection feeds the battery") {
    const auto dir = test_root() / "names";
    fs::remove_all(dir);
    FixtureConfig fx;
    fx.seed = 21;
    fx.n_male_solo = 5;
    fx.n_female_solo = 4;
    fx.n_group = 2;
    write_fixture(dir, fx);

    // candidate lists drawn from the fixture's filler vocabulary (these are
    // frequent in every partition), plus a word absent from the corpus
    std::ofstream(dir / "male_candidates.txt") << "love\nnight\nheart\nnosuchword\n";
    std::ofstream(dir / "female_candidates.txt") << "baby\ntime\nroad\n";
    {
        auto conf = nlohmann::json::parse(slurp(dir / "config.json"));
        conf["assoc"]["male_name_candidates"] = "male_candidates.txt";
        conf["assoc"]["female_name_candidates"] = "female_candidates.txt";
        conf["assoc"]["names_k"] = 3;
        std::ofstream(dir / "config.json") << conf.dump(2) << "\n";
        std::ofstream(dir / "battery.tsv") << "A\tB\tX\tY\nseta\tsetb\tmale_names\tfemale_names\n";
    }

    auto cfg = load_project_config(dir / "config.json");
    run_ingest(cfg);
    run_dedup(cfg);
    run_train_embed(cfg);
    const auto stats = run_assoc(cfg);
    CHECK(stats.battery_rows == 1);
    const std::string results = slurp(artifacts(cfg).assoc_results());
    CHECK(results.find("X=male_names") != std::string::npos);
    CHECK(results.find("Y=female_names") != std::string::npos);
}

TEST_CASE("cli exit codes") {
    const auto dir = test_root() / "cli";
    fs::remove_all(dir);
    fs::create_directories(dir);

    SECTION("unknown command is a usage error") {
        CHECK(run_cli("frobnicate") == 2);
    }
    SECTION("missing config file") {
        CHECK(run_cli("ingest --config " + (dir / "no_such.json").string()) == 4);
    }
    SECTION("invalid config json") {
        std::ofstream(dir / "bad.json") << "{not json";
        CHECK(run_cli("ingest --config " + (dir / "bad.json").string()) == 3);
    }
    SECTION("missing upstream artifact") {
        FixtureConfig fx;
        fx.seed = 5;
        write_fixture(dir / "fx", fx);
        // dedup before ingest: the accepted corpus artifact does not exist
        CHECK(run_cli("dedup --config " + (dir / "fx" / "config.json").string()) == 4);
    }
    SECTION("help exits zero") {
        CHECK(run_cli("--help") == 0);
    }
}

TEST_CASE("cli pipeline smoke run and oov reporting") {
    const auto dir = test_root() / "cli_run";
    fs::remove_all(dir);
    FixtureConfig fx;
    fx.seed = 7;
    fx.n_male_solo = 4;
    fx.n_female_solo = 4;
    fx.n_group = 2;
    write_fixture(dir, fx);
    const std::string cfg_arg = " --config " + (dir / "config.json").string();

    REQUIRE(run_cli("ingest" + cfg_arg) == 0);
    REQUIRE(run_cli("dedup" + cfg_arg) == 0);
    REQUIRE(run_cli("match" + cfg_arg) == 0);
    REQUIRE(run_cli("train-embed" + cfg_arg) == 0);
    REQUIRE(run_cli("assoc" + cfg_arg) == 0);
    REQUIRE(run_cli("score" + cfg_arg) == 0);
    REQUIRE(run_cli("label" + cfg_arg) == 0);
    REQUIRE(run_cli("evaluate" + cfg_arg) == 0);
    REQUIRE(run_cli("sweep" + cfg_arg) == 0);
    REQUIRE(run_cli("analyze" + cfg_arg) == 0);
    REQUIRE(run_cli("report" + cfg_arg) == 0);

    SECTION("a word missing from the corpora fails assoc naming the word") {
        // survive balancing by zeroing the frequency floor and keeping sizes equal
        {
            std::ofstream(dir / "wordsets" / "setx.txt", std::ios::app) << "xghost\n";
            std::ofstream(dir / "wordsets" / "sety.txt", std::ios::app) << "yghost\n";
            auto conf = nlohmann::json::parse(slurp(dir / "config.json"));
            conf["assoc"]["min_word_frequency"] = 0;
            std::ofstream(dir / "config.json") << conf.dump(2) << "\n";
        }
        const auto err_file = dir / "assoc_err.txt";
        CHECK(run_cli("assoc" + cfg_arg, err_file) == 5);
        const auto err = slurp(err_file);
        CHECK(err.find("oov") != std::string::npos);
        CHECK(err.find("ghost") != std::string::npos);
    }
}
