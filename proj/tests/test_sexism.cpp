#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include <catch2/catch_amalgamated.hpp>

#include "songbias/sexism.hpp"

using namespace songbias;

namespace {

std::string lyric_lines(int n) {
    std::string out;
    for (int i = 0; i < n; ++i) out += "line " + std::to_string(i) + " words here\n";
    return out;
}

}  // namespace

TEST_CASE("make_batches window walk") {
    SECTION("4 lines give one batch") {
        const auto b = make_batches("s", lyric_lines(4));
        REQUIRE(b.size() == 1);
        CHECK(b[0].lines.size() == 4);
        CHECK(b[0].batch_index == 0);
    }
    SECTION("6 lines give two batches sharing two lines") {
        const auto b = make_batches("s", lyric_lines(6));
        REQUIRE(b.size() == 2);
        CHECK(b[0].lines[2] == b[1].lines[0]);
        CHECK(b[0].lines[3] == b[1].lines[1]);
    }
    SECTION("7 lines give three batches, the last with three lines") {
        const auto b = make_batches("s", lyric_lines(7));
        REQUIRE(b.size() == 3);
        CHECK(b[0].lines.size() == 4);
        CHECK(b[1].lines.size() == 4);
        CHECK(b[2].lines.size() == 3);
    }
    SECTION("blank lines are ignored") {
        const auto b = make_batches("s", "a\n\nb\n\n\nc\nd\n");
        REQUIRE(b.size() == 1);
        CHECK(b[0].text == "a\nb\nc\nd");
    }
    SECTION("fewer than 4 non-empty lines errors") {
        CHECK_THROWS_AS(make_batches("s", lyric_lines(3)), DataError);
    }
}

TEST_CASE("batch count law and overlap structure") {
    std::mt19937 rng(17);
    for (int trial = 0; trial < 60; ++trial) {
        const int L = 4 + static_cast<int>(rng() % 197);  // [4, 200]
        const auto batches = make_batches("s", lyric_lines(L));
        const std::size_t expected = (static_cast<std::size_t>(L) - 2 + 1) / 2;  // ceil((L-2)/2)
        REQUIRE(batches.size() == expected);
        // batch indexes dense from 0
        for (std::size_t i = 0; i < batches.size(); ++i)
            CHECK(batches[i].batch_index == static_cast<int>(i));
        // every batch has 2-4 lines; all but possibly the last have exactly 4
        for (std::size_t i = 0; i + 1 < batches.size(); ++i) CHECK(batches[i].lines.size() == 4);
        CHECK(batches.back().lines.size() >= 2);
        CHECK(batches.back().lines.size() <= 4);
        // consecutive batches share exactly two lines
        for (std::size_t i = 0; i + 1 < batches.size(); ++i) {
            CHECK(batches[i].lines[2] == batches[i + 1].lines[0]);
            if (batches[i + 1].lines.size() > 1 && batches[i].lines.size() == 4)
                CHECK(batches[i].lines[3] == batches[i + 1].lines[1]);
        }
        // interior lines appear in exactly two batches
        std::map<std::string, int> appearances;
        for (const auto& b : batches)
            for (const auto& l : b.lines) ++appearances[std::string(l)];
        for (int li = 2; li <= L - 3; ++li)
            CHECK(appearances["line " + std::to_string(li) + " words here"] == 2);
    }
}

TEST_CASE("lexicon scorer hand arithmetic") {
    LexiconScorer scorer({{"bad", 2.0}}, -1.0);
    LineBatch hit;
    hit.text = "this is bad stuff\nmore lines\npadding\nend";
    // sigma(2.0 - 1.0) = sigma(1)
    CHECK(scorer.score(hit) == Catch::Approx(0.7310585786300049).margin(1e-9));

    LineBatch miss;
    miss.text = "nothing to see\nhere at all\nok\nend";
    CHECK(scorer.score(miss) == Catch::Approx(0.2689414213699951).margin(1e-9));

    LineBatch twice;
    twice.text = "bad bad\nx\nx\nx";
    CHECK(scorer.score(twice) == Catch::Approx(1.0 / (1.0 + std::exp(-3.0))).margin(1e-9));
}

TEST_CASE("lexicon file parsing") {
    const std::string path = "test_lexicon.tsv";
    {
        std::ofstream out(path);
        out << "# comment\nbad\t2.0\n__bias__\t-1.0\n";
    }
    const auto scorer = LexiconScorer::load(path);
    LineBatch b;
    b.text = "bad";
    CHECK(scorer.score(b) == Catch::Approx(0.7310585786300049).margin(1e-9));
    std::remove(path.c_str());

    {
        std::ofstream out(path);
        out << "term-without-weight\n";
    }
    CHECK_THROWS_AS(LexiconScorer::load(path), ConfigError);
    std::remove(path.c_str());
}

TEST_CASE("external scorer passthrough and missing keys") {
    ExternalScorer scorer({{{"s1", 0}, 0.9}});
    LineBatch b;
    b.song_id = "s1";
    b.batch_index = 0;
    const auto scores = score_batches(scorer, {b});
    REQUIRE(scores.size() == 1);
    CHECK(scores[0].prob == 0.9);
    CHECK(scores[0].scorer_id == "external");

    LineBatch missing;
    missing.song_id = "s2";
    missing.batch_index = 3;
    CHECK_THROWS_WITH(scorer.score(missing), "missing external score for (s2, 3)");
}

TEST_CASE("label_song threshold and n_b") {
    LabelConfig cfg;  // 0.725, n_b 1
    SECTION("one flagged batch is enough") {
        const auto l = label_song({0.80, 0.10}, cfg);
        CHECK(l.sexist);
        CHECK(l.n_flagged == 1);
    }
    SECTION("comparison is strict") {
        const auto l = label_song({0.70, 0.70}, cfg);
        CHECK(!l.sexist);
        const auto at = label_song({0.725}, cfg);
        CHECK(!at.sexist);  // exactly at threshold does not flag
    }
    SECTION("n_b requires that many flags") {
        LabelConfig c3;
        c3.n_b = 3;
        const auto l = label_song({0.8, 0.8, 0.3}, c3);
        CHECK(!l.sexist);
        CHECK(l.n_flagged == 2);
    }
}

TEST_CASE("labeling is monotone in threshold and n_b") {
    std::mt19937 rng(23);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> probs(1 + rng() % 10);
        for (auto& p : probs) p = u(rng);
        LabelConfig lo, hi;
        lo.threshold = u(rng);
        hi.threshold = std::min(1.0, lo.threshold + u(rng) * (1.0 - lo.threshold));
        lo.n_b = 1 + static_cast<int>(rng() % 4);
        hi.n_b = lo.n_b + static_cast<int>(rng() % 3);
        // raising the threshold (same n_b) never turns non-sexist into sexist
        if (label_song(probs, {hi.threshold, lo.n_b}).sexist)
            CHECK(label_song(probs, {lo.threshold, lo.n_b}).sexist);
        // raising n_b (same threshold) never does either
        if (label_song(probs, {lo.threshold, hi.n_b}).sexist)
            CHECK(label_song(probs, {lo.threshold, lo.n_b}).sexist);
    }
}

TEST_CASE("song_score reproduces label_song as a threshold rule") {
    std::mt19937 rng(29);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> probs(1 + rng() % 8);
        for (auto& p : probs) p = u(rng);
        const int n_b = 1 + static_cast<int>(rng() % 4);
        const double t = u(rng);
        CHECK(label_song(probs, {t, n_b}).sexist == (song_score(probs, n_b) > t));
    }
}

TEST_CASE("evaluate_labels hand confusion") {
    // TP=2 FP=1 FN=1 TN=6 -> sexist P = R = F1 = 2/3
    std::map<std::string, bool> gold, pred;
    int id = 0;
    auto add = [&](bool p, bool g, int n) {
        for (int i = 0; i < n; ++i) {
            const std::string key = "s" + std::to_string(id++);
            pred[key] = p;
            gold[key] = g;
        }
    };
    add(true, true, 2);
    add(true, false, 1);
    add(false, true, 1);
    add(false, false, 6);
    const auto r = evaluate_labels(pred, gold);
    CHECK(r.tp == 2);
    CHECK(r.fp == 1);
    CHECK(r.fn == 1);
    CHECK(r.tn == 6);
    CHECK(r.sexist.precision == Catch::Approx(2.0 / 3.0));
    CHECK(r.sexist.recall == Catch::Approx(2.0 / 3.0));
    CHECK(r.sexist.f1 == Catch::Approx(2.0 / 3.0));
    CHECK(r.macro.f1 == Catch::Approx(0.5 * (2.0 / 3.0 + r.non_sexist.f1)));
}

TEST_CASE("all-correct predictions give perfect per-class metrics") {
    std::map<std::string, bool> gold = {{"a", true}, {"b", false}, {"c", true}};
    const auto r = evaluate_labels(gold, gold);
    CHECK(r.sexist.precision == 1.0);
    CHECK(r.sexist.recall == 1.0);
    CHECK(r.sexist.f1 == 1.0);
    CHECK(r.non_sexist.f1 == 1.0);
}

TEST_CASE("always-sexist baseline identities on 190 songs with 77 positives") {
    std::map<std::string, bool> gold, pred;
    for (int i = 0; i < 190; ++i) {
        const std::string id = "g" + std::to_string(1000 + i);
        gold[id] = i < 77;
        pred[id] = true;
    }
    const auto r = evaluate_labels(pred, gold);
    CHECK(r.sexist.precision == Catch::Approx(0.41).margin(0.005));
    CHECK(r.sexist.recall == 1.0);
    CHECK(r.sexist.f1 == Catch::Approx(0.58).margin(0.005));
    CHECK(r.non_sexist.precision == 0.0);
    CHECK(r.non_sexist.recall == 0.0);
    CHECK(r.macro.precision == Catch::Approx(0.20).margin(0.005));
    CHECK(r.macro.recall == 0.5);
    CHECK(r.macro.f1 == Catch::Approx(0.29).margin(0.005));
    // prevalence identity holds on any gold set
    CHECK(r.sexist.precision == Catch::Approx(77.0 / 190.0));
}

TEST_CASE("evaluate builds a monotone ROC from (0,0) to (1,1)") {
    std::mt19937 rng(37);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::map<std::string, double> scores;
    std::map<std::string, bool> gold;
    for (int i = 0; i < 50; ++i) {
        const std::string id = "s" + std::to_string(i);
        gold[id] = rng() % 2 == 0;
        scores[id] = gold.at(id) ? 0.3 + 0.7 * u(rng) : 0.6 * u(rng);
    }
    const auto r = evaluate(scores, gold, 0.5);
    REQUIRE(r.auc.has_value());
    CHECK(*r.auc >= 0.0);
    CHECK(*r.auc <= 1.0);
    CHECK(*r.auc > 0.5);  // informative scores
    REQUIRE(!r.roc.empty());
    CHECK(r.roc.front().fpr == 0.0);
    CHECK(r.roc.front().tpr == 0.0);  // nothing beats the max score strictly
    CHECK(r.roc.back().fpr == 1.0);
    CHECK(r.roc.back().tpr == 1.0);
    for (std::size_t i = 1; i < r.roc.size(); ++i) {
        CHECK(r.roc[i].fpr >= r.roc[i - 1].fpr);
        CHECK(r.roc[i].tpr >= r.roc[i - 1].tpr);
    }

    SECTION("evaluation is input-order independent") {
        // maps iterate sorted already; verify the metrics only depend on content
        std::map<std::string, double> scores2(scores.rbegin(), scores.rend());
        const auto r2 = evaluate(scores2, gold, 0.5);
        CHECK(r2.sexist.f1 == r.sexist.f1);
        CHECK(r2.auc == r.auc);
    }
}

TEST_CASE("single-class gold reports no AUC") {
    std::map<std::string, double> scores = {{"a", 0.2}, {"b", 0.9}};
    std::map<std::string, bool> gold = {{"a", true}, {"b", true}};
    const auto r = evaluate(scores, gold, 0.5);
    CHECK(!r.auc.has_value());
    CHECK(r.roc.empty());
}

TEST_CASE("evaluate rejects id mismatches") {
    CHECK_THROWS_AS(evaluate({{"a", 0.5}}, {{"b", true}}, 0.5), DataError);
    CHECK_THROWS_AS(evaluate_labels({{"a", true}}, {{"a", true}, {"b", false}}), DataError);
}

TEST_CASE("sweep_thresholds picks the macro-F1 argmax with ties to the lower threshold") {
    // build batch scores whose macro F1 peaks at 0.6
    std::map<std::string, std::vector<double>> probs;
    std::map<std::string, bool> gold;
    int id = 0;
    auto add = [&](double p, bool g, int n) {
        for (int i = 0; i < n; ++i) {
            const std::string key = "s" + std::to_string(id++);
            probs[key] = {p};
            gold[key] = g;
        }
    };
    add(0.9, true, 8);    // well above any threshold
    add(0.65, true, 4);   // lost when threshold goes above 0.65
    add(0.55, false, 3);  // false alarms below 0.55
    add(0.1, false, 10);

    const auto sw = sweep_thresholds(probs, gold, {0.3, 0.6, 0.8}, 1);
    REQUIRE(sw.rows.size() == 3);
    const auto& best = *std::max_element(
        sw.rows.begin(), sw.rows.end(),
        [](const SweepRow& a, const SweepRow& b) { return a.report.macro.f1 < b.report.macro.f1; });
    CHECK(sw.best_macro_f1_threshold == best.threshold);
    CHECK(sw.best_macro_f1_threshold == 0.6);

    SECTION("single threshold is trivially optimal") {
        const auto one = sweep_thresholds(probs, gold, {0.5}, 1);
        CHECK(one.best_macro_f1_threshold == 0.5);
    }
    SECTION("equal macro F1 resolves to the lower threshold") {
        // thresholds between the same pair of adjacent scores give identical labels
        const auto tie = sweep_thresholds(probs, gold, {0.7, 0.75}, 1);
        CHECK(tie.rows[0].report.macro.f1 == tie.rows[1].report.macro.f1);
        CHECK(tie.best_macro_f1_threshold == 0.7);
    }
    SECTION("empty threshold list errors") {
        CHECK_THROWS_AS(sweep_thresholds(probs, gold, {}, 1), ConfigError);
    }
}
