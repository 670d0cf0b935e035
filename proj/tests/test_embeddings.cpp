#include <cmath>
#include <random>
#include <sstream>

#include <catch2/catch_amalgamated.hpp>

#include "songbias/embeddings.hpp"

using namespace songbias;

namespace {

// Planted-co-occurrence corpus: x and a fill interchangeable slots in the
// same line patterns (likewise y and b), so their context distributions
// match and cos(x,a) comes out far above cos(x,b).
std::string planted_corpus(int n_lines, unsigned seed, bool reversed = false) {
    std::mt19937 rng(seed);
    std::ostringstream out;
    const std::string x = "xtok", y = "ytok", a = reversed ? "btok" : "atok",
                      b = reversed ? "atok" : "btok";
    auto filler = [&] { return "fill" + std::to_string(rng() % 30); };
    for (int i = 0; i < n_lines; ++i) {
        switch (rng() % 6) {
            case 0: out << x << ' ' << a << ' ' << x << ' ' << a; break;
            case 1: out << filler() << ' ' << x << ' ' << a << ' ' << filler(); break;
            case 2: out << y << ' ' << b << ' ' << y << ' ' << b; break;
            case 3: out << filler() << ' ' << y << ' ' << b << ' ' << filler(); break;
            default:
                out << filler() << ' ' << filler() << ' ' << filler() << ' ' << filler();
                break;
        }
        out << '\n';
    }
    return out.str();
}

TrainConfig small_config(int seed) {
    TrainConfig cfg;
    cfg.dim = 24;
    cfg.epochs = 6;
    cfg.window = 3;
    cfg.min_count = 5;
    cfg.negatives = 5;
    cfg.seed = seed;
    cfg.subsample_threshold = 0;  // tiny corpus: keep everything
    return cfg;
}

}  // namespace

TEST_CASE("build_vocab counts and min_count boundary") {
    const auto v = build_vocab("a a a b", 3);
    REQUIRE(v.words == std::vector<std::string>{"a"});
    CHECK(v.full_freq.at("a") == 3);
    CHECK(v.full_freq.at("b") == 1);
    CHECK(v.total_tokens == 4);
    CHECK(v.vocab_tokens == 3);

    // a word appearing min_count-1 times is excluded but stays in the table
    const auto v2 = build_vocab("w w w w x x x x y y y y z z z z q q q", 4);
    CHECK(v2.index.count("q") == 0);
    CHECK(v2.full_freq.at("q") == 3);
    // one appearing exactly min_count times is included
    CHECK(v2.index.count("w") == 1);
}

TEST_CASE("build_vocab rejects an empty corpus") {
    CHECK_THROWS_WITH(build_vocab("", 5), "empty_corpus");
    CHECK_THROWS_WITH(build_vocab("\n  \n", 5), "empty_corpus");
}

TEST_CASE("vocabulary is a subset of the corpus words") {
    const auto v = build_vocab(planted_corpus(500, 1), 5);
    for (const auto& w : v.words) CHECK(v.full_freq.count(w) == 1);
}

TEST_CASE("planted co-occurrence is recovered") {
    const std::string corpus = planted_corpus(1500, 42);
    const auto space = train(corpus, small_config(0), "test");
    CHECK(cosine(space, "xtok", "atok") > cosine(space, "xtok", "btok"));
    CHECK(cosine(space, "ytok", "btok") > cosine(space, "ytok", "atok"));
}

TEST_CASE("training is bit-reproducible with one worker and a fixed seed") {
    const std::string corpus = planted_corpus(400, 9);
    const auto s1 = train(corpus, small_config(3), "run1");
    const auto s2 = train(corpus, small_config(3), "run2");
    REQUIRE(s1.vectors.size() == s2.vectors.size());
    for (std::size_t i = 0; i < s1.vectors.size(); ++i) {
        REQUIRE(s1.vectors[i] == s2.vectors[i]);  // bit-exact
    }
}

TEST_CASE("different seeds give different vectors, all passing the planted check") {
    const std::string corpus = planted_corpus(1500, 7);
    std::vector<EmbeddingSpace> spaces;
    for (int seed = 0; seed < 5; ++seed) spaces.push_back(train(corpus, small_config(seed)));
    for (int s = 1; s < 5; ++s) {
        bool any_diff = false;
        for (std::size_t i = 0; i < spaces[0].vectors.size() && !any_diff; ++i)
            any_diff = spaces[s].vectors[i] != spaces[0].vectors[i];
        CHECK(any_diff);
    }
    for (const auto& sp : spaces) {
        CHECK(cosine(sp, "xtok", "atok") > cosine(sp, "xtok", "btok"));
        CHECK(cosine(sp, "ytok", "btok") > cosine(sp, "ytok", "atok"));
    }
}

TEST_CASE("final epoch loss beats first epoch loss on a >=1000 token corpus") {
    const std::string corpus = planted_corpus(1200, 21);  // ~4800 tokens
    const auto space = train(corpus, small_config(1));
    REQUIRE(space.epoch_losses.size() >= 2);
    CHECK(space.epoch_losses.back() < space.epoch_losses.front());
}

TEST_CASE("training on an empty vocab errors") {
    TrainConfig cfg = small_config(0);
    cfg.min_count = 100;
    CHECK_THROWS_WITH(train("a b c a b c", cfg), "empty_vocab");
}

TEST_CASE("cosine identities") {
    EmbeddingSpace sp;
    sp.corpus_name = "hand";
    sp.dim = 2;
    sp.vocab = {"w", "u", "v"};
    sp.index = {{"w", 0}, {"u", 1}, {"v", 2}};
    sp.vectors = {1.0, 1.0, 1.0, 0.0, 0.0, 1.0};

    CHECK(cosine(sp, "w", "w") == Catch::Approx(1.0).epsilon(1e-9));
    CHECK(cosine(sp, "u", "v") == 0.0);
    CHECK(cosine(sp, "w", "u") == Catch::Approx(0.7071).margin(1e-4));
    CHECK(cosine(sp, "w", "u") == cosine(sp, "u", "w"));
    CHECK_THROWS_WITH(cosine(sp, "w", "nope"), "oov: nope (corpus hand)");
}

TEST_CASE("rescaling one stored vector leaves cosines unchanged") {
    const auto space = train(planted_corpus(400, 2), small_config(0), "t");
    EmbeddingSpace scaled = space;
    for (int d = 0; d < scaled.dim; ++d) scaled.row(1)[d] *= 8.0;  // power of two: exact
    const auto& w0 = space.vocab[0];
    const auto& w1 = space.vocab[1];
    CHECK(cosine(space, w0, w1) == cosine(scaled, w0, w1));
    CHECK(cosine(scaled, w1, w1) == Catch::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("save/load round trip preserves vectors and config") {
    auto cfg = small_config(4);
    const auto space = train(planted_corpus(300, 3), cfg, "roundtrip");
    std::ostringstream os;
    save_embeddings(space, os);
    std::istringstream is(os.str());
    const auto loaded = load_embeddings(is);
    CHECK(loaded.corpus_name == "roundtrip");
    CHECK(loaded.seed == 4);
    CHECK(loaded.dim == space.dim);
    CHECK(loaded.config.window == cfg.window);
    REQUIRE(loaded.vocab == space.vocab);
    REQUIRE(loaded.vectors.size() == space.vectors.size());
    for (std::size_t i = 0; i < space.vectors.size(); ++i)
        REQUIRE(loaded.vectors[i] == space.vectors[i]);  // %.17g round-trips doubles
}

TEST_CASE("loader rejects corrupt tables") {
    std::istringstream bad1("not the magic\n");
    CHECK_THROWS_AS(load_embeddings(bad1), DataError);
    std::istringstream bad2(
        "songbias-embeddings v1\ncorpus c\nseed 0\nvocab 2 2\nw 0.5 0.5\n");
    CHECK_THROWS_AS(load_embeddings(bad2), DataError);  // truncated
    std::istringstream bad3(
        "songbias-embeddings v1\ncorpus c\nseed 0\nvocab 1 2\nw 0.5 nan\n");
    CHECK_THROWS_AS(load_embeddings(bad3), DataError);  // non-finite
}

TEST_CASE("multi-worker training still recovers the planted signal") {
    TrainConfig cfg = small_config(0);
    cfg.workers = 2;
    const auto space = train(planted_corpus(1500, 13), cfg);
    CHECK(cosine(space, "xtok", "atok") > cosine(space, "xtok", "btok"));
}
