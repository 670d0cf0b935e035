#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "songbias/errors.hpp"
#include "songbias/text.hpp"

namespace songbias {

struct TrainConfig {
    int window = 5;
    int dim = 300;
    int epochs = 40;
    int min_count = 5;
    int negatives = 5;
    double learning_rate = 0.025;  // linearly decayed to 1e-4 of itself
    int seed = 0;
    double subsample_threshold = 1e-3;
    int workers = 1;  // training is bit-reproducible only at workers = 1

    void validate() const {
        if (window < 1) throw ConfigError("window < 1");
        if (dim < 1) throw ConfigError("dim < 1");
        if (epochs < 1) throw ConfigError("epochs < 1");
        if (min_count < 1) throw ConfigError("min_count < 1");
        if (negatives < 0) throw ConfigError("negatives < 0");
        if (!(learning_rate > 0.0)) throw ConfigError("learning_rate <= 0");
        if (workers < 1) throw ConfigError("workers < 1");
    }
};

struct VocabBuild {
    std::vector<std::string> words;  // index -> word, ordered by (count desc, word asc)
    std::unordered_map<std::string, int> index;
    std::vector<long long> counts;             // aligned with words
    std::map<std::string, long long> full_freq;  // every word, including rare ones
    long long total_tokens = 0;
    long long vocab_tokens = 0;
};

// Vocabulary over the shared tokenizer. Words below min_count stay out of the
// vocab but remain in full_freq (word-set balancing needs them).
inline VocabBuild build_vocab(const std::string& corpus_text, int min_count) {
    VocabBuild v;
    for (const auto line : text::non_empty_lines(corpus_text)) {
        for (auto& tok : text::word_tokens(line)) {
            ++v.full_freq[tok];
            ++v.total_tokens;
        }
    }
    if (v.total_tokens == 0) throw DataError("empty_corpus");
    for (const auto& [w, c] : v.full_freq) {
        if (c >= min_count) {
            v.words.push_back(w);
            v.counts.push_back(c);
        }
    }
    // frequency-descending order; ties alphabetical (already alphabetical)
    std::vector<std::size_t> order(v.words.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return v.counts[a] > v.counts[b];
    });
    std::vector<std::string> words;
    std::vector<long long> counts;
    for (std::size_t i : order) {
        words.push_back(v.words[i]);
        counts.push_back(v.counts[i]);
    }
    v.words = std::move(words);
    v.counts = std::move(counts);
    for (std::size_t i = 0; i < v.words.size(); ++i) v.index[v.words[i]] = static_cast<int>(i);
    for (long long c : v.counts) v.vocab_tokens += c;
    return v;
}

struct EmbeddingSpace {
    std::string corpus_name;
    int seed = 0;
    TrainConfig config;
    std::vector<std::string> vocab;
    std::unordered_map<std::string, int> index;
    int dim = 0;
    std::vector<double> vectors;       // |vocab| x dim, row-major
    std::vector<double> epoch_losses;  // diagnostics only, not serialized

    const double* row(int i) const { return vectors.data() + static_cast<std::size_t>(i) * dim; }
    double* row(int i) { return vectors.data() + static_cast<std::size_t>(i) * dim; }

    bool contains(const std::string& w) const { return index.count(w) != 0; }

    int word_index(const std::string& w) const {
        auto it = index.find(w);
        if (it == index.end()) throw DataError("oov: " + w + " (corpus " + corpus_name + ")");
        return it->second;
    }
};

inline double cosine(const EmbeddingSpace& space, const std::string& w1, const std::string& w2) {
    const double* a = space.row(space.word_index(w1));
    const double* b = space.row(space.word_index(w2));
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (int i = 0; i < space.dim; ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// The classic trainer LCG; kept for its speed in the hot loop.
inline std::uint64_t lcg_next(std::uint64_t& state) {
    state = state * 25214903917ULL + 11ULL;
    return state;
}

constexpr int kExpTableSize = 1024;
constexpr double kMaxExp = 6.0;

struct SigmoidTable {
    float table[kExpTableSize];
    SigmoidTable() {
        for (int i = 0; i < kExpTableSize; ++i) {
            const double x = (i / static_cast<double>(kExpTableSize) * 2.0 - 1.0) * kMaxExp;
            const double e = std::exp(x);
            table[i] = static_cast<float>(e / (e + 1.0));
        }
    }
    float operator()(double f) const {
        if (f >= kMaxExp) return 1.0f;
        if (f <= -kMaxExp) return 0.0f;
        return table[static_cast<int>((f + kMaxExp) * (kExpTableSize / kMaxExp / 2.0))];
    }
};

inline double softplus(double x) {  // log(1 + e^x), stable
    return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

}  // namespace detail

// Skip-gram with negative sampling, trained from scratch. Sentences are the
// non-empty lines of corpus_text; context windows never cross lines. With
// workers > 1 the weight matrices are updated without locks, so only
// workers = 1 is bit-reproducible for a fixed seed.
inline EmbeddingSpace train(const std::string& corpus_text, const TrainConfig& cfg,
                            std::string corpus_name = "") {
    cfg.validate();
    const VocabBuild vb = build_vocab(corpus_text, cfg.min_count);
    if (vb.words.empty()) throw DataError("empty_vocab");

    std::vector<std::vector<int>> sentences;
    for (const auto line : text::non_empty_lines(corpus_text)) {
        std::vector<int> sent;
        for (auto& tok : text::word_tokens(line)) {
            auto it = vb.index.find(tok);
            if (it != vb.index.end()) sent.push_back(it->second);
        }
        if (!sent.empty()) sentences.push_back(std::move(sent));
    }

    const int vocab_size = static_cast<int>(vb.words.size());
    const int dim = cfg.dim;

    EmbeddingSpace space;
    space.corpus_name = std::move(corpus_name);
    space.seed = cfg.seed;
    space.config = cfg;
    space.vocab = vb.words;
    space.index = vb.index;
    space.dim = dim;
    space.vectors.assign(static_cast<std::size_t>(vocab_size) * dim, 0.0f);
    std::vector<double> syn1(static_cast<std::size_t>(vocab_size) * dim, 0.0);

    {
        std::uint64_t init_state = detail::splitmix64(static_cast<std::uint64_t>(cfg.seed) + 1);
        for (std::size_t i = 0; i < space.vectors.size(); ++i) {
            detail::lcg_next(init_state);
            space.vectors[i] = (((init_state & 0xFFFFULL) / 65536.0) - 0.5) / dim;
        }
    }

    // unigram^0.75 negative-sampling table
    const std::size_t table_size =
        std::min<std::size_t>(1u << 24, std::max<std::size_t>(1u << 20, vb.words.size() * 16));
    std::vector<std::int32_t> unigram(table_size);
    {
        double total_pow = 0.0;
        for (long long c : vb.counts) total_pow += std::pow(static_cast<double>(c), 0.75);
        std::size_t i = 0;
        double cum = std::pow(static_cast<double>(vb.counts[0]), 0.75) / total_pow;
        for (std::size_t j = 0; j < table_size; ++j) {
            unigram[j] = static_cast<std::int32_t>(i);
            if (static_cast<double>(j) / table_size > cum && i + 1 < vb.words.size()) {
                ++i;
                cum += std::pow(static_cast<double>(vb.counts[i]), 0.75) / total_pow;
            }
        }
    }

    // subsampling keep probabilities
    std::vector<double> keep_prob(vocab_size, 1.0);
    if (cfg.subsample_threshold > 0.0) {
        const double t = cfg.subsample_threshold * static_cast<double>(vb.vocab_tokens);
        for (int i = 0; i < vocab_size; ++i) {
            const double cn = static_cast<double>(vb.counts[i]);
            keep_prob[i] = std::min(1.0, (std::sqrt(cn / t) + 1.0) * t / cn);
        }
    }

    const detail::SigmoidTable sigmoid;
    const long long planned = vb.vocab_tokens * cfg.epochs;
    std::atomic<long long> processed{0};

    double* const syn0 = space.vectors.data();
    double* const syn1p = syn1.data();

    auto worker_pass = [&](int worker, int epoch, double* loss_sum, long long* loss_count) {
        std::uint64_t rng = detail::splitmix64(
            (static_cast<std::uint64_t>(static_cast<std::uint32_t>(cfg.seed)) << 32) ^
            detail::splitmix64(static_cast<std::uint64_t>(worker) * 1000003ULL + epoch));
        std::vector<double> grad(dim);
        double lsum = 0.0;
        long long lcount = 0;
        double alpha = cfg.learning_rate;

        for (std::size_t si = worker; si < sentences.size();
             si += static_cast<std::size_t>(cfg.workers)) {
            const std::vector<int>& raw = sentences[si];
            const long long done =
                processed.fetch_add(static_cast<long long>(raw.size())) + raw.size();
            alpha = cfg.learning_rate *
                    std::max(1e-4, 1.0 - static_cast<double>(done) / (planned + 1));

            // subsample frequent words
            std::vector<int> sent;
            sent.reserve(raw.size());
            for (int w : raw) {
                if (keep_prob[w] >= 1.0 ||
                    keep_prob[w] >= ((detail::lcg_next(rng) & 0xFFFFULL) / 65536.0))
                    sent.push_back(w);
            }
            const int len = static_cast<int>(sent.size());

            for (int pos = 0; pos < len; ++pos) {
                const int center = sent[pos];
                const int shrink =
                    static_cast<int>((detail::lcg_next(rng) >> 16) % static_cast<unsigned>(cfg.window));
                const int span = cfg.window - shrink;
                for (int off = -span; off <= span; ++off) {
                    if (off == 0) continue;
                    const int cpos = pos + off;
                    if (cpos < 0 || cpos >= len) continue;
                    const int context = sent[cpos];
                    double* l1 = syn0 + static_cast<std::size_t>(context) * dim;
                    for (int d = 0; d < dim; ++d) grad[d] = 0.0;

                    for (int k = 0; k <= cfg.negatives; ++k) {
                        int target;
                        int label;
                        if (k == 0) {
                            target = center;
                            label = 1;
                        } else {
                            target = unigram[(detail::lcg_next(rng) >> 16) % table_size];
                            if (target == center) continue;
                            label = 0;
                        }
                        double* l2 = syn1p + static_cast<std::size_t>(target) * dim;
                        double f = 0.0;
                        for (int d = 0; d < dim; ++d) f += l1[d] * l2[d];
                        const double sig = sigmoid(f);
                        const double g = (label - sig) * alpha;
                        lsum += detail::softplus(label == 1 ? -f : f);
                        ++lcount;
                        for (int d = 0; d < dim; ++d) grad[d] += g * l2[d];
                        for (int d = 0; d < dim; ++d) l2[d] += g * l1[d];
                    }
                    for (int d = 0; d < dim; ++d) l1[d] += grad[d];
                }
            }
        }
        *loss_sum = lsum;
        *loss_count = lcount;
    };

    space.epoch_losses.clear();
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::vector<double> sums(cfg.workers, 0.0);
        std::vector<long long> counts(cfg.workers, 0);
        if (cfg.workers == 1) {
            worker_pass(0, epoch, &sums[0], &counts[0]);
        } else {
            std::vector<std::thread> threads;
            for (int w = 0; w < cfg.workers; ++w)
                threads.emplace_back(worker_pass, w, epoch, &sums[w], &counts[w]);
            for (auto& t : threads) t.join();
        }
        double total = 0.0;
        long long cnt = 0;
        for (int w = 0; w < cfg.workers; ++w) {
            total += sums[w];
            cnt += counts[w];
        }
        const double avg = cnt > 0 ? total / static_cast<double>(cnt) : 0.0;
        if (!std::isfinite(avg)) throw DataError("diverged");
        space.epoch_losses.push_back(avg);
    }

    for (double x : space.vectors)
        if (!std::isfinite(x)) throw DataError("diverged");
    return space;
}

// ---- serialization ---------------------------------------------------------

inline void save_embeddings(const EmbeddingSpace& space, std::ostream& out) {
    out << "songbias-embeddings v1\n";
    out << "corpus " << space.corpus_name << "\n";
    out << "seed " << space.seed << "\n";
    const TrainConfig& c = space.config;
    char buf[64];
    out << "window " << c.window << "\nepochs " << c.epochs << "\nmin_count " << c.min_count
        << "\nnegatives " << c.negatives << "\n";
    std::snprintf(buf, sizeof buf, "%.17g", c.learning_rate);
    out << "learning_rate " << buf << "\n";
    std::snprintf(buf, sizeof buf, "%.17g", c.subsample_threshold);
    out << "subsample_threshold " << buf << "\n";
    out << "vocab " << space.vocab.size() << " " << space.dim << "\n";
    for (std::size_t i = 0; i < space.vocab.size(); ++i) {
        out << space.vocab[i];
        const double* r = space.row(static_cast<int>(i));
        for (int d = 0; d < space.dim; ++d) {
            std::snprintf(buf, sizeof buf, "%.17g", r[d]);
            out << ' ' << buf;
        }
        out << '\n';
    }
}

inline void save_embeddings(const EmbeddingSpace& space, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write embeddings: " + path);
    save_embeddings(space, out);
}

inline EmbeddingSpace load_embeddings(std::istream& in, const std::string& what = "embeddings") {
    auto fail = [&](const std::string& msg) -> void { throw DataError(what + ": " + msg); };
    std::string line;
    if (!std::getline(in, line) || line != "songbias-embeddings v1") fail("bad magic line");
    EmbeddingSpace space;
    std::size_t n_vocab = 0;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key == "corpus") {
            std::string rest;
            std::getline(ls, rest);
            space.corpus_name = text::trim(rest);
        } else if (key == "seed") {
            ls >> space.seed;
            space.config.seed = space.seed;
        } else if (key == "window") ls >> space.config.window;
        else if (key == "epochs") ls >> space.config.epochs;
        else if (key == "min_count") ls >> space.config.min_count;
        else if (key == "negatives") ls >> space.config.negatives;
        else if (key == "learning_rate") ls >> space.config.learning_rate;
        else if (key == "subsample_threshold") ls >> space.config.subsample_threshold;
        else if (key == "vocab") {
            ls >> n_vocab >> space.dim;
            break;
        } else fail("unknown header key: " + key);
    }
    if (space.dim < 1) fail("missing vocab header");
    space.vectors.reserve(n_vocab * space.dim);
    for (std::size_t i = 0; i < n_vocab; ++i) {
        if (!std::getline(in, line)) fail("truncated vector table");
        std::istringstream ls(line);
        std::string word;
        if (!(ls >> word)) fail("empty vector row");
        if (space.index.count(word)) fail("duplicate word: " + word);
        space.index[word] = static_cast<int>(space.vocab.size());
        space.vocab.push_back(word);
        for (int d = 0; d < space.dim; ++d) {
            double x;
            if (!(ls >> x)) fail("short vector row for word: " + word);
            if (!std::isfinite(x)) fail("non-finite component for word: " + word);
            space.vectors.push_back(x);
        }
    }
    if (space.vocab.size() != n_vocab) fail("row count mismatch");
    space.config.dim = space.dim;
    return space;
}

inline EmbeddingSpace load_embeddings_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw MissingArtifactError("cannot open embeddings: " + path);
    return load_embeddings(in, path);
}

inline void save_freq_table(const std::map<std::string, long long>& freq, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write frequency table: " + path);
    for (const auto& [w, c] : freq) out << w << '\t' << c << '\n';
}

inline std::map<std::string, long long> load_freq_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw MissingArtifactError("cannot open frequency table: " + path);
    std::map<std::string, long long> freq;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos) throw DataError("bad frequency table line: " + line);
        freq[line.substr(0, tab)] = std::stoll(line.substr(tab + 1));
    }
    return freq;
}

}  // namespace songbias
