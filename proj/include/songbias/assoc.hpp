#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include "songbias/embeddings.hpp"
#include "songbias/errors.hpp"

namespace songbias {

struct WordSet {
    std::string name;
    std::vector<std::string> words;  // ordered, unique, lowercase
};

// One word per line, '#' comments allowed; words are lowercased on load.
inline WordSet load_word_set(const std::string& path, std::string name) {
    std::ifstream in(path);
    if (!in) throw MissingArtifactError("cannot open word set: " + path);
    WordSet ws;
    ws.name = std::move(name);
    std::unordered_set<std::string> seen;
    std::string line;
    while (std::getline(in, line)) {
        std::string w = text::to_lower_ascii(text::trim(line));
        if (w.empty() || w[0] == '#') continue;
        if (!seen.insert(w).second) throw ConfigError("duplicate word '" + w + "' in " + path);
        ws.words.push_back(std::move(w));
    }
    return ws;
}

enum class TestKind { weat, sc_weat, sweat };

inline const char* to_string(TestKind t) {
    switch (t) {
        case TestKind::weat: return "weat";
        case TestKind::sc_weat: return "sc_weat";
        default: return "sweat";
    }
}

struct AssociationResult {
    TestKind test = TestKind::weat;
    std::string sets;    // e.g. "X=flowers Y=insects A=pleasant B=unpleasant"
    std::string corpus;  // partition name, or "d1|d2" for sweat
    int seed = 0;        // seed of the embedding space(s) the test ran on
    double effect_or_score = 0.0;
    double statistic = 0.0;
    double p_value = 1.0;     // strict one-sided "greater" tail
    double smoothed_p = 1.0;  // (count+1)/(n+1), for small samples
    // tail in the direction of the observed statistic; a strongly negative
    // association gets a small directional_p where p_value sits near 1
    double directional_p = 1.0;
    std::uint64_t n_permutations_used = 0;
    bool exact_enumeration = false;
};

// s(w, A, B): mean cosine of w to A minus mean cosine of w to B.
inline double s_assoc(const std::string& w, const WordSet& A, const WordSet& B,
                      const EmbeddingSpace& space) {
    if (A.words.empty() || B.words.empty()) throw DataError("empty attribute set");
    double sa = 0.0, sb = 0.0;
    for (const auto& a : A.words) sa += cosine(space, w, a);
    for (const auto& b : B.words) sb += cosine(space, w, b);
    return sa / static_cast<double>(A.words.size()) - sb / static_cast<double>(B.words.size());
}

namespace detail {

// C(n, k), saturating at cap.
inline std::uint64_t binomial_capped(std::uint64_t n, std::uint64_t k, std::uint64_t cap) {
    if (k > n) return 0;
    k = std::min(k, n - k);
    unsigned __int128 r = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        r = r * (n - k + i) / i;  // exact at every step of this ordering
        if (r > cap) return cap + 1;
    }
    return static_cast<std::uint64_t>(r);
}

struct TailCount {
    std::uint64_t greater = 0;  // permutation statistics strictly above observed
    std::uint64_t less = 0;     // strictly below observed
    std::uint64_t total = 0;    // permutations evaluated (the p denominator)
    bool exact = false;
};

// One-sided permutation tail for split statistics of the form
//   stat(S) = sum_{i in S} v[i] - sum_{i not in S} v[i],  |S| = k,
// with the observed split being the first k positions of v. Enumerates all
// C(n,k) subsets when the distinct-partition count C(n,k)/2 fits in n_perm
// (or when n_perm cannot be filled with distinct subsets); otherwise samples
// n_perm distinct subsets uniformly, duplicates rejected by hashing.
inline TailCount split_permutation_tail(const std::vector<double>& v, std::size_t k,
                                        std::uint64_t n_perm, std::uint64_t rng_seed) {
    const std::size_t n = v.size();
    double total_sum = 0.0;
    for (double x : v) total_sum += x;
    double obs_sel = 0.0;
    for (std::size_t i = 0; i < k; ++i) obs_sel += v[i];
    const double observed = 2.0 * obs_sel - total_sum;

    const std::uint64_t n_subsets = binomial_capped(n, k, std::uint64_t{1} << 62);
    TailCount out;
    if (n_subsets / 2 <= n_perm) {
        std::vector<std::size_t> c(k);
        std::iota(c.begin(), c.end(), std::size_t{0});
        bool more = k > 0 && k <= n;
        while (more) {
            double sel = 0.0;
            for (std::size_t i : c) sel += v[i];
            const double stat = 2.0 * sel - total_sum;
            if (stat > observed) ++out.greater;
            if (stat < observed) ++out.less;
            ++out.total;
            more = false;
            std::size_t i = k;
            while (i-- > 0) {
                if (c[i] != i + n - k) {
                    ++c[i];
                    for (std::size_t j = i + 1; j < k; ++j) c[j] = c[j - 1] + 1;
                    more = true;
                    break;
                }
            }
        }
        out.exact = true;
        return out;
    }

    std::mt19937_64 rng(rng_seed);
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    std::unordered_set<std::string> seen;
    std::vector<std::size_t> pick(k);
    while (out.total < n_perm) {
        for (std::size_t i = 0; i < k; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(rng() % (n - i));
            std::swap(idx[i], idx[j]);
        }
        pick.assign(idx.begin(), idx.begin() + k);
        std::sort(pick.begin(), pick.end());
        std::string key(reinterpret_cast<const char*>(pick.data()), k * sizeof(std::size_t));
        if (!seen.insert(std::move(key)).second) continue;
        double sel = 0.0;
        for (std::size_t i : pick) sel += v[i];
        const double stat = 2.0 * sel - total_sum;
        if (stat > observed) ++out.greater;
        if (stat < observed) ++out.less;
        ++out.total;
    }
    out.exact = false;
    return out;
}

inline void check_disjoint(const WordSet& a, const WordSet& b, const char* err) {
    std::set<std::string> sa(a.words.begin(), a.words.end());
    for (const auto& w : b.words)
        if (sa.count(w)) throw DataError(std::string(err) + ": '" + w + "' in both sets");
}

inline void check_vocab(const WordSet& ws, const EmbeddingSpace& space) {
    for (const auto& w : ws.words) (void)space.word_index(w);
}

inline double sample_std(const std::vector<double>& xs) {
    const double mean =
        std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
    double acc = 0.0;
    for (double x : xs) acc += (x - mean) * (x - mean);
    return std::sqrt(acc / static_cast<double>(xs.size() - 1));
}

inline std::string set_label(const WordSet& X, const WordSet& Y, const WordSet& A,
                             const WordSet& B) {
    return "X=" + X.name + " Y=" + Y.name + " A=" + A.name + " B=" + B.name;
}

}  // namespace detail

// WEAT: Cohen's-D-style effect over the two target sets, permutation p on the
// statistic S = sum_X s - sum_Y s with a strict one-sided tail.
inline AssociationResult weat(const WordSet& X, const WordSet& Y, const WordSet& A,
                              const WordSet& B, const EmbeddingSpace& space,
                              std::uint64_t n_perm = 1000, std::uint64_t rng_seed = 0) {
    if (X.words.size() != Y.words.size()) throw DataError("unbalanced_targets");
    if (X.words.size() < 2) throw DataError("target_set_too_small");
    detail::check_disjoint(X, Y, "overlapping_targets");
    detail::check_vocab(X, space);
    detail::check_vocab(Y, space);
    detail::check_vocab(A, space);
    detail::check_vocab(B, space);

    std::vector<double> sv;  // X words first, then Y words
    sv.reserve(X.words.size() + Y.words.size());
    for (const auto& w : X.words) sv.push_back(s_assoc(w, A, B, space));
    for (const auto& w : Y.words) sv.push_back(s_assoc(w, A, B, space));
    const std::size_t nx = X.words.size();

    std::vector<double> sx(sv.begin(), sv.begin() + nx), sy(sv.begin() + nx, sv.end());
    const double mx = std::accumulate(sx.begin(), sx.end(), 0.0) / static_cast<double>(nx);
    const double my = std::accumulate(sy.begin(), sy.end(), 0.0) / static_cast<double>(nx);
    double vx = 0.0, vy = 0.0;
    for (double x : sx) vx += (x - mx) * (x - mx);
    for (double y : sy) vy += (y - my) * (y - my);
    vx /= static_cast<double>(nx - 1);
    vy /= static_cast<double>(nx - 1);
    const double pooled =
        std::sqrt(((nx - 1) * vx + (nx - 1) * vy) / static_cast<double>(2 * nx - 2));

    AssociationResult res;
    res.test = TestKind::weat;
    res.sets = detail::set_label(X, Y, A, B);
    res.corpus = space.corpus_name;
    res.seed = space.seed;
    res.statistic = std::accumulate(sx.begin(), sx.end(), 0.0) -
                    std::accumulate(sy.begin(), sy.end(), 0.0);
    res.effect_or_score = pooled == 0.0 ? 0.0 : (mx - my) / pooled;

    const auto tail = detail::split_permutation_tail(sv, nx, n_perm, rng_seed);
    res.p_value = static_cast<double>(tail.greater) / static_cast<double>(tail.total);
    res.smoothed_p = static_cast<double>(tail.greater + 1) / static_cast<double>(tail.total + 1);
    res.directional_p =
        res.statistic >= 0.0
            ? res.p_value
            : static_cast<double>(tail.less) / static_cast<double>(tail.total);
    res.n_permutations_used = tail.total;
    res.exact_enumeration = tail.exact;
    return res;
}

// SC-WEAT: association of a single target set W against attribute sets A/B.
// Effect is mean_W s / std_W s; significance permutes the attribute union
// into equal halves.
inline AssociationResult sc_weat(const WordSet& W, const WordSet& A, const WordSet& B,
                                 const EmbeddingSpace& space, std::uint64_t n_perm = 1000,
                                 std::uint64_t rng_seed = 0) {
    if (A.words.size() != B.words.size()) throw DataError("unbalanced_attributes");
    if (W.words.size() < 2) throw DataError("target_set_too_small");
    detail::check_disjoint(A, B, "overlapping_attributes");
    detail::check_vocab(W, space);
    detail::check_vocab(A, space);
    detail::check_vocab(B, space);

    std::vector<double> sw;
    sw.reserve(W.words.size());
    for (const auto& w : W.words) sw.push_back(s_assoc(w, A, B, space));
    const double mean =
        std::accumulate(sw.begin(), sw.end(), 0.0) / static_cast<double>(sw.size());
    const double sd = detail::sample_std(sw);

    AssociationResult res;
    res.test = TestKind::sc_weat;
    res.sets = "W=" + W.name + " A=" + A.name + " B=" + B.name;
    res.corpus = space.corpus_name;
    res.seed = space.seed;
    res.statistic = std::accumulate(sw.begin(), sw.end(), 0.0);
    res.effect_or_score = sd == 0.0 ? 0.0 : mean / sd;

    // column sums over W reduce each attribute permutation to a split sum:
    // sum_W s(w, A_i, B_i) = (sum_{u in A_i} col(u) - sum_{u in B_i} col(u)) / |A|
    std::vector<double> col;
    col.reserve(2 * A.words.size());
    for (const auto& a : A.words) {
        double c = 0.0;
        for (const auto& w : W.words) c += cosine(space, w, a);
        col.push_back(c / static_cast<double>(A.words.size()));
    }
    for (const auto& b : B.words) {
        double c = 0.0;
        for (const auto& w : W.words) c += cosine(space, w, b);
        col.push_back(c / static_cast<double>(B.words.size()));
    }
    const auto tail = detail::split_permutation_tail(col, A.words.size(), n_perm, rng_seed);
    res.p_value = static_cast<double>(tail.greater) / static_cast<double>(tail.total);
    res.smoothed_p = static_cast<double>(tail.greater + 1) / static_cast<double>(tail.total + 1);
    res.directional_p =
        res.statistic >= 0.0
            ? res.p_value
            : static_cast<double>(tail.less) / static_cast<double>(tail.total);
    res.n_permutations_used = tail.total;
    res.exact_enumeration = tail.exact;
    return res;
}

// SWEAT: compares the A/B association of one target set across two embedding
// spaces. Significance flips each word's space contribution independently.
inline AssociationResult sweat(const WordSet& W, const WordSet& A, const WordSet& B,
                               const EmbeddingSpace& d1, const EmbeddingSpace& d2,
                               std::uint64_t n_perm = 1000, std::uint64_t rng_seed = 0) {
    for (const EmbeddingSpace* sp : {&d1, &d2}) {
        detail::check_vocab(W, *sp);
        detail::check_vocab(A, *sp);
        detail::check_vocab(B, *sp);
    }
    if (W.words.empty()) throw DataError("target_set_too_small");

    std::vector<double> diff;  // per-word contribution s(w,..,D1) - s(w,..,D2)
    diff.reserve(W.words.size());
    for (const auto& w : W.words) diff.push_back(s_assoc(w, A, B, d1) - s_assoc(w, A, B, d2));
    const double score = std::accumulate(diff.begin(), diff.end(), 0.0);

    AssociationResult res;
    res.test = TestKind::sweat;
    res.sets = "W=" + W.name + " A=" + A.name + " B=" + B.name;
    res.corpus = d1.corpus_name + "|" + d2.corpus_name;
    res.seed = d1.seed;
    res.statistic = score;
    res.effect_or_score = score;

    const std::size_t m = W.words.size();
    std::uint64_t greater = 0, less = 0, total = 0;
    bool exact = false;
    if (m < 63 && (std::uint64_t{1} << m) <= n_perm) {
        const std::uint64_t lim = std::uint64_t{1} << m;
        for (std::uint64_t mask = 0; mask < lim; ++mask) {
            double s = 0.0;
            for (std::size_t i = 0; i < m; ++i)
                s += (mask >> i) & 1 ? -diff[i] : diff[i];
            if (s > score) ++greater;
            if (s < score) ++less;
        }
        total = lim;
        exact = true;
    } else {
        std::mt19937_64 rng(rng_seed);
        std::unordered_set<std::uint64_t> seen;
        const std::uint64_t mask_lim =
            m >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << m) - 1;
        while (total < n_perm) {
            const std::uint64_t mask = rng() & mask_lim;
            if (!seen.insert(mask).second) continue;
            double s = 0.0;
            for (std::size_t i = 0; i < m; ++i)
                s += (mask >> i) & 1 ? -diff[i] : diff[i];
            if (s > score) ++greater;
            if (s < score) ++less;
            ++total;
        }
    }
    res.p_value = static_cast<double>(greater) / static_cast<double>(total);
    res.smoothed_p = static_cast<double>(greater + 1) / static_cast<double>(total + 1);
    res.directional_p = score >= 0.0 ? res.p_value
                                     : static_cast<double>(less) / static_cast<double>(total);
    res.n_permutations_used = total;
    res.exact_enumeration = exact;
    return res;
}

// ---- word-set preparation ---------------------------------------------------

using FreqTables = std::vector<const std::map<std::string, long long>*>;

inline long long min_frequency(const std::string& w, const FreqTables& freqs) {
    long long m = std::numeric_limits<long long>::max();
    for (const auto* f : freqs) {
        auto it = f->find(w);
        m = std::min(m, it == f->end() ? 0LL : it->second);
    }
    return m;
}

// Rule 1: drop words whose min-across-corpora frequency is below min_freq.
// Rule 2: trim the larger set by dropping its least frequent word (ties go to
// the reverse-alphabetically later word) until sizes match.
inline std::pair<WordSet, WordSet> balance_word_sets(const WordSet& a, const WordSet& b,
                                                     const FreqTables& freqs,
                                                     long long min_freq = 5) {
    auto prune = [&](const WordSet& ws) {
        WordSet out;
        out.name = ws.name;
        for (const auto& w : ws.words)
            if (min_frequency(w, freqs) >= min_freq) out.words.push_back(w);
        return out;
    };
    WordSet ra = prune(a), rb = prune(b);
    if (ra.words.empty() || rb.words.empty()) throw DataError("set_exhausted");

    auto drop_least_frequent = [&](WordSet& ws) {
        std::size_t victim = 0;
        long long vfreq = min_frequency(ws.words[0], freqs);
        for (std::size_t i = 1; i < ws.words.size(); ++i) {
            const long long f = min_frequency(ws.words[i], freqs);
            if (f < vfreq || (f == vfreq && ws.words[i] > ws.words[victim])) {
                victim = i;
                vfreq = f;
            }
        }
        ws.words.erase(ws.words.begin() + static_cast<std::ptrdiff_t>(victim));
    };
    while (ra.words.size() != rb.words.size())
        drop_least_frequent(ra.words.size() > rb.words.size() ? ra : rb);
    if (ra.words.empty()) throw DataError("set_exhausted");
    return {ra, rb};
}

// Top-k candidate names by min-across-corpora frequency, ties alphabetical.
inline WordSet select_proper_names(const std::vector<std::string>& candidates,
                                   const FreqTables& freqs, std::size_t k,
                                   std::string set_name = "names") {
    std::vector<std::pair<std::string, long long>> ranked;
    std::unordered_set<std::string> seen;
    for (const auto& c : candidates) {
        std::string w = text::to_lower_ascii(text::trim(c));
        if (w.empty() || !seen.insert(w).second) continue;
        const long long f = min_frequency(w, freqs);
        if (f > 0) ranked.emplace_back(std::move(w), f);
    }
    if (ranked.size() < k) throw DataError("insufficient_candidates");
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    WordSet out;
    out.name = std::move(set_name);
    for (std::size_t i = 0; i < k; ++i) out.words.push_back(ranked[i].first);
    return out;
}

// ---- five-seed aggregation --------------------------------------------------

struct MultiSeedResult {
    std::vector<AssociationResult> per_seed;  // seeds 0..4, in order
    AssociationResult reported;               // the seed-0 result
    bool significant_at_010 = false;          // all five p < 0.10
    bool significant_at_005 = false;          // all five p < 0.05
};

inline MultiSeedResult aggregate_multiseed(const std::vector<AssociationResult>& results) {
    if (results.size() != 5) throw DataError("aggregate_multiseed requires exactly 5 results");
    for (std::size_t i = 0; i < 5; ++i) {
        const auto& r = results[i];
        if (r.test != results[0].test || r.sets != results[0].sets ||
            r.corpus != results[0].corpus)
            throw DataError("mixed test instances in aggregate_multiseed");
        if (i > 0 && r.seed <= results[i - 1].seed)
            throw DataError("aggregate_multiseed expects five distinct ascending seeds");
    }
    MultiSeedResult out;
    out.per_seed = results;
    out.reported = results[0];
    out.significant_at_010 = true;
    out.significant_at_005 = true;
    for (const auto& r : results) {
        out.significant_at_010 = out.significant_at_010 && r.p_value < 0.10;
        out.significant_at_005 = out.significant_at_005 && r.p_value < 0.05;
    }
    return out;
}

inline bool significant_at(const MultiSeedResult& r, double alpha) {
    if (alpha == 0.10) return r.significant_at_010;
    if (alpha == 0.05) return r.significant_at_005;
    bool all = true;
    for (const auto& s : r.per_seed) all = all && s.p_value < alpha;
    return all;
}

}  // namespace songbias
