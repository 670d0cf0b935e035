#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "songbias/errors.hpp"
#include "songbias/records.hpp"
#include "songbias/text.hpp"

namespace songbias {

// Word 3-grams of a lyric as a sorted unique list. Shingles are the three
// tokens joined with 0x1F so set operations are plain string comparisons.
struct ShingleSet {
    std::string song_id;
    std::vector<std::string> shingles;  // sorted, unique
};

inline ShingleSet shingle(const std::string& lyrics, std::string song_id = "") {
    ShingleSet out;
    out.song_id = std::move(song_id);
    const auto tokens = text::word_tokens(lyrics);
    if (tokens.size() < 3) return out;
    out.shingles.reserve(tokens.size() - 2);
    for (std::size_t i = 0; i + 2 < tokens.size(); ++i) {
        std::string sh = tokens[i];
        sh.push_back('\x1f');
        sh += tokens[i + 1];
        sh.push_back('\x1f');
        sh += tokens[i + 2];
        out.shingles.push_back(std::move(sh));
    }
    std::sort(out.shingles.begin(), out.shingles.end());
    out.shingles.erase(std::unique(out.shingles.begin(), out.shingles.end()), out.shingles.end());
    return out;
}

// |s1 ∩ s2| / |s1 ∪ s2|; two empty sets give 0 by convention.
inline double jaccard(const ShingleSet& s1, const ShingleSet& s2) {
    if (s1.shingles.empty() && s2.shingles.empty()) return 0.0;
    std::size_t i = 0, j = 0, inter = 0;
    while (i < s1.shingles.size() && j < s2.shingles.size()) {
        const int c = s1.shingles[i].compare(s2.shingles[j]);
        if (c == 0) { ++inter; ++i; ++j; }
        else if (c < 0) ++i;
        else ++j;
    }
    const std::size_t uni = s1.shingles.size() + s2.shingles.size() - inter;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

struct DuplicateCluster {
    std::vector<std::string> member_ids;  // sorted
    std::string canonical_id;             // minimal (year, song_id) member
    std::vector<std::string> cover_ids;   // different-artist members, sorted
    double min_pairwise_similarity = 1.0; // over all member pairs
};

struct DedupResult {
    Corpus retained;                        // canonicals + covers + singletons, by song_id
    std::vector<DuplicateCluster> clusters; // multi-member clusters, by canonical_id
    std::vector<std::string> dropped_ids;   // same-artist duplicates, sorted
};

namespace detail {

class UnionFind {
public:
    explicit UnionFind(std::size_t n) : parent_(n) {
        std::iota(parent_.begin(), parent_.end(), std::size_t{0});
    }
    std::size_t find(std::size_t x) {
        while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
        return x;
    }
    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent_[std::max(a, b)] = std::min(a, b);
    }

private:
    std::vector<std::size_t> parent_;
};

}  // namespace detail

// Connected-component clustering of the jaccard > threshold link graph.
// Candidate pairs come from an inverted index on shingles, which is exact for
// any threshold > 0 (a positive jaccard needs a shared shingle).
inline DedupResult cluster_duplicates(const Corpus& corpus, double threshold = 0.80) {
    if (!(threshold > 0.0) || threshold > 1.0)
        throw ConfigError("dedup threshold must be in (0, 1]");

    const std::size_t n = corpus.size();
    std::vector<ShingleSet> sets(n);
    for (std::size_t i = 0; i < n; ++i) sets[i] = shingle(corpus[i].lyrics, corpus[i].song_id);

    std::unordered_map<std::string, std::vector<std::uint32_t>> index;
    for (std::size_t i = 0; i < n; ++i)
        for (const auto& sh : sets[i].shingles) index[sh].push_back(static_cast<std::uint32_t>(i));
    // (index iteration order does not matter: pair evaluation is symmetric
    // and component assembly commutes)

    detail::UnionFind uf(n);
    std::unordered_set<std::uint64_t> seen_pairs;
    for (const auto& [sh, posting] : index) {
        if (posting.size() < 2) continue;
        for (std::size_t a = 0; a < posting.size(); ++a) {
            for (std::size_t b = a + 1; b < posting.size(); ++b) {
                const std::uint32_t i = std::min(posting[a], posting[b]);
                const std::uint32_t j = std::max(posting[a], posting[b]);
                const std::uint64_t key = (static_cast<std::uint64_t>(i) << 32) | j;
                if (!seen_pairs.insert(key).second) continue;
                if (jaccard(sets[i], sets[j]) > threshold) uf.unite(i, j);
            }
        }
    }

    std::unordered_map<std::size_t, std::vector<std::size_t>> components;
    for (std::size_t i = 0; i < n; ++i) components[uf.find(i)].push_back(i);

    DedupResult out;
    std::vector<std::string> retained_ids;
    for (auto& [root, members] : components) {
        if (members.size() == 1) {
            retained_ids.push_back(corpus[members[0]].song_id);
            continue;
        }
        std::size_t canonical = members[0];
        for (std::size_t m : members) {
            const auto& c = corpus[canonical];
            const auto& r = corpus[m];
            if (r.year < c.year || (r.year == c.year && r.song_id < c.song_id)) canonical = m;
        }
        DuplicateCluster cl;
        cl.canonical_id = corpus[canonical].song_id;
        double min_sim = 1.0;
        for (std::size_t a = 0; a < members.size(); ++a) {
            cl.member_ids.push_back(corpus[members[a]].song_id);
            for (std::size_t b = a + 1; b < members.size(); ++b)
                min_sim = std::min(min_sim, jaccard(sets[members[a]], sets[members[b]]));
        }
        cl.min_pairwise_similarity = min_sim;
        std::sort(cl.member_ids.begin(), cl.member_ids.end());
        for (std::size_t m : members) {
            if (m == canonical) continue;
            if (corpus[m].artist_id != corpus[canonical].artist_id)
                cl.cover_ids.push_back(corpus[m].song_id);
            else
                out.dropped_ids.push_back(corpus[m].song_id);
        }
        std::sort(cl.cover_ids.begin(), cl.cover_ids.end());
        retained_ids.push_back(cl.canonical_id);
        retained_ids.insert(retained_ids.end(), cl.cover_ids.begin(), cl.cover_ids.end());
        out.clusters.push_back(std::move(cl));
    }

    std::sort(out.clusters.begin(), out.clusters.end(),
              [](const DuplicateCluster& a, const DuplicateCluster& b) {
                  return a.canonical_id < b.canonical_id;
              });
    std::sort(out.dropped_ids.begin(), out.dropped_ids.end());
    std::sort(retained_ids.begin(), retained_ids.end());

    std::unordered_set<std::string> keep(retained_ids.begin(), retained_ids.end());
    for (const auto& r : corpus)
        if (keep.count(r.song_id)) out.retained.push_back(r);
    std::sort(out.retained.begin(), out.retained.end(),
              [](const SongRecord& a, const SongRecord& b) { return a.song_id < b.song_id; });
    return out;
}

}  // namespace songbias
