#pragma once

#include <algorithm>
#include <istream>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "songbias/errors.hpp"
#include "songbias/records.hpp"
#include "songbias/text.hpp"

namespace songbias {

enum class ChartSource { billboard_hot100, billboard_top10, gold_labels };

inline const char* to_string(ChartSource s) {
    switch (s) {
        case ChartSource::billboard_hot100: return "billboard_hot100";
        case ChartSource::billboard_top10: return "billboard_top10";
        default: return "gold_labels";
    }
}

inline ChartSource chart_source_from_string(const std::string& s) {
    if (s == "billboard_hot100") return ChartSource::billboard_hot100;
    if (s == "billboard_top10") return ChartSource::billboard_top10;
    if (s == "gold_labels") return ChartSource::gold_labels;
    throw DataError("invalid chart source: " + s);
}

struct ChartEntry {
    ChartSource source = ChartSource::billboard_hot100;
    std::string artist_name;
    std::string title;
    std::string week_or_year;  // empty when absent
    std::string payload;       // e.g. the gold sexist label
};

enum class MatchMethod { exact, fuzzy, unmatched };

inline const char* to_string(MatchMethod m) {
    switch (m) {
        case MatchMethod::exact: return "exact";
        case MatchMethod::fuzzy: return "fuzzy";
        default: return "unmatched";
    }
}

struct MatchResult {
    ChartEntry entry;
    std::optional<std::string> matched_song_id;
    double score = 0.0;  // 1 for exact; min(artist_sim, title_sim) for fuzzy
    MatchMethod method = MatchMethod::unmatched;
};

// Name normalization for record linkage. Rule order: drop (...)/[...]
// segments, fold diacritics, lowercase, drop remaining punctuation, collapse
// whitespace, strip leading "the " until none remains. Idempotent.
inline std::string normalize_name(std::string_view name) {
    // parenthetical removal (nesting tracked, both bracket kinds)
    std::string unparen;
    int depth = 0;
    std::size_t pos = 0;
    while (pos < name.size()) {
        const char32_t cp = text::decode_utf8(name, pos);
        if (cp == U'(' || cp == U'[') { ++depth; continue; }
        if (cp == U')' || cp == U']') { if (depth > 0) --depth; continue; }
        if (depth == 0) text::append_utf8(unparen, cp);
    }

    // fold + lowercase + strip punctuation, keeping spaces
    std::string flat;
    pos = 0;
    while (pos < unparen.size()) {
        const char32_t cp = text::decode_utf8(unparen, pos);
        if (text::is_space(cp)) {
            flat.push_back(' ');
        } else if (text::is_ascii_alnum(cp)) {
            flat.push_back(static_cast<char>(text::ascii_lower(cp)));
        } else if (const char* fold = text::fold_diacritic(cp)) {
            flat += fold;
        }
        // anything else is punctuation or an unmapped symbol: dropped
    }

    // collapse whitespace
    std::string collapsed;
    bool prev_space = true;  // also trims leading spaces
    for (char c : flat) {
        if (c == ' ') {
            if (!prev_space) collapsed.push_back(' ');
            prev_space = true;
        } else {
            collapsed.push_back(c);
            prev_space = false;
        }
    }
    while (!collapsed.empty() && collapsed.back() == ' ') collapsed.pop_back();

    while (collapsed.rfind("the ", 0) == 0) collapsed.erase(0, 4);
    return collapsed;
}

inline std::size_t levenshtein(std::string_view a, std::string_view b) {
    if (a.size() > b.size()) std::swap(a, b);
    std::vector<std::size_t> row(a.size() + 1);
    std::iota(row.begin(), row.end(), std::size_t{0});
    for (std::size_t j = 1; j <= b.size(); ++j) {
        std::size_t diag = row[0];
        row[0] = j;
        for (std::size_t i = 1; i <= a.size(); ++i) {
            const std::size_t cost = (a[i - 1] == b[j - 1]) ? 0 : 1;
            const std::size_t next = std::min({row[i] + 1, row[i - 1] + 1, diag + cost});
            diag = row[i];
            row[i] = next;
        }
    }
    return row[a.size()];
}

// 1 - d/max(len) on already-normalized strings; two empty strings are equal.
inline double name_similarity(std::string_view a, std::string_view b) {
    const std::size_t m = std::max(a.size(), b.size());
    if (m == 0) return 1.0;
    return 1.0 - static_cast<double>(levenshtein(a, b)) / static_cast<double>(m);
}

struct MatchConfig {
    double artist_threshold = 0.90;
    double title_threshold = 0.85;
};

// Read-only corpus index keyed by normalized artist name.
class CorpusIndex {
public:
    explicit CorpusIndex(const Corpus& corpus) : corpus_(&corpus) {
        for (std::size_t i = 0; i < corpus.size(); ++i) {
            by_artist_[normalize_name(corpus[i].artist_name)].push_back(i);
            titles_.push_back(normalize_name(corpus[i].title));
        }
    }

    const Corpus& corpus() const { return *corpus_; }
    const std::string& norm_title(std::size_t i) const { return titles_[i]; }
    const std::map<std::string, std::vector<std::size_t>>& by_artist() const { return by_artist_; }

private:
    const Corpus* corpus_;
    std::map<std::string, std::vector<std::size_t>> by_artist_;
    std::vector<std::string> titles_;
};

// Two-stage linkage: artist first (exact normalized equality, else edit
// similarity >= artist_threshold), then title among the candidate artists'
// songs. Ties break toward the earliest year, then smallest song_id.
inline MatchResult match_one(const ChartEntry& entry, const CorpusIndex& index,
                             const MatchConfig& cfg = {}) {
    MatchResult res;
    res.entry = entry;
    const std::string na = normalize_name(entry.artist_name);
    const std::string nt = normalize_name(entry.title);

    std::vector<std::size_t> candidates;
    double artist_sim = 0.0;
    bool artist_exact = false;
    auto it = index.by_artist().find(na);
    if (it != index.by_artist().end()) {
        candidates = it->second;
        artist_sim = 1.0;
        artist_exact = true;
    } else {
        double best = 0.0;
        for (const auto& [name, idxs] : index.by_artist()) {
            const double sim = name_similarity(na, name);
            if (sim > best) {
                best = sim;
                candidates = idxs;
            } else if (sim == best && sim > 0.0) {
                candidates.insert(candidates.end(), idxs.begin(), idxs.end());
            }
        }
        if (best < cfg.artist_threshold) return res;  // unmatched
        artist_sim = best;
    }

    const Corpus& corpus = index.corpus();
    bool title_exact = false;
    double best_title = 0.0;
    std::size_t best_idx = corpus.size();
    auto better = [&](std::size_t a, std::size_t b) {  // a beats b on tie rules
        if (corpus[a].year != corpus[b].year) return corpus[a].year < corpus[b].year;
        return corpus[a].song_id < corpus[b].song_id;
    };
    for (std::size_t i : candidates) {
        const bool exact = (index.norm_title(i) == nt);
        const double sim = exact ? 1.0 : name_similarity(nt, index.norm_title(i));
        if (exact && !title_exact) {
            title_exact = true;
            best_title = 1.0;
            best_idx = i;
        } else if (exact == title_exact) {
            if (sim > best_title) {
                best_title = sim;
                best_idx = i;
            } else if (sim == best_title && best_idx < corpus.size() && better(i, best_idx)) {
                best_idx = i;
            }
        }
    }
    if (best_idx == corpus.size()) return res;
    if (!title_exact && best_title < cfg.title_threshold) return res;

    res.matched_song_id = corpus[best_idx].song_id;
    if (artist_exact && title_exact) {
        res.method = MatchMethod::exact;
        res.score = 1.0;
    } else {
        res.method = MatchMethod::fuzzy;
        res.score = std::min(artist_sim, title_exact ? 1.0 : best_title);
    }
    return res;
}

inline std::vector<MatchResult> match_records(const std::vector<ChartEntry>& entries,
                                              const Corpus& corpus, const MatchConfig& cfg = {}) {
    CorpusIndex index(corpus);
    std::vector<MatchResult> out;
    out.reserve(entries.size());
    for (const auto& e : entries) out.push_back(match_one(e, index, cfg));
    return out;
}

// Chart input: TSV with header "source artist title date payload".
inline std::vector<ChartEntry> load_chart_entries(std::istream& in, const std::string& what) {
    std::vector<ChartEntry> out;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (n == 1 || line.empty() || line[0] == '#') continue;  // header / comments
        std::vector<std::string> cols;
        std::size_t start = 0;
        for (std::size_t i = 0; i <= line.size(); ++i) {
            if (i == line.size() || line[i] == '\t') {
                cols.push_back(line.substr(start, i - start));
                start = i + 1;
            }
        }
        if (cols.size() < 3)
            throw DataError(what + " line " + std::to_string(n) + ": expected >=3 tab-separated columns");
        ChartEntry e;
        e.source = chart_source_from_string(cols[0]);
        e.artist_name = cols[1];
        e.title = cols[2];
        if (e.artist_name.empty() || e.title.empty())
            throw DataError(what + " line " + std::to_string(n) + ": empty artist or title");
        if (cols.size() > 3) e.week_or_year = cols[3];
        if (cols.size() > 4) e.payload = cols[4];
        out.push_back(std::move(e));
    }
    return out;
}

}  // namespace songbias
