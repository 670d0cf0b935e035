#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "songbias/errors.hpp"
#include "songbias/text.hpp"

namespace songbias {

// A window of up to four consecutive non-empty lyric lines, stride two.
struct LineBatch {
    std::string song_id;
    int batch_index = 0;
    std::vector<std::string> lines;  // 2-4 lines
    std::string text;                // lines joined by newline
};

struct BatchScore {
    std::string song_id;
    int batch_index = 0;
    double prob = 0.0;
    std::string scorer_id;
};

struct LabelConfig {
    double threshold = 0.725;
    int n_b = 1;

    void validate() const {
        if (threshold < 0.0 || threshold > 1.0) throw ConfigError("threshold outside [0,1]");
        if (n_b < 1) throw ConfigError("n_b < 1");
    }
};

// Windows start at line offsets 0, 2, 4, ...; a lyric with L >= 4 non-empty
// lines yields ceil((L-2)/2) batches, the last one taking the remaining 2-3
// lines when L is not a multiple of the stride.
inline std::vector<LineBatch> make_batches(const std::string& song_id, const std::string& lyrics) {
    const auto lines = text::non_empty_lines(lyrics);
    const std::size_t L = lines.size();
    if (L < 4) throw DataError("too_short: song " + song_id + " has " + std::to_string(L) +
                               " non-empty lines");
    std::vector<LineBatch> out;
    for (std::size_t start = 0; start == 0 || start + 2 < L; start += 2) {
        LineBatch b;
        b.song_id = song_id;
        b.batch_index = static_cast<int>(out.size());
        const std::size_t end = std::min(start + 4, L);
        for (std::size_t i = start; i < end; ++i) {
            b.lines.emplace_back(lines[i]);
            if (!b.text.empty()) b.text.push_back('\n');
            b.text += lines[i];
        }
        out.push_back(std::move(b));
    }
    return out;
}

// ---- scorers ----------------------------------------------------------------

class BatchScorer {
public:
    virtual ~BatchScorer() = default;
    virtual double score(const LineBatch& batch) const = 0;
    virtual std::string id() const = 0;
};

// Deterministic term-weight scorer: logistic squashing of the summed weights
// of matched tokens plus a bias. Each token occurrence contributes once.
class LexiconScorer : public BatchScorer {
public:
    LexiconScorer(std::unordered_map<std::string, double> weights, double bias)
        : weights_(std::move(weights)), bias_(bias) {}

    // TSV lines "term<TAB>weight"; the reserved term __bias__ sets the bias.
    static LexiconScorer load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw MissingArtifactError("cannot open lexicon: " + path);
        std::unordered_map<std::string, double> weights;
        double bias = 0.0;
        std::string line;
        std::size_t n = 0;
        while (std::getline(in, line)) {
            ++n;
            if (line.empty() || line[0] == '#') continue;
            const auto tab = line.find('\t');
            if (tab == std::string::npos)
                throw ConfigError("lexicon line " + std::to_string(n) + ": expected term<TAB>weight");
            const std::string term = text::to_lower_ascii(text::trim(line.substr(0, tab)));
            double w;
            try {
                w = std::stod(line.substr(tab + 1));
            } catch (const std::exception&) {
                throw ConfigError("lexicon line " + std::to_string(n) + ": bad weight");
            }
            if (!std::isfinite(w))
                throw ConfigError("lexicon line " + std::to_string(n) + ": non-finite weight");
            if (term == "__bias__") bias = w;
            else weights[term] = w;
        }
        return LexiconScorer(std::move(weights), bias);
    }

    double score(const LineBatch& batch) const override {
        double sum = bias_;
        for (const auto& tok : text::word_tokens(batch.text)) {
            auto it = weights_.find(tok);
            if (it != weights_.end()) sum += it->second;
        }
        return 1.0 / (1.0 + std::exp(-sum));
    }

    std::string id() const override { return "lexicon"; }

private:
    std::unordered_map<std::string, double> weights_;
    double bias_;
};

// Pre-computed scores keyed by (song_id, batch_index).
class ExternalScorer : public BatchScorer {
public:
    explicit ExternalScorer(std::map<std::pair<std::string, int>, double> scores)
        : scores_(std::move(scores)) {}

    // TSV lines "song_id<TAB>batch_index<TAB>prob" (no header).
    static ExternalScorer load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw MissingArtifactError("cannot open external scores: " + path);
        std::map<std::pair<std::string, int>, double> scores;
        std::string line;
        std::size_t n = 0;
        while (std::getline(in, line)) {
            ++n;
            if (line.empty() || line[0] == '#') continue;
            const auto t1 = line.find('\t');
            const auto t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
            if (t2 == std::string::npos)
                throw ConfigError("external scores line " + std::to_string(n) +
                                  ": expected song_id<TAB>batch_index<TAB>prob");
            const std::string id = line.substr(0, t1);
            int bi;
            double p;
            try {
                bi = std::stoi(line.substr(t1 + 1, t2 - t1 - 1));
                p = std::stod(line.substr(t2 + 1));
            } catch (const std::exception&) {
                throw ConfigError("external scores line " + std::to_string(n) + ": bad number");
            }
            if (!(p >= 0.0 && p <= 1.0))
                throw DataError("external score outside [0,1] for (" + id + ", " +
                                std::to_string(bi) + ")");
            scores[{id, bi}] = p;
        }
        return ExternalScorer(std::move(scores));
    }

    double score(const LineBatch& batch) const override {
        auto it = scores_.find({batch.song_id, batch.batch_index});
        if (it == scores_.end())
            throw DataError("missing external score for (" + batch.song_id + ", " +
                            std::to_string(batch.batch_index) + ")");
        return it->second;
    }

    std::string id() const override { return "external"; }

private:
    std::map<std::pair<std::string, int>, double> scores_;
};

inline std::vector<BatchScore> score_batches(const BatchScorer& scorer,
                                             const std::vector<LineBatch>& batches) {
    std::vector<BatchScore> out;
    out.reserve(batches.size());
    for (const auto& b : batches)
        out.push_back({b.song_id, b.batch_index, scorer.score(b), scorer.id()});
    return out;
}

// ---- labeling ---------------------------------------------------------------

struct SongLabel {
    bool sexist = false;
    int n_flagged = 0;
};

inline SongLabel label_song(const std::vector<double>& probs, const LabelConfig& cfg) {
    cfg.validate();
    SongLabel out;
    for (double p : probs)
        if (p > cfg.threshold) ++out.n_flagged;
    out.sexist = out.n_flagged >= cfg.n_b;
    return out;
}

// Scalar song score whose thresholding reproduces label_song: the n_b-th
// largest batch probability (0 when the song has fewer than n_b batches).
inline double song_score(std::vector<double> probs, int n_b) {
    if (static_cast<int>(probs.size()) < n_b) return 0.0;
    std::nth_element(probs.begin(), probs.begin() + (n_b - 1), probs.end(),
                     std::greater<double>());
    return probs[static_cast<std::size_t>(n_b - 1)];
}

// ---- evaluation -------------------------------------------------------------

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

struct RocPoint {
    double fpr = 0.0;
    double tpr = 0.0;
    double threshold = 0.0;
};

struct EvalReport {
    ClassMetrics sexist;
    ClassMetrics non_sexist;
    ClassMetrics macro;  // unweighted mean of the two classes
    long long tp = 0, fp = 0, fn = 0, tn = 0;
    std::vector<RocPoint> roc;
    std::optional<double> auc;
};

namespace detail {

inline double safe_div(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

inline ClassMetrics metrics_from_counts(long long tp, long long fp, long long fn) {
    ClassMetrics m;
    m.precision = safe_div(static_cast<double>(tp), static_cast<double>(tp + fp));
    m.recall = safe_div(static_cast<double>(tp), static_cast<double>(tp + fn));
    m.f1 = safe_div(2.0 * m.precision * m.recall, m.precision + m.recall);
    return m;
}

}  // namespace detail

// Confusion-derived metrics from hard labels. Both maps must carry the same
// id set.
inline EvalReport evaluate_labels(const std::map<std::string, bool>& predicted,
                                  const std::map<std::string, bool>& gold) {
    if (predicted.size() != gold.size()) throw DataError("prediction/gold id mismatch");
    EvalReport r;
    for (const auto& [id, g] : gold) {
        auto it = predicted.find(id);
        if (it == predicted.end()) throw DataError("prediction missing for id: " + id);
        const bool p = it->second;
        if (p && g) ++r.tp;
        else if (p && !g) ++r.fp;
        else if (!p && g) ++r.fn;
        else ++r.tn;
    }
    r.sexist = detail::metrics_from_counts(r.tp, r.fp, r.fn);
    r.non_sexist = detail::metrics_from_counts(r.tn, r.fn, r.fp);
    r.macro.precision = 0.5 * (r.sexist.precision + r.non_sexist.precision);
    r.macro.recall = 0.5 * (r.sexist.recall + r.non_sexist.recall);
    r.macro.f1 = 0.5 * (r.sexist.f1 + r.non_sexist.f1);
    return r;
}

// Full evaluation from song-level scores: headline confusion at `threshold`
// (prediction is score > threshold) plus a ROC swept over the distinct scores
// and AUC by the trapezoid rule.
inline EvalReport evaluate(const std::map<std::string, double>& scores,
                           const std::map<std::string, bool>& gold, double threshold) {
    if (scores.size() != gold.size()) throw DataError("prediction/gold id mismatch");
    std::map<std::string, bool> pred;
    for (const auto& [id, sc] : scores) {
        if (!gold.count(id)) throw DataError("gold missing for id: " + id);
        pred[id] = sc > threshold;
    }
    EvalReport r = evaluate_labels(pred, gold);

    long long pos = r.tp + r.fn, neg = r.fp + r.tn;
    if (pos == 0 || neg == 0) return r;  // single-class gold: no ROC, AUC absent

    std::set<double> distinct;
    for (const auto& [id, sc] : scores) distinct.insert(sc);
    std::vector<double> cuts(distinct.rbegin(), distinct.rend());  // descending

    for (double t : cuts) {
        long long tp = 0, fp = 0;
        for (const auto& [id, sc] : scores) {
            if (sc > t) (gold.at(id) ? tp : fp)++;
        }
        r.roc.push_back({static_cast<double>(fp) / static_cast<double>(neg),
                         static_cast<double>(tp) / static_cast<double>(pos), t});
    }
    // everything predicted positive below the smallest score
    r.roc.push_back({1.0, 1.0, -std::numeric_limits<double>::infinity()});

    double auc = 0.0;
    double px = 0.0, py = 0.0;
    for (const auto& pt : r.roc) {
        auc += (pt.fpr - px) * (pt.tpr + py) / 2.0;
        px = pt.fpr;
        py = pt.tpr;
    }
    r.auc = auc;
    return r;
}

// ---- threshold sweep ----------------------------------------------------------

struct SweepRow {
    double threshold = 0.0;
    EvalReport report;
};

struct SweepResult {
    std::vector<SweepRow> rows;             // in the order thresholds were given
    double best_macro_f1_threshold = 0.0;   // argmax macro F1, ties to lower threshold
    double best_sexist_f1_threshold = 0.0;  // argmax sexist-class F1, ties to lower
};

inline SweepResult sweep_thresholds(const std::map<std::string, std::vector<double>>& batch_probs,
                                    const std::map<std::string, bool>& gold,
                                    const std::vector<double>& thresholds, int n_b = 1) {
    if (thresholds.empty()) throw ConfigError("empty threshold list");
    std::map<std::string, double> scores;
    for (const auto& [id, probs] : batch_probs) scores[id] = song_score(probs, n_b);

    SweepResult out;
    double best_macro = -1.0, best_macro_t = 0.0;
    double best_sexist = -1.0, best_sexist_t = 0.0;
    for (double t : thresholds) {
        SweepRow row;
        row.threshold = t;
        row.report = evaluate(scores, gold, t);
        const double mf1 = row.report.macro.f1;
        const double sf1 = row.report.sexist.f1;
        if (mf1 > best_macro || (mf1 == best_macro && t < best_macro_t)) {
            best_macro = mf1;
            best_macro_t = t;
        }
        if (sf1 > best_sexist || (sf1 == best_sexist && t < best_sexist_t)) {
            best_sexist = sf1;
            best_sexist_t = t;
        }
        out.rows.push_back(std::move(row));
    }
    out.best_macro_f1_threshold = best_macro_t;
    out.best_sexist_f1_threshold = best_sexist_t;
    return out;
}

}  // namespace songbias
