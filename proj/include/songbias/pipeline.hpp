#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "songbias/analytics.hpp"
#include "songbias/assoc.hpp"
#include "songbias/config.hpp"
#include "songbias/corpus.hpp"
#include "songbias/dedup.hpp"
#include "songbias/embeddings.hpp"
#include "songbias/matching.hpp"
#include "songbias/records.hpp"
#include "songbias/sexism.hpp"

namespace songbias {

namespace fs = std::filesystem;

// Fixed artifact layout inside the run directory. Stages read only
// prior-stage artifacts and regenerate their own outputs byte-identically for
// identical inputs and seeds.
struct ArtifactPaths {
    fs::path out;

    fs::path accepted() const { return out / "corpus.accepted.jsonl"; }
    fs::path rejections() const { return out / "rejections.tsv"; }
    fs::path dedup_corpus() const { return out / "corpus.dedup.jsonl"; }
    fs::path dedup_clusters() const { return out / "dedup_clusters.tsv"; }
    fs::path matches() const { return out / "matches.tsv"; }
    fs::path match_summary() const { return out / "match_summary.tsv"; }
    fs::path embeddings_dir() const { return out / "embeddings"; }
    fs::path embedding(PartitionName p, int seed) const {
        return embeddings_dir() / (std::string(to_string(p)) + ".seed" + std::to_string(seed) + ".vec");
    }
    fs::path freq_table(PartitionName p) const {
        return embeddings_dir() / (std::string(to_string(p)) + ".freq.tsv");
    }
    fs::path assoc_results() const { return out / "assoc_results.jsonl"; }
    fs::path assoc_table() const { return out / "assoc_table.txt"; }
    fs::path batch_scores() const { return out / "batch_scores.tsv"; }
    fs::path song_labels() const { return out / "song_labels.tsv"; }
    fs::path eval_report() const { return out / "eval_report.json"; }
    fs::path roc_csv() const { return out / "roc.csv"; }
    fs::path sweep_table() const { return out / "sweep.tsv"; }
    fs::path analytics_dir() const { return out / "analytics"; }
    fs::path report_dir() const { return out / "report"; }
};

inline ArtifactPaths artifacts(const ProjectConfig& cfg) { return ArtifactPaths{cfg.out_dir}; }

// ---- shared artifact io -------------------------------------------------------

inline std::vector<std::string> read_lines(const fs::path& path, const char* what) {
    std::ifstream in(path);
    if (!in) throw MissingArtifactError(std::string(what) + " not found: " + path.string());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

inline Corpus load_corpus_artifact(const fs::path& path, const char* what) {
    Corpus corpus;
    for (const auto& line : read_lines(path, what)) {
        if (line.empty()) continue;
        try {
            corpus.push_back(parse_song_record(line));
        } catch (const Error& e) {
            throw DataError(std::string(what) + " is corrupt: " + e.what());
        }
    }
    return corpus;
}

inline void write_corpus_artifact(const Corpus& corpus, const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    for (const auto& r : corpus) out << song_record_to_json(r).dump() << '\n';
}

inline std::string fmt(double x, const char* spec = "%.6f") {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, x);
    return buf;
}

// ---- ingest -------------------------------------------------------------------

struct IngestStats {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
};

inline IngestStats run_ingest(const ProjectConfig& cfg) {
    const auto genre_map = GenreMap::load(cfg.genre_map_path.string());
    std::vector<RawRecord> raw;
    std::size_t line_no = 0;
    for (const auto& line : read_lines(cfg.corpus_path, "corpus input")) {
        ++line_no;
        if (line.empty()) continue;
        raw.push_back(make_raw(line, line_no));
    }
    auto result = filter_songs(raw, cfg.filter);
    for (auto& rec : result.accepted)
        if (!rec.genre_top) rec.genre_top = map_genre(rec.genre_raw, genre_map);

    const auto paths = artifacts(cfg);
    fs::create_directories(paths.out);
    write_corpus_artifact(result.accepted, paths.accepted());
    {
        std::ofstream rej(paths.rejections());
        rej << "song_id\treason\tdetail\n";
        for (const auto& r : result.rejected)
            rej << r.song_id << '\t' << to_string(r.reason) << '\t' << r.detail << '\n';
    }
    return {result.accepted.size(), result.rejected.size()};
}

// ---- dedup --------------------------------------------------------------------

struct DedupStats {
    std::size_t retained = 0;
    std::size_t dropped = 0;
    std::size_t covers = 0;
    std::size_t clusters = 0;
};

inline DedupStats run_dedup(const ProjectConfig& cfg) {
    const auto paths = artifacts(cfg);
    const Corpus corpus = load_corpus_artifact(paths.accepted(), "accepted corpus");
    const auto result = cluster_duplicates(corpus, cfg.dedup_threshold);
    write_corpus_artifact(result.retained, paths.dedup_corpus());
    std::size_t covers = 0;
    {
        std::ofstream out(paths.dedup_clusters());
        out << "canonical_id\tmember_ids\tcover_ids\tmin_pairwise_similarity\n";
        for (const auto& c : result.clusters) {
            out << c.canonical_id << '\t';
            for (std::size_t i = 0; i < c.member_ids.size(); ++i)
                out << (i ? "," : "") << c.member_ids[i];
            out << '\t';
            for (std::size_t i = 0; i < c.cover_ids.size(); ++i)
                out << (i ? "," : "") << c.cover_ids[i];
            covers += c.cover_ids.size();
            out << '\t' << fmt(c.min_pairwise_similarity, "%.4f") << '\n';
        }
    }
    return {result.retained.size(), result.dropped_ids.size(), covers, result.clusters.size()};
}

// ---- match --------------------------------------------------------------------

struct MatchStats {
    std::size_t entries = 0;
    std::size_t matched = 0;
};

inline MatchStats run_match(const ProjectConfig& cfg) {
    const auto paths = artifacts(cfg);
    const Corpus corpus = load_corpus_artifact(paths.dedup_corpus(), "deduplicated corpus");

    std::vector<ChartEntry> entries;
    auto load_file = [&](const fs::path& p) {
        std::ifstream in(p);
        if (!in) throw MissingArtifactError("chart file not found: " + p.string());
        auto batch = load_chart_entries(in, p.filename().string());
        entries.insert(entries.end(), batch.begin(), batch.end());
    };
    for (const auto& p : cfg.chart_paths) load_file(p);
    for (const auto& p : cfg.gold_paths) load_file(p);

    const auto results = match_records(entries, corpus, cfg.match);

    std::map<std::string, std::pair<std::size_t, std::size_t>> per_source;  // matched/total
    std::size_t matched = 0;
    {
        std::ofstream out(paths.matches());
        out << "source\tartist\ttitle\tdate\tpayload\tmatched_song_id\tscore\tmethod\n";
        for (const auto& r : results) {
            auto& [m, t] = per_source[to_string(r.entry.source)];
            ++t;
            if (r.method != MatchMethod::unmatched) {
                ++m;
                ++matched;
            }
            out << to_string(r.entry.source) << '\t' << r.entry.artist_name << '\t'
                << r.entry.title << '\t' << r.entry.week_or_year << '\t' << r.entry.payload << '\t'
                << (r.matched_song_id ? *r.matched_song_id : "") << '\t' << fmt(r.score, "%.4f")
                << '\t' << to_string(r.method) << '\n';
        }
    }
    {
        std::ofstream out(paths.match_summary());
        out << "source\tentries\tmatched\trate\n";
        for (const auto& [src, mt] : per_source)
            out << src << '\t' << mt.second << '\t' << mt.first << '\t'
                << fmt(mt.second ? static_cast<double>(mt.first) / mt.second : 0.0, "%.4f") << '\n';
    }
    return {results.size(), matched};
}

// ---- train-embed --------------------------------------------------------------

struct TrainStats {
    std::size_t spaces_trained = 0;
};

inline TrainStats run_train_embed(const ProjectConfig& cfg,
                                  std::optional<PartitionName> only_partition = std::nullopt,
                                  std::optional<int> only_seed = std::nullopt) {
    const auto paths = artifacts(cfg);
    const Corpus corpus = load_corpus_artifact(paths.dedup_corpus(), "deduplicated corpus");
    fs::create_directories(paths.embeddings_dir());

    TrainStats stats;
    for (const auto& part : partition_corpora(corpus)) {
        if (only_partition && part.name != *only_partition) continue;
        const std::string text = partition_text(corpus, part);
        if (text.empty()) throw DataError(std::string("empty partition: ") + to_string(part.name));
        const auto vocab = build_vocab(text, cfg.train.min_count);
        save_freq_table(vocab.full_freq, paths.freq_table(part.name).string());
        for (int seed : cfg.seeds) {
            if (only_seed && seed != *only_seed) continue;
            TrainConfig tc = cfg.train;
            tc.seed = seed;
            tc.workers = cfg.threads;
            const auto space = train(text, tc, to_string(part.name));
            save_embeddings(space, paths.embedding(part.name, seed).string());
            ++stats.spaces_trained;
        }
    }
    return stats;
}

// ---- assoc --------------------------------------------------------------------

struct BatteryRow {
    std::string a, b, x, y;  // word-set names
};

inline std::vector<BatteryRow> load_battery(const fs::path& path) {
    std::vector<BatteryRow> rows;
    std::size_t n = 0;
    for (const auto& line : read_lines(path, "battery")) {
        ++n;
        if (n == 1 || line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        BatteryRow row;
        if (!(ls >> row.a >> row.b >> row.x >> row.y))
            throw ConfigError("battery line " + std::to_string(n) + ": expected A B X Y");
        rows.push_back(row);
    }
    if (rows.empty()) throw ConfigError("battery has no test rows: " + path.string());
    return rows;
}

inline nlohmann::json assoc_result_to_json(const AssociationResult& r) {
    nlohmann::json j;
    j["test"] = to_string(r.test);
    j["sets"] = r.sets;
    j["corpus"] = r.corpus;
    j["seed"] = r.seed;
    j["effect_or_score"] = r.effect_or_score;
    j["statistic"] = r.statistic;
    j["p_value"] = r.p_value;
    j["smoothed_p"] = r.smoothed_p;
    j["directional_p"] = r.directional_p;
    j["n_permutations_used"] = r.n_permutations_used;
    j["exact_enumeration"] = r.exact_enumeration;
    return j;
}

namespace pipeline_detail {

inline std::string stars(bool sig10, bool sig05) { return sig05 ? "**" : (sig10 ? "*" : ""); }

inline std::string stars_for_p(double p) { return stars(p < 0.10, p < 0.05); }

// table stars follow the direction of the observed score, so negative
// associations can mark significance too; all five seeds must clear the level
inline std::string directional_stars(const MultiSeedResult& m) {
    bool s10 = true, s05 = true;
    for (const auto& r : m.per_seed) {
        s10 = s10 && r.directional_p < 0.10;
        s05 = s05 && r.directional_p < 0.05;
    }
    return stars(s10, s05);
}

inline std::string cell(const MultiSeedResult& m) {
    return fmt(m.reported.effect_or_score, "%.2f") + directional_stars(m);
}

inline std::uint64_t perm_seed(std::uint64_t base, const std::string& tag, int seed) {
    std::uint64_t h = base ^ 0x9E3779B97F4A7C15ULL;
    for (unsigned char c : tag) h = (h ^ c) * 0x100000001B3ULL;
    return h ^ (static_cast<std::uint64_t>(seed + 1) * 0x2545F4914F6CDD1DULL);
}

}  // namespace pipeline_detail

struct AssocStats {
    std::size_t battery_rows = 0;
    std::size_t results = 0;
};

// Runs the full battery over the three partitions and five seeds, plus the
// cross-corpus comparison (male vs female) per target set, and aggregates
// seed results into the final significance marking.
inline AssocStats run_assoc(const ProjectConfig& cfg) {
    const auto paths = artifacts(cfg);
    const auto battery = load_battery(cfg.battery_path);

    const std::vector<PartitionName> parts = {PartitionName::all_solo, PartitionName::male_solo,
                                              PartitionName::female_solo};
    std::map<std::string, std::map<std::string, long long>> freqs;
    for (auto p : parts) freqs[to_string(p)] = load_freq_table(paths.freq_table(p).string());
    const FreqTables freq_ptrs = {&freqs.at("all_solo"), &freqs.at("male_solo"),
                                  &freqs.at("female_solo")};

    std::map<std::pair<std::string, int>, EmbeddingSpace> spaces;
    for (auto p : parts)
        for (int seed : cfg.seeds)
            spaces[{to_string(p), seed}] =
                load_embeddings_file(paths.embedding(p, seed).string());

    // word sets referenced by the battery, plus optional proper-name selection
    std::map<std::string, WordSet> word_sets;
    auto get_set = [&](const std::string& name) -> const WordSet& {
        auto it = word_sets.find(name);
        if (it != word_sets.end()) return it->second;
        const fs::path p = cfg.wordsets_dir / (name + ".txt");
        return word_sets.emplace(name, load_word_set(p.string(), name)).first->second;
    };
    auto load_candidates = [&](const std::string& rel) {
        std::vector<std::string> out;
        for (const auto& line : read_lines(cfg.resolve(rel), "name candidates")) {
            const std::string w = text::trim(line);
            if (!w.empty() && w[0] != '#') out.push_back(w);
        }
        return out;
    };
    if (cfg.assoc.male_name_candidates)
        word_sets["male_names"] = select_proper_names(
            load_candidates(*cfg.assoc.male_name_candidates), freq_ptrs, cfg.assoc.names_k,
            "male_names");
    if (cfg.assoc.female_name_candidates)
        word_sets["female_names"] = select_proper_names(
            load_candidates(*cfg.assoc.female_name_candidates), freq_ptrs, cfg.assoc.names_k,
            "female_names");

    std::ofstream results_out(paths.assoc_results());
    if (!results_out) throw DataError("cannot write assoc results");
    std::ostringstream table;
    table << "Association test battery over the three training corpora.\n"
          << "Stars mark the permutation tail in the direction of the observed score and\n"
          << "require every seed below the level: * p<0.10, ** p<0.05.\n"
          << "The seed0 column stars the reported (first-seed) run alone, scwX/scwY/weat.\n\n";
    char line[256];
    std::snprintf(line, sizeof line, "%-12s %-12s %-14s %-14s %-12s %10s %10s %10s  %s\n", "A", "B",
                  "X", "Y", "corpus", "SC-WEAT X", "SC-WEAT Y", "WEAT", "seed0");
    table << line;

    AssocStats stats;
    std::ostringstream sweat_block;
    sweat_block << "\nCross-corpus comparison (male_solo vs female_solo), per target set:\n";
    std::snprintf(line, sizeof line, "%-12s %-12s %-14s %10s %10s  %s\n", "A", "B", "W", "score",
                  "p(seed0)", "sig");
    sweat_block << line;

    for (const auto& row : battery) {
        const auto [A, B] = balance_word_sets(get_set(row.a), get_set(row.b), freq_ptrs,
                                              cfg.assoc.min_word_frequency);
        const auto [X, Y] = balance_word_sets(get_set(row.x), get_set(row.y), freq_ptrs,
                                              cfg.assoc.min_word_frequency);
        ++stats.battery_rows;

        for (auto part : parts) {
            const std::string corpus_name = to_string(part);
            std::vector<AssociationResult> weats, scx, scy;
            for (int seed : cfg.seeds) {
                const auto& space = spaces.at({corpus_name, seed});
                const std::string tag = row.a + row.b + row.x + row.y + corpus_name;
                weats.push_back(weat(X, Y, A, B, space, cfg.assoc.n_permutations,
                                     pipeline_detail::perm_seed(cfg.rng_seed, tag + "w", seed)));
                scx.push_back(sc_weat(X, A, B, space, cfg.assoc.n_permutations,
                                      pipeline_detail::perm_seed(cfg.rng_seed, tag + "x", seed)));
                scy.push_back(sc_weat(Y, A, B, space, cfg.assoc.n_permutations,
                                      pipeline_detail::perm_seed(cfg.rng_seed, tag + "y", seed)));
            }
            for (const auto* group : {&weats, &scx, &scy})
                for (const auto& r : *group) {
                    results_out << assoc_result_to_json(r).dump() << '\n';
                    ++stats.results;
                }
            const auto mw = aggregate_multiseed(weats);
            const auto mx = aggregate_multiseed(scx);
            const auto my = aggregate_multiseed(scy);
            const std::string seed0 =
                pipeline_detail::stars_for_p(mx.reported.directional_p) + "/" +
                pipeline_detail::stars_for_p(my.reported.directional_p) + "/" +
                pipeline_detail::stars_for_p(mw.reported.directional_p);
            std::snprintf(line, sizeof line, "%-12s %-12s %-14s %-14s %-12s %10s %10s %10s  %s\n",
                          row.a.c_str(), row.b.c_str(), row.x.c_str(), row.y.c_str(),
                          corpus_name.c_str(), pipeline_detail::cell(mx).c_str(),
                          pipeline_detail::cell(my).c_str(), pipeline_detail::cell(mw).c_str(),
                          seed0.empty() ? "-" : seed0.c_str());
            table << line;
        }

        for (const auto* W : {&X, &Y}) {
            std::vector<AssociationResult> sweats;
            for (int seed : cfg.seeds) {
                const auto& male = spaces.at({"male_solo", seed});
                const auto& female = spaces.at({"female_solo", seed});
                const std::string tag = row.a + row.b + W->name + "sweat";
                sweats.push_back(sweat(*W, A, B, male, female, cfg.assoc.n_permutations,
                                       pipeline_detail::perm_seed(cfg.rng_seed, tag, seed)));
            }
            for (const auto& r : sweats) {
                results_out << assoc_result_to_json(r).dump() << '\n';
                ++stats.results;
            }
            const auto ms = aggregate_multiseed(sweats);
            std::snprintf(line, sizeof line, "%-12s %-12s %-14s %10s %10s  %s\n", row.a.c_str(),
                          row.b.c_str(), W->name.c_str(),
                          fmt(ms.reported.effect_or_score, "%.2f").c_str(),
                          fmt(ms.reported.directional_p, "%.3f").c_str(),
                          pipeline_detail::directional_stars(ms).c_str());
            sweat_block << line;
        }
    }

    std::ofstream table_out(paths.assoc_table());
    table_out << table.str() << sweat_block.str();
    return stats;
}

// ---- score / label ------------------------------------------------------------

struct ScoreStats {
    std::size_t songs = 0;
    std::size_t batches = 0;
};

inline ScoreStats run_score(const ProjectConfig& cfg) {
    const auto paths = artifacts(cfg);
    const Corpus corpus = load_corpus_artifact(paths.dedup_corpus(), "deduplicated corpus");

    std::unique_ptr<BatchScorer> scorer;
    if (cfg.scorer == "lexicon")
        scorer = std::make_unique<LexiconScorer>(LexiconScorer::load(cfg.lexicon_path.string()));
    else
        scorer = std::make_unique<ExternalScorer>(
            ExternalScorer::load(cfg.external_scores_path->string()));

    ScoreStats stats;
    std::ofstream out(paths.batch_scores());
    out << "song_id\tbatch_index\tprob\tscorer_id\n";
    for (const auto& rec : corpus) {
        const auto batches = make_batches(rec.song_id, rec.lyrics);
        const auto scores = score_batches(*scorer, batches);
        for (const auto& s : scores)
            out << s.song_id << '\t' << s.batch_index << '\t' << fmt(s.prob, "%.17g") << '\t'
                << s.scorer_id << '\n';
        ++stats.songs;
        stats.batches += scores.size();
    }
    return stats;
}

inline std::map<std::string, std::vector<double>> load_batch_scores(const fs::path& path) {
    std::map<std::string, std::vector<double>> probs;
    std::size_t n = 0;
    for (const auto& line : read_lines(path, "batch scores")) {
        ++n;
        if (n == 1 || line.empty()) continue;
        std::istringstream ls(line);
        std::string id, scorer;
        int batch;
        double p;
        if (!(ls >> id >> batch >> p >> scorer)) throw DataError("bad batch score line: " + line);
        auto& v = probs[id];
        if (static_cast<int>(v.size()) != batch)
            throw DataError("batch indexes not dense for song " + id);
        v.push_back(p);
    }
    return probs;
}

struct LabelStats {
    std::size_t songs = 0;
    std::size_t sexist = 0;
};

inline LabelStats run_label(const ProjectConfig& cfg) {
    const auto paths = artifacts(cfg);
    const auto probs = load_batch_scores(paths.batch_scores());
    LabelStats stats;
    std::ofstream out(paths.song_labels());
    out << "song_id\tsexist\tn_flagged\tsong_score\n";
    for (const auto& [id, v] : probs) {
        const auto label = label_song(v, cfg.label);
        out << id << '\t' << (label.sexist ? 1 : 0) << '\t' << label.n_flagged << '\t'
            << fmt(song_score(v, cfg.label.n_b), "%.17g") << '\n';
        ++stats.songs;
        if (label.sexist) ++stats.sexist;
    }
    return stats;
}

// ---- evaluate / sweep -----------------------------------------------------------

struct MatchedRow {
    std::string source;
    std::string payload;
    std::string song_id;  // empty when unmatched
};

inline std::vector<MatchedRow> load_matches(const fs::path& path) {
    std::vector<MatchedRow> rows;
    std::size_t n = 0;
    for (const auto& line : read_lines(path, "matches")) {
        ++n;
        if (n == 1 || line.empty()) continue;
        std::vector<std::string> cols;
        std::size_t start = 0;
        for (std::size_t i = 0; i <= line.size(); ++i) {
            if (i == line.size() || line[i] == '\t') {
                cols.push_back(line.substr(start, i - start));
                start = i + 1;
            }
        }
        if (cols.size() < 8) throw DataError("bad matches row: " + line);
        rows.push_back({cols[0], cols[4], cols[5]});
    }
    return rows;
}

// Gold labels arrive as chart-format entries; only matched ones evaluate.
inline std::map<std::string, bool> gold_from_matches(const std::vector<MatchedRow>& rows,
                                                     std::size_t* unmatched = nullptr) {
    std::map<std::string, bool> gold;
    std::size_t skipped = 0;
    for (const auto& r : rows) {
        if (r.source != "gold_labels") continue;
        if (r.song_id.empty()) {
            ++skipped;
            continue;
        }
        const bool label = r.payload == "1" || r.payload == "true";
        auto [it, inserted] = gold.emplace(r.song_id, label);
        if (!inserted && it->second != label)
            throw DataError("conflicting gold labels for song " + r.song_id);
    }
    if (unmatched) *unmatched = skipped;
    return gold;
}

struct EvalStats {
    std::size_t gold_songs = 0;
    std::size_t gold_unmatched = 0;
    double macro_f1 = 0.0;
};

inline EvalStats run_evaluate(const ProjectConfig& cfg) {
    const auto paths = artifacts(cfg);
    const auto probs = load_batch_scores(paths.batch_scores());
    std::size_t unmatched = 0;
    const auto gold = gold_from_matches(load_matches(paths.matches()), &unmatched);
    if (gold.empty()) throw DataError("no matched gold labels to evaluate");

    std::map<std::string, double> scores;
    for (const auto& [id, g] : gold) {
        auto it = probs.find(id);
        if (it == probs.end()) throw DataError("no batch scores for gold song " + id);
        scores[id] = song_score(it->second, cfg.label.n_b);
    }
    const auto report = evaluate(scores, gold, cfg.label.threshold);

    nlohmann::json j;
    auto metrics = [](const ClassMetrics& m) {
        return nlohmann::json{{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}};
    };
    j["threshold"] = cfg.label.threshold;
    j["n_b"] = cfg.label.n_b;
    j["gold_songs"] = gold.size();
    j["gold_unmatched_entries"] = unmatched;
    j["confusion"] = {{"tp", report.tp}, {"fp", report.fp}, {"fn", report.fn}, {"tn", report.tn}};
    j["sexist"] = metrics(report.sexist);
    j["non_sexist"] = metrics(report.non_sexist);
    j["macro"] = metrics(report.macro);
    if (report.auc) j["auc"] = *report.auc;
    else j["auc"] = nullptr;
    {
        std::ofstream out(paths.eval_report());
        out << j.dump(2) << '\n';
    }
    {
        std::ofstream out(paths.roc_csv());
        out << "fpr,tpr,threshold\n";
        for (const auto& p : report.roc)
            out << fmt(p.fpr) << ',' << fmt(p.tpr) << ',' << fmt(p.threshold, "%.17g") << '\n';
    }
    return {gold.size(), unmatched, report.macro.f1};
}

struct SweepStats {
    double best_macro_f1_threshold = 0.0;
    double best_sexist_f1_threshold = 0.0;
};

inline SweepStats run_sweep(const ProjectConfig& cfg) {
    const auto paths = artifacts(cfg);
    const auto probs = load_batch_scores(paths.batch_scores());
    const auto gold = gold_from_matches(load_matches(paths.matches()));
    if (gold.empty()) throw DataError("no matched gold labels to sweep");

    std::map<std::string, std::vector<double>> gold_probs;
    for (const auto& [id, g] : gold) {
        auto it = probs.find(id);
        if (it == probs.end()) throw DataError("no batch scores for gold song " + id);
        gold_probs[id] = it->second;
    }
    const auto sweep = sweep_thresholds(gold_probs, gold, cfg.sweep_thresholds, cfg.label.n_b);

    std::ofstream out(paths.sweep_table());
    out << "threshold\tsexist_precision\tsexist_recall\tsexist_f1\tnon_sexist_precision\t"
           "non_sexist_recall\tnon_sexist_f1\tmacro_precision\tmacro_recall\tmacro_f1\n";
    for (const auto& row : sweep.rows) {
        const auto& r = row.report;
        out << fmt(row.threshold, "%.4f") << '\t' << fmt(r.sexist.precision) << '\t'
            << fmt(r.sexist.recall) << '\t' << fmt(r.sexist.f1) << '\t'
            << fmt(r.non_sexist.precision) << '\t' << fmt(r.non_sexist.recall) << '\t'
            << fmt(r.non_sexist.f1) << '\t' << fmt(r.macro.precision) << '\t'
            << fmt(r.macro.recall) << '\t' << fmt(r.macro.f1) << '\n';
    }
    out << "# best_macro_f1_threshold\t" << fmt(sweep.best_macro_f1_threshold, "%.4f") << '\n';
    out << "# best_sexist_f1_threshold\t" << fmt(sweep.best_sexist_f1_threshold, "%.4f") << '\n';
    return {sweep.best_macro_f1_threshold, sweep.best_sexist_f1_threshold};
}

// ---- analyze ------------------------------------------------------------------

struct AnalyzeStats {
    std::size_t series_rows = 0;
};

inline AnalyzeStats run_analyze(const ProjectConfig& cfg) {
    const auto paths = artifacts(cfg);
    const Corpus corpus = load_corpus_artifact(paths.dedup_corpus(), "deduplicated corpus");

    std::map<std::string, bool> labels;
    {
        std::size_t n = 0;
        for (const auto& line : read_lines(paths.song_labels(), "song labels")) {
            ++n;
            if (n == 1 || line.empty()) continue;
            std::istringstream ls(line);
            std::string id;
            int sexist, flagged;
            double score;
            if (!(ls >> id >> sexist >> flagged >> score))
                throw DataError("bad song label line: " + line);
            labels[id] = sexist != 0;
        }
    }

    std::map<std::string, std::vector<ChartSubset>> subsets;
    for (const auto& m : load_matches(paths.matches())) {
        if (m.song_id.empty()) continue;
        if (m.source == "billboard_hot100") subsets[m.song_id].push_back(ChartSubset::billboard);
        if (m.source == "billboard_top10") {
            subsets[m.song_id].push_back(ChartSubset::billboard);
            subsets[m.song_id].push_back(ChartSubset::billboard_top10);
        }
    }
    for (auto& [id, subs] : subsets) {  // weekly repeats: dedupe
        std::sort(subs.begin(), subs.end());
        subs.erase(std::unique(subs.begin(), subs.end()), subs.end());
    }

    fs::create_directories(paths.analytics_dir());
    AnalyzeStats stats;

    {  // counts per group (artists and songs)
        std::map<std::tuple<std::string, std::string, std::string>,
                 std::pair<std::set<std::string>, long long>>
            acc;
        for (const auto& r : corpus) {
            std::vector<ChartSubset> in = {ChartSubset::all};
            if (auto it = subsets.find(r.song_id); it != subsets.end())
                in.insert(in.end(), it->second.begin(), it->second.end());
            for (const auto sub : in) {
                auto& [artists, songs] =
                    acc[{to_string(r.artist_type), to_string(r.gender), to_string(sub)}];
                artists.insert(r.artist_id);
                ++songs;
            }
        }
        std::ofstream out(paths.analytics_dir() / "counts_by_group.csv");
        out << "artist_type,gender,subset,artists,songs\n";
        for (const auto& [key, val] : acc)
            out << std::get<0>(key) << ',' << std::get<1>(key) << ',' << std::get<2>(key) << ','
                << val.first.size() << ',' << val.second << '\n';
    }

    auto write_fraction_csv = [&](const FractionTable& table, const fs::path& p, bool genre) {
        std::ofstream out(p);
        out << (genre ? "artist_type,gender,genre,subset,songs,sexist,pct\n"
                      : "artist_type,gender,subset,songs,sexist,pct\n");
        for (const auto& row : table.rows) {
            out << to_string(row.key.artist_type) << ',' << to_string(row.key.gender) << ',';
            if (genre) out << (row.key.genre_top ? *row.key.genre_top : "") << ',';
            out << to_string(row.key.subset) << ',' << row.denominator << ',' << row.numerator
                << ',' << (row.fraction ? fmt(100.0 * *row.fraction, "%.1f") : std::string("")) << '\n';
        }
    };
    write_fraction_csv(fraction_table(corpus, labels, subsets, false),
                       paths.analytics_dir() / "sexist_fraction_by_group.csv", false);
    write_fraction_csv(fraction_table(corpus, labels, subsets, true),
                       paths.analytics_dir() / "sexist_fraction_by_genre.csv", true);

    // yearly sexist-fraction series with smoothing and bootstrap bands
    struct SeriesKey {
        std::string type, gender, subset;
        auto operator<=>(const SeriesKey&) const = default;
    };
    std::map<SeriesKey, std::map<int, std::vector<int>>> indicator;
    std::map<SeriesKey, std::map<int, std::pair<long long, long long>>> year_counts;
    for (const auto& r : corpus) {
        const bool sexist = labels.count(r.song_id) && labels.at(r.song_id);
        std::vector<ChartSubset> in = {ChartSubset::all};
        if (auto it = subsets.find(r.song_id); it != subsets.end())
            in.insert(in.end(), it->second.begin(), it->second.end());
        for (const auto sub : in) {
            const SeriesKey key{to_string(r.artist_type), to_string(r.gender), to_string(sub)};
            indicator[key][r.year].push_back(sexist ? 1 : 0);
            auto& [num, den] = year_counts[key][r.year];
            ++den;
            if (sexist) ++num;
        }
    }
    std::map<SeriesKey, std::vector<CiPoint>> ci_by_key;
    {
        std::ofstream out(paths.analytics_dir() / "series_sexist.csv");
        out << "artist_type,gender,subset,year,songs,sexist,raw_fraction,smoothed,ci_low,ci_high\n";
        for (const auto& [key, years] : indicator) {
            const auto ci = bootstrap_ci(years, cfg.analytics.n_boot, cfg.analytics.ci_level,
                                         cfg.analytics.median_window, cfg.rng_seed);
            ci_by_key[key] = ci;
            std::map<int, CiPoint> ci_at;
            for (const auto& p : ci) ci_at[p.year] = p;
            for (const auto& [year, nd] : year_counts.at(key)) {
                const auto& pt = ci_at.at(year);
                out << key.type << ',' << key.gender << ',' << key.subset << ',' << year << ','
                    << nd.second << ',' << nd.first << ','
                    << fmt(static_cast<double>(nd.first) / nd.second) << ',' << fmt(pt.value)
                    << ',' << fmt(pt.ci_low) << ',' << fmt(pt.ci_high) << '\n';
                ++stats.series_rows;
            }
        }
    }

    // share of each (artist type, gender) group among the year's songs
    {
        std::map<std::pair<std::string, int>, long long> totals;  // (subset, year)
        std::map<std::tuple<std::string, std::string, std::string, int>, long long> group_counts;
        for (const auto& r : corpus) {
            std::vector<ChartSubset> in = {ChartSubset::all};
            if (auto it = subsets.find(r.song_id); it != subsets.end())
                in.insert(in.end(), it->second.begin(), it->second.end());
            for (const auto sub : in) {
                ++totals[{to_string(sub), r.year}];
                ++group_counts[{to_string(sub), to_string(r.artist_type), to_string(r.gender),
                                r.year}];
            }
        }
        // group the rows so each (subset, type, gender) series can be smoothed
        std::map<std::tuple<std::string, std::string, std::string>, std::vector<SeriesPoint>>
            raw_series;
        for (const auto& [key, n] : group_counts) {
            const auto& [sub, type, gender, year] = key;
            raw_series[{sub, type, gender}].push_back(
                {year, static_cast<double>(n) / static_cast<double>(totals.at({sub, year}))});
        }
        std::ofstream out(paths.analytics_dir() / "series_group_share.csv");
        out << "subset,artist_type,gender,year,songs,all_songs,fraction,smoothed\n";
        for (const auto& [key, series] : raw_series) {
            const auto& [sub, type, gender] = key;
            const auto smoothed = median_filter(series, cfg.analytics.median_window);
            std::map<int, double> smooth_at;
            for (const auto& p : smoothed) smooth_at[p.year] = p.value;
            for (const auto& p : series) {
                const long long n = group_counts.at({sub, type, gender, p.year});
                out << sub << ',' << type << ',' << gender << ',' << p.year << ',' << n << ','
                    << totals.at({sub, p.year}) << ',' << fmt(p.value) << ','
                    << fmt(smooth_at.at(p.year)) << '\n';
            }
        }
    }

    // yearly genre shares, and sexist fractions per genre over time
    {
        std::map<std::pair<std::string, int>, long long> totals;  // (subset, year), genre known
        std::map<std::tuple<std::string, std::string, int>, std::pair<long long, long long>>
            genre_counts;  // (subset, genre, year) -> (songs, sexist)
        for (const auto& r : corpus) {
            if (!r.genre_top) continue;
            const bool sexist = labels.count(r.song_id) && labels.at(r.song_id);
            std::vector<ChartSubset> in = {ChartSubset::all};
            if (auto it = subsets.find(r.song_id); it != subsets.end())
                in.insert(in.end(), it->second.begin(), it->second.end());
            for (const auto sub : in) {
                ++totals[{to_string(sub), r.year}];
                auto& [n, s] = genre_counts[{to_string(sub), *r.genre_top, r.year}];
                ++n;
                if (sexist) ++s;
            }
        }
        std::ofstream share(paths.analytics_dir() / "series_genre_share.csv");
        share << "subset,genre,year,songs,all_songs,fraction\n";
        std::ofstream sexist(paths.analytics_dir() / "series_sexist_by_genre.csv");
        sexist << "subset,genre,year,songs,sexist,fraction\n";
        for (const auto& [key, ns] : genre_counts) {
            const auto& [sub, genre, year] = key;
            share << sub << ',' << genre << ',' << year << ',' << ns.first << ','
                  << totals.at({sub, year}) << ','
                  << fmt(static_cast<double>(ns.first) / totals.at({sub, year})) << '\n';
            sexist << sub << ',' << genre << ',' << year << ',' << ns.first << ',' << ns.second
                   << ',' << fmt(static_cast<double>(ns.second) / ns.first) << '\n';
        }
    }

    if (cfg.analytics.svg) {
        const std::vector<std::pair<std::string, std::string>> palette = {
            {"solo/male", "#1f77b4"}, {"solo/female", "#d62728"}, {"group/male", "#2ca02c"}};
        for (const auto sub : {ChartSubset::all, ChartSubset::billboard,
                               ChartSubset::billboard_top10}) {
            std::vector<SvgSeries> chart;
            for (const auto& [label, color] : palette) {
                const auto slash = label.find('/');
                const SeriesKey key{label.substr(0, slash), label.substr(slash + 1),
                                    to_string(sub)};
                auto it = ci_by_key.find(key);
                if (it == ci_by_key.end() || it->second.empty()) continue;
                SvgSeries s;
                s.label = label;
                s.color = color;
                s.band = it->second;
                for (const auto& p : it->second) s.points.push_back({p.year, p.value});
                chart.push_back(std::move(s));
            }
            if (!chart.empty())
                write_svg_chart((paths.analytics_dir() /
                                 ("sexist_fraction_" + std::string(to_string(sub)) + ".svg"))
                                    .string(),
                                "fraction of songs with sexist passages (" +
                                    std::string(to_string(sub)) + ")",
                                chart);
        }
    }
    return stats;
}

// ---- report -------------------------------------------------------------------

inline std::string run_report(const ProjectConfig& cfg) {
    const auto paths = artifacts(cfg);
    fs::create_directories(paths.report_dir());

    auto must_read = [&](const fs::path& p) -> std::string {
        std::ifstream in(p);
        if (!in) throw MissingArtifactError("report needs " + p.string() + "; run prior stages");
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };

    const Corpus accepted = load_corpus_artifact(paths.accepted(), "accepted corpus");
    const Corpus dedup = load_corpus_artifact(paths.dedup_corpus(), "deduplicated corpus");
    const auto labels_text = must_read(paths.song_labels());
    std::size_t sexist = 0, labeled = 0;
    {
        std::istringstream ls(labels_text);
        std::string line;
        std::getline(ls, line);
        std::string id;
        int flag, n;
        double sc;
        while (ls >> id >> flag >> n >> sc) {
            ++labeled;
            sexist += flag;
        }
    }

    std::ostringstream rep;
    rep << "run report\n==========\n\n";
    rep << "corpus\n------\n";
    rep << "accepted songs: " << accepted.size() << "\n";
    rep << "after duplicate removal: " << dedup.size() << "\n\n";
    rep << "matching\n--------\n" << must_read(paths.match_summary()) << "\n";
    rep << "sexism labels (threshold " << fmt(cfg.label.threshold, "%.3f") << ", N_B "
        << cfg.label.n_b << ")\n------------------------------------------\n";
    rep << "songs labeled sexist: " << sexist << " of " << labeled << " ("
        << fmt(labeled ? 100.0 * static_cast<double>(sexist) / labeled : 0.0, "%.1f") << "%)\n\n";
    rep << "fractions by group\n------------------\n"
        << must_read(paths.analytics_dir() / "sexist_fraction_by_group.csv") << "\n";
    rep << "classifier evaluation\n---------------------\n" << must_read(paths.eval_report())
        << "\n";
    rep << "association tests\n-----------------\n" << must_read(paths.assoc_table());

    std::ofstream out(paths.report_dir() / "summary.txt");
    out << rep.str();
    return rep.str();
}

}  // namespace songbias
