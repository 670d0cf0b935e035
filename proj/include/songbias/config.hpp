#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "songbias/corpus.hpp"
#include "songbias/embeddings.hpp"
#include "songbias/errors.hpp"
#include "songbias/matching.hpp"
#include "songbias/sexism.hpp"

namespace songbias {

struct AnalyticsConfig {
    int median_window = 5;
    int n_boot = 1000;
    double ci_level = 95.0;
    bool svg = true;
};

struct AssocConfig {
    std::uint64_t n_permutations = 1000;
    long long min_word_frequency = 5;
    std::optional<std::string> male_name_candidates;    // file of candidate names
    std::optional<std::string> female_name_candidates;
    std::size_t names_k = 24;
};

// The project file: every stage reads its knobs and input paths from here.
// Relative paths resolve against the directory containing the config file.
struct ProjectConfig {
    std::filesystem::path base_dir;

    std::filesystem::path corpus_path;
    std::filesystem::path genre_map_path;
    std::vector<std::filesystem::path> chart_paths;
    std::vector<std::filesystem::path> gold_paths;
    std::filesystem::path wordsets_dir;
    std::filesystem::path battery_path;
    std::filesystem::path lexicon_path;
    std::optional<std::filesystem::path> external_scores_path;
    std::filesystem::path out_dir;

    FilterConfig filter;
    double dedup_threshold = 0.80;
    MatchConfig match;
    TrainConfig train;
    std::vector<int> seeds = {0, 1, 2, 3, 4};
    LabelConfig label;
    std::string scorer = "lexicon";  // "lexicon" | "external"
    AssocConfig assoc;
    std::vector<double> sweep_thresholds = {0.5, 0.725, 0.9};
    AnalyticsConfig analytics;
    std::uint64_t rng_seed = 42;
    int threads = 1;

    std::filesystem::path resolve(const std::string& p) const {
        std::filesystem::path fp(p);
        return fp.is_absolute() ? fp : base_dir / fp;
    }
};

namespace detail {

template <typename T>
T get_or(const nlohmann::json& j, const char* key, T fallback) {
    if (!j.contains(key) || j.at(key).is_null()) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config field '") + key + "': " + e.what());
    }
}

}  // namespace detail

inline ProjectConfig load_project_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw MissingArtifactError("cannot open config: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config is not valid json: " + std::string(e.what()));
    }

    ProjectConfig cfg;
    cfg.base_dir = std::filesystem::absolute(path).parent_path();

    if (!j.contains("paths") || !j["paths"].is_object())
        throw ConfigError("config needs a 'paths' object");
    const auto& p = j["paths"];
    auto need = [&](const char* key) -> std::string {
        if (!p.contains(key) || !p.at(key).is_string())
            throw ConfigError(std::string("config paths.") + key + " missing");
        return p.at(key).get<std::string>();
    };
    cfg.corpus_path = cfg.resolve(need("corpus"));
    cfg.genre_map_path = cfg.resolve(need("genre_map"));
    cfg.wordsets_dir = cfg.resolve(need("wordsets_dir"));
    cfg.battery_path = cfg.resolve(need("battery"));
    cfg.lexicon_path = cfg.resolve(need("lexicon"));
    cfg.out_dir = cfg.resolve(need("out_dir"));
    for (const auto& c : detail::get_or<std::vector<std::string>>(p, "charts", {}))
        cfg.chart_paths.push_back(cfg.resolve(c));
    for (const auto& c : detail::get_or<std::vector<std::string>>(p, "gold", {}))
        cfg.gold_paths.push_back(cfg.resolve(c));
    if (p.contains("external_scores") && !p["external_scores"].is_null())
        cfg.external_scores_path = cfg.resolve(p["external_scores"].get<std::string>());

    if (j.contains("filter")) {
        const auto& f = j["filter"];
        cfg.filter.year_min = detail::get_or(f, "year_min", cfg.filter.year_min);
        cfg.filter.year_max = detail::get_or(f, "year_max", cfg.filter.year_max);
        cfg.filter.min_words = detail::get_or(f, "min_words", cfg.filter.min_words);
        cfg.filter.min_lines = detail::get_or(f, "min_lines", cfg.filter.min_lines);
        cfg.filter.min_songs_per_artist =
            detail::get_or(f, "min_songs_per_artist", cfg.filter.min_songs_per_artist);
        if (f.contains("language_allow")) {
            cfg.filter.language_allow.clear();
            for (const auto& l : f["language_allow"])
                cfg.filter.language_allow.insert(l.get<std::string>());
        }
    }
    cfg.filter.validate();

    if (j.contains("dedup"))
        cfg.dedup_threshold = detail::get_or(j["dedup"], "threshold", cfg.dedup_threshold);

    if (j.contains("match")) {
        const auto& m = j["match"];
        cfg.match.artist_threshold =
            detail::get_or(m, "artist_threshold", cfg.match.artist_threshold);
        cfg.match.title_threshold = detail::get_or(m, "title_threshold", cfg.match.title_threshold);
    }

    if (j.contains("train")) {
        const auto& t = j["train"];
        cfg.train.window = detail::get_or(t, "window", cfg.train.window);
        cfg.train.dim = detail::get_or(t, "dim", cfg.train.dim);
        cfg.train.epochs = detail::get_or(t, "epochs", cfg.train.epochs);
        cfg.train.min_count = detail::get_or(t, "min_count", cfg.train.min_count);
        cfg.train.negatives = detail::get_or(t, "negatives", cfg.train.negatives);
        cfg.train.learning_rate = detail::get_or(t, "learning_rate", cfg.train.learning_rate);
        cfg.train.subsample_threshold =
            detail::get_or(t, "subsample_threshold", cfg.train.subsample_threshold);
    }
    cfg.train.validate();

    cfg.seeds = detail::get_or(j, "seeds", cfg.seeds);

    if (j.contains("label")) {
        cfg.label.threshold = detail::get_or(j["label"], "threshold", cfg.label.threshold);
        cfg.label.n_b = detail::get_or(j["label"], "n_b", cfg.label.n_b);
    }
    cfg.label.validate();

    cfg.scorer = detail::get_or<std::string>(j, "scorer", cfg.scorer);
    if (cfg.scorer != "lexicon" && cfg.scorer != "external")
        throw ConfigError("scorer must be 'lexicon' or 'external'");
    if (cfg.scorer == "external" && !cfg.external_scores_path)
        throw ConfigError("scorer 'external' needs paths.external_scores");

    if (j.contains("assoc")) {
        const auto& a = j["assoc"];
        cfg.assoc.n_permutations = detail::get_or<std::uint64_t>(a, "n_permutations",
                                                                 cfg.assoc.n_permutations);
        cfg.assoc.min_word_frequency =
            detail::get_or(a, "min_word_frequency", cfg.assoc.min_word_frequency);
        if (a.contains("male_name_candidates") && !a["male_name_candidates"].is_null())
            cfg.assoc.male_name_candidates = a["male_name_candidates"].get<std::string>();
        if (a.contains("female_name_candidates") && !a["female_name_candidates"].is_null())
            cfg.assoc.female_name_candidates = a["female_name_candidates"].get<std::string>();
        cfg.assoc.names_k = detail::get_or<std::size_t>(a, "names_k", cfg.assoc.names_k);
    }
    if (cfg.assoc.n_permutations < 1) throw ConfigError("assoc.n_permutations < 1");

    cfg.sweep_thresholds = detail::get_or(j, "sweep_thresholds", cfg.sweep_thresholds);

    if (j.contains("analytics")) {
        const auto& a = j["analytics"];
        cfg.analytics.median_window = detail::get_or(a, "median_window", cfg.analytics.median_window);
        cfg.analytics.n_boot = detail::get_or(a, "n_boot", cfg.analytics.n_boot);
        cfg.analytics.ci_level = detail::get_or(a, "ci_level", cfg.analytics.ci_level);
        cfg.analytics.svg = detail::get_or(a, "svg", cfg.analytics.svg);
    }

    cfg.rng_seed = detail::get_or<std::uint64_t>(j, "rng_seed", cfg.rng_seed);
    cfg.threads = detail::get_or(j, "threads", cfg.threads);
    if (cfg.threads < 1) throw ConfigError("threads < 1");
    cfg.train.workers = cfg.threads;

    if (cfg.seeds.size() != 5)
        throw ConfigError("seeds must list exactly 5 entries for the association runs");
    return cfg;
}

}  // namespace songbias
