// Command-line driver for the lyrics-analysis pipeline. Each subcommand runs
// one stage, reading its inputs from the project config and prior-stage
// artifacts in the run directory.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "songbias/config.hpp"
#include "songbias/fixture.hpp"
#include "songbias/pipeline.hpp"

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitConfig = 3;
constexpr int kExitMissingArtifact = 4;
constexpr int kExitData = 5;

struct CommonOpts {
    std::string config_path;
    std::string out_override;
    std::optional<std::uint64_t> seed_override;
    std::optional<int> threads_override;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "project config file")
        ->envname("SONGBIAS_CONFIG")
        ->required();
    cmd->add_option("--out", opts.out_override, "override the run directory");
    cmd->add_option("--seed", opts.seed_override, "override the global rng seed");
    cmd->add_option("--threads", opts.threads_override, "override worker threads");
}

songbias::ProjectConfig load(const CommonOpts& opts) {
    auto cfg = songbias::load_project_config(opts.config_path);
    if (!opts.out_override.empty()) {
        std::filesystem::path p(opts.out_override);
        cfg.out_dir = p.is_absolute() ? p : std::filesystem::current_path() / p;
    }
    if (opts.seed_override) cfg.rng_seed = *opts.seed_override;
    if (opts.threads_override) {
        if (*opts.threads_override < 1) throw songbias::ConfigError("threads < 1");
        cfg.threads = *opts.threads_override;
        cfg.train.workers = cfg.threads;
    }
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"songbias: measure gender bias and sexist content in song-lyrics corpora"};
    app.require_subcommand(1);
    app.failure_message(CLI::FailureMessage::help);

    CommonOpts opts;
    int rc = 0;

    // gen-fixture
    auto* gen = app.add_subcommand("gen-fixture",
                                   "write a synthetic corpus with planted ground truth");
    std::string fixture_dir;
    songbias::FixtureConfig fx;
    gen->add_option("--out", fixture_dir, "fixture directory")->required();
    gen->add_option("--seed", fx.seed, "fixture rng seed");
    gen->add_option("--male-artists", fx.n_male_solo, "male solo artists");
    gen->add_option("--female-artists", fx.n_female_solo, "female solo artists");
    gen->add_option("--groups", fx.n_group, "group artists");
    gen->add_option("--songs-per-artist", fx.songs_per_artist, "songs per artist");
    gen->add_option("--planted-strength", fx.planted_strength,
                    "fraction of lines carrying association blocks");
    gen->add_flag("--reverse-planting", fx.reverse_planting, "flip the planted association sign");
    gen->add_option("--sexist-fraction", fx.sexist_fraction, "fraction of songs given lexicon terms");
    gen->add_option("--chart-fraction", fx.chart_fraction, "fraction of songs put on the charts");
    gen->add_option("--fuzz", fx.fuzz_fraction, "fraction of chart entries with a typo");
    gen->add_option("--exact-duplicates", fx.n_exact_duplicates, "injected exact duplicates");
    gen->add_option("--near-duplicates", fx.n_near_duplicates, "injected near duplicates");
    gen->add_flag("!--no-rejects", fx.with_rejects, "skip the reject-me records");
    gen->callback([&] {
        const auto res = songbias::write_fixture(fixture_dir, fx);
        std::printf("fixture: %d songs, %d gold labels, %d chart entries -> %s\n", res.n_songs,
                    res.n_gold, res.n_chart_entries, res.dir.string().c_str());
    });

    // ingest
    auto* ingest = app.add_subcommand("ingest", "filter and validate the input corpus");
    add_common(ingest, opts);
    ingest->callback([&] {
        const auto stats = songbias::run_ingest(load(opts));
        std::printf("ingest: accepted %zu, rejected %zu\n", stats.accepted, stats.rejected);
    });

    // dedup
    auto* dedup = app.add_subcommand("dedup", "drop near-duplicate lyrics, keep covers");
    add_common(dedup, opts);
    std::optional<double> dedup_threshold;
    dedup->add_option("--threshold", dedup_threshold, "jaccard link threshold (default 0.80)");
    dedup->callback([&] {
        auto cfg = load(opts);
        if (dedup_threshold) cfg.dedup_threshold = *dedup_threshold;
        const auto stats = songbias::run_dedup(cfg);
        std::printf("dedup: retained %zu, dropped %zu duplicates, %zu covers in %zu clusters\n",
                    stats.retained, stats.dropped, stats.covers, stats.clusters);
    });

    // match
    auto* match = app.add_subcommand("match", "link chart and gold entries to corpus songs");
    add_common(match, opts);
    std::optional<double> artist_thr, title_thr;
    match->add_option("--artist-threshold", artist_thr, "artist similarity threshold");
    match->add_option("--title-threshold", title_thr, "title similarity threshold");
    match->callback([&] {
        auto cfg = load(opts);
        if (artist_thr) cfg.match.artist_threshold = *artist_thr;
        if (title_thr) cfg.match.title_threshold = *title_thr;
        const auto stats = songbias::run_match(cfg);
        std::printf("match: %zu of %zu entries matched\n", stats.matched, stats.entries);
    });

    // train-embed
    auto* train = app.add_subcommand("train-embed", "train embeddings per partition per seed");
    add_common(train, opts);
    std::string partition;
    std::optional<int> train_seed;
    std::optional<int> dim, epochs, window;
    train->add_option("--partition", partition, "train only this partition")
        ->check(CLI::IsMember({"all_solo", "male_solo", "female_solo"}));
    train->add_option("--train-seed", train_seed, "train only this seed");
    train->add_option("--dim", dim, "embedding dimension override");
    train->add_option("--epochs", epochs, "epoch count override");
    train->add_option("--window", window, "context window override");
    train->callback([&] {
        auto cfg = load(opts);
        if (dim) cfg.train.dim = *dim;
        if (epochs) cfg.train.epochs = *epochs;
        if (window) cfg.train.window = *window;
        cfg.train.validate();
        std::optional<songbias::PartitionName> only;
        if (partition == "all_solo") only = songbias::PartitionName::all_solo;
        else if (partition == "male_solo") only = songbias::PartitionName::male_solo;
        else if (partition == "female_solo") only = songbias::PartitionName::female_solo;
        const auto stats = songbias::run_train_embed(cfg, only, train_seed);
        std::printf("train-embed: trained %zu embedding spaces\n", stats.spaces_trained);
    });

    // assoc
    auto* assoc = app.add_subcommand("assoc", "run the association-test battery");
    add_common(assoc, opts);
    std::optional<std::uint64_t> n_perm;
    assoc->add_option("--n-perm", n_perm, "permutations per test (default 1000)");
    assoc->callback([&] {
        auto cfg = load(opts);
        if (n_perm) cfg.assoc.n_permutations = *n_perm;
        const auto stats = songbias::run_assoc(cfg);
        std::printf("assoc: %zu battery rows, %zu per-seed results\n", stats.battery_rows,
                    stats.results);
    });

    // score
    auto* score = app.add_subcommand("score", "score lyric batches with the configured scorer");
    add_common(score, opts);
    std::string scorer_override, external_path;
    score->add_option("--scorer", scorer_override, "lexicon|external")
        ->check(CLI::IsMember({"lexicon", "external"}));
    score->add_option("--external-scores", external_path, "external scores file");
    score->callback([&] {
        auto cfg = load(opts);
        if (!scorer_override.empty()) cfg.scorer = scorer_override;
        if (!external_path.empty()) cfg.external_scores_path = std::filesystem::path(external_path);
        if (cfg.scorer == "external" && !cfg.external_scores_path)
            throw songbias::ConfigError("scorer 'external' needs --external-scores");
        const auto stats = songbias::run_score(cfg);
        std::printf("score: %zu songs, %zu batches\n", stats.songs, stats.batches);
    });

    // label
    auto* label = app.add_subcommand("label", "propagate batch scores to song labels");
    add_common(label, opts);
    std::optional<double> threshold;
    std::optional<int> n_b;
    label->add_option("--threshold", threshold, "batch probability threshold");
    label->add_option("--n-b", n_b, "batches required to flag a song");
    label->callback([&] {
        auto cfg = load(opts);
        if (threshold) cfg.label.threshold = *threshold;
        if (n_b) cfg.label.n_b = *n_b;
        cfg.label.validate();
        const auto stats = songbias::run_label(cfg);
        std::printf("label: %zu of %zu songs sexist\n", stats.sexist, stats.songs);
    });

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "score the labeler against matched gold labels");
    add_common(evaluate, opts);
    std::optional<double> eval_threshold;
    std::optional<int> eval_nb;
    evaluate->add_option("--threshold", eval_threshold, "labeling threshold");
    evaluate->add_option("--n-b", eval_nb, "batches required to flag a song");
    evaluate->callback([&] {
        auto cfg = load(opts);
        if (eval_threshold) cfg.label.threshold = *eval_threshold;
        if (eval_nb) cfg.label.n_b = *eval_nb;
        cfg.label.validate();
        const auto stats = songbias::run_evaluate(cfg);
        std::printf("evaluate: %zu gold songs (%zu entries unmatched), macro F1 %.3f\n",
                    stats.gold_songs, stats.gold_unmatched, stats.macro_f1);
    });

    // sweep
    auto* sweep = app.add_subcommand("sweep", "evaluate the configured threshold grid");
    add_common(sweep, opts);
    std::optional<int> sweep_nb;
    sweep->add_option("--n-b", sweep_nb, "batches required to flag a song");
    sweep->callback([&] {
        auto cfg = load(opts);
        if (sweep_nb) cfg.label.n_b = *sweep_nb;
        const auto stats = songbias::run_sweep(cfg);
        std::printf("sweep: best macro-F1 threshold %.4f, best sexist-F1 threshold %.4f\n",
                    stats.best_macro_f1_threshold, stats.best_sexist_f1_threshold);
    });

    // analyze
    auto* analyze = app.add_subcommand("analyze", "grouped tables and yearly series");
    add_common(analyze, opts);
    std::optional<int> median_window, boot;
    analyze->add_option("--median-window", median_window, "median filter window (odd)");
    analyze->add_option("--n-boot", boot, "bootstrap resamples");
    analyze->callback([&] {
        auto cfg = load(opts);
        if (median_window) cfg.analytics.median_window = *median_window;
        if (boot) cfg.analytics.n_boot = *boot;
        const auto stats = songbias::run_analyze(cfg);
        std::printf("analyze: %zu series rows\n", stats.series_rows);
    });

    // report
    auto* report = app.add_subcommand("report", "aggregate a run summary");
    add_common(report, opts);
    report->callback([&] {
        songbias::run_report(load(opts));
        std::printf("report: wrote summary\n");
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const songbias::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const songbias::MissingArtifactError& e) {
        std::cerr << "missing artifact: " << e.what() << "\n";
        return kExitMissingArtifact;
    } catch (const songbias::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
    return rc;
}
