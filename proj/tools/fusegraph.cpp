#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "fusegraph/dataset.hpp"
#include "fusegraph/errors.hpp"
#include "fusegraph/pipeline.hpp"
#include "fusegraph/synthetic.hpp"

namespace fs = std::filesystem;
using namespace fusegraph;

namespace {

struct CommonOptions {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
};

void add_common(CLI::App* sub, CommonOptions& common) {
    sub->add_option("--config", common.config, "Pipeline config (JSON, comments allowed)")->required();
    sub->add_option("--seed", common.seed, "Override the config seed");
    sub->add_option("--out", common.out, "Override the output directory");
}

PipelineConfig configured(const CommonOptions& common) {
    auto cfg = load_config(common.config);
    if (common.seed) cfg.seed = *common.seed;
    if (common.out) cfg.output_dir = *common.out;
    return cfg;
}

void write_synthetic(const fs::path& dir, const SyntheticOptions& options) {
    fs::create_directories(dir);
    const auto data = make_complementary_dataset(options);
    for (const auto& t : data.tables) save_features(dir / (t.descriptor_name() + ".csv"), t);
    save_labels(dir / "labels.csv", data.labels);
    std::ofstream cfg(dir / "config.json");
    if (!cfg) throw IoError("cannot write " + (dir / "config.json").string());
    cfg << R"({
  // two complementary descriptors over three classes
  "features": [
    {"name": "alpha", "path": "alpha.csv"},
    {"name": "beta", "path": "beta.csv"}
  ],
  "rankers": [
    {"descriptor": "alpha", "comparator": "euclidean"},
    {"descriptor": "beta", "comparator": "euclidean"}
  ],
  "labels": "labels.csv",
  "L": 10,
  "embedding": {"kind": "V"},   // V, H or K
  "estimator": {"reg_grid": [0.0001, 0.001, 0.01, 0.1], "folds": 5},
  "split": {"train_fraction": 0.7},
  "seed": )" << options.seed
        << R"(,
  "output_dir": "out",
  "sweep_L": [1, 3, 5, 10]
}
)";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Graph-based rank fusion for multimodal prediction"};
    app.require_subcommand(1);
    app.fallthrough();
    bool quiet = false;
    app.add_flag("-q,--quiet", quiet, "Suppress progress messages");

    CommonOptions common;
    auto* ranks = app.add_subcommand("ranks", "Split the data and build the training rank store");
    auto* graphs = app.add_subcommand("graphs", "Extract one fusion graph per training sample");
    auto* embed = app.add_subcommand("embed", "Build the vocabulary, the codebook (FV-K) and training vectors");
    auto* train = app.add_subcommand("train", "Fit the estimator on the training vectors");
    auto* run = app.add_subcommand("run", "All four training stages, then inference");
    auto* infer = app.add_subcommand("infer", "Predict the test samples");
    auto* baselines = app.add_subcommand("baselines", "Concatenation, single-descriptor and majority-vote baselines");
    auto* evaluate = app.add_subcommand("evaluate", "Score predictions.csv against the labels");
    auto* sweep = app.add_subcommand("sweep-l", "Balanced accuracy of FV-V (or the configured kind) across L");
    for (auto* sub : {ranks, graphs, embed, train, run, infer, baselines, evaluate, sweep}) add_common(sub, common);

    std::optional<std::string> test_ids;
    infer->add_option("--test-ids", test_ids, "File with one test id per line (default: the split's test side)");

    auto* synth = app.add_subcommand("synth", "Write a synthetic two-descriptor dataset and a config");
    std::string synth_dir;
    SyntheticOptions synth_options;
    synth->add_option("--out", synth_dir, "Target directory")->required();
    synth->add_option("--seed", synth_options.seed, "Generator seed");
    synth->add_option("--samples", synth_options.samples, "Sample count");
    synth->add_option("--noise", synth_options.noise, "Gaussian noise level");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : static_cast<int>(ErrorKind::config);
    }
    set_quiet(quiet);

    try {
        if (synth->parsed()) {
            write_synthetic(synth_dir, synth_options);
            return 0;
        }
        const auto cfg = configured(common);
        if (ranks->parsed()) stage_ranks(cfg);
        if (graphs->parsed()) stage_graphs(cfg);
        if (embed->parsed()) stage_embed(cfg);
        if (train->parsed()) stage_train(cfg);
        if (run->parsed()) {
            run_training(cfg);
            run_inference(cfg);
        }
        if (infer->parsed()) {
            run_inference(cfg, test_ids ? std::optional(load_id_list(*test_ids)) : std::nullopt);
        }
        if (baselines->parsed()) run_baselines(cfg);
        if (evaluate->parsed()) (void)evaluate_predictions(cfg);
        if (sweep->parsed()) run_sweep_l(cfg);
    } catch (const Error& e) {
        std::cerr << "fusegraph: error: " << e.what() << '\n';
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "fusegraph: error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
