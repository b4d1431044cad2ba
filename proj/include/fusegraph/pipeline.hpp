#pragma once

/** \file pipeline.hpp
 *  \brief Config-driven training and inference over staged artifacts.
 *
 * Training runs four stages, each persisting its output under the output
 * directory and recording the file digest in `manifest.json`:
 *
 *   ranks   split.jsonl, rank_store.jsonl
 *   graphs  train_graphs.jsonl
 *   embed   vocabulary.jsonl, codebook.jsonl (kernel only), train_vectors.jsonl
 *   train   estimator.jsonl
 *
 * Every later stage, and inference, checks the manifest against the current
 * config and its input files and raises CompatibilityError on any mismatch.
 * The in-memory functions (train_model, predict, ...) do the same work without
 * touching disk and back both the stage functions and the experiments.
 */

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fusegraph/dataset.hpp"
#include "fusegraph/embedding.hpp"
#include "fusegraph/fusion_graph.hpp"
#include "fusegraph/learn.hpp"
#include "fusegraph/metrics.hpp"
#include "fusegraph/persist.hpp"
#include "fusegraph/ranker.hpp"

namespace fusegraph {

struct FeatureSpec {
    std::string name;
    std::filesystem::path path;
};

struct EmbeddingConfig {
    EmbeddingKind kind = EmbeddingKind::vertex;
    std::optional<double> bandwidth;
    std::optional<double> sigma;
    std::size_t max_training_gois = 500;
    bool goi_in_neighbors = false;
    McsSize mcs_size = McsSize::vertices;
};

struct SplitConfig {
    double train_fraction = 0.8;
    /// Explicit id lists; both or neither.
    std::optional<std::filesystem::path> train_ids;
    std::optional<std::filesystem::path> test_ids;
};

struct PipelineConfig {
    std::vector<FeatureSpec> features;
    std::vector<Ranker> rankers;
    std::filesystem::path labels;
    std::size_t L = 10;
    bool self_exclusion = true;
    EmbeddingConfig embedding;
    TrainConfig estimator;
    SplitConfig split;
    std::uint64_t seed = 0;
    std::filesystem::path output_dir = "out";
    /// Class whose probability ranks the test set for AP@K; unset disables AP.
    std::optional<std::string> positive_label;
    std::vector<std::size_t> cutoffs;
    std::vector<std::size_t> sweep_L{1, 3, 5, 10};
    /// nullopt: vote only when the descriptor count is odd. true: demand it.
    std::optional<bool> majority_vote;
};

/// Parses a JSON config (comments allowed). Relative paths resolve against the file's directory.
PipelineConfig load_config(const std::filesystem::path& path);
PipelineConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});
/// Throws ConfigError on the first violated constraint.
void validate_config(const PipelineConfig& cfg);
/// Digest of every setting that shapes the training artifacts.
std::string config_digest(const PipelineConfig& cfg);

/// Progress lines go to standard error unless silenced.
void set_quiet(bool quiet);

struct Dataset {
    std::map<std::string, FeatureTable> tables;
    LabelTable labels;
};

Dataset load_dataset(const PipelineConfig& cfg);
/// Digest of the training rows and labels, so appending test rows keeps artifacts valid.
std::string training_data_digest(const Dataset& data, std::span<const SampleId> train_ids);
/// Stratified split, or the explicit id files when configured.
SplitSpec make_split(const PipelineConfig& cfg, const LabelTable& labels);

struct TrainedModel {
    SplitSpec split;
    RankStore store;
    std::vector<FusionGraph> graphs;
    VocabularyV vocabulary;
    std::optional<Codebook> codebook;
    VectorSet vectors;
    Estimator estimator;
};

RankStore build_train_store(const PipelineConfig& cfg, const Dataset& data, std::span<const SampleId> train_ids);
std::vector<FusionGraph> build_train_graphs(const PipelineConfig& cfg, const RankStore& store);
std::optional<Codebook> build_train_codebook(const PipelineConfig& cfg, std::span<const FusionGraph> graphs);
FusionVector embed_graph(const FusionGraph& g, const EmbeddingConfig& cfg, const VocabularyV& vocabulary,
                         const Codebook* codebook);
VectorSet embed_graphs(std::span<const FusionGraph> graphs, const EmbeddingConfig& cfg,
                       const VocabularyV& vocabulary, const Codebook* codebook);
Estimator train_estimator(const PipelineConfig& cfg, const LabelTable& labels, const VectorSet& vectors);

TrainedModel train_model(const PipelineConfig& cfg, const Dataset& data, const SplitSpec& split);

struct Prediction {
    SampleId id;
    std::string label;
    std::vector<double> probabilities;  // in estimator class order
};

struct InferenceTiming {
    double rank_seconds = 0.0;
    double rest_seconds = 0.0;  // graph + embed + predict
};

/// Ranks each test id against the train responses, then graph, vector and prediction.
std::vector<Prediction> predict(const PipelineConfig& cfg, const Dataset& data, const TrainedModel& model,
                                std::span<const SampleId> test_ids, InferenceTiming* timing = nullptr);

/// Balanced accuracy and recalls of labeled predictions, plus AP@K when a positive label is set.
/// Cutoffs longer than the scored list are skipped with a note.
MetricReport score_predictions(std::span<const Prediction> predictions, const std::vector<std::string>& classes,
                               const LabelTable& labels, const std::optional<std::string>& positive_label,
                               std::span<const std::size_t> cutoffs, const std::string& prefix);

struct BaselineResult {
    MetricReport report;
    std::vector<MinMaxScaler> scalers;  // concatenation statistics, one per descriptor
};

/// Concatenation, each single descriptor, and majority vote when the descriptor count allows it.
BaselineResult evaluate_baselines(const PipelineConfig& cfg, const Dataset& data, const SplitSpec& split);

// Stage functions over cfg.output_dir.
void stage_ranks(const PipelineConfig& cfg);
void stage_graphs(const PipelineConfig& cfg);
void stage_embed(const PipelineConfig& cfg);
void stage_train(const PipelineConfig& cfg);
void run_training(const PipelineConfig& cfg);

/// Writes predictions.csv and, when any test id is labeled, report.{json,csv}.
/// `test_ids` defaults to the persisted split's test side.
void run_inference(const PipelineConfig& cfg, const std::optional<std::vector<SampleId>>& test_ids = std::nullopt);

/// Writes baselines.{json,csv} and concat_scalers.jsonl.
void run_baselines(const PipelineConfig& cfg);

/// Re-scores predictions.csv against the label file into report.{json,csv}.
MetricReport evaluate_predictions(const PipelineConfig& cfg);

struct SweepRow {
    std::size_t L = 0;
    double balanced_accuracy = 0.0;
};

/// Balanced accuracy per L of cfg.sweep_L on the configured split.
std::vector<SweepRow> sweep_l(const PipelineConfig& cfg, const Dataset& data, const SplitSpec& split);
/// Writes sweep_l.csv (`L,balanced_accuracy`).
void run_sweep_l(const PipelineConfig& cfg);

/// Every place a test id shows up in the training artifacts of `dir`; empty when clean.
std::vector<std::string> audit_hygiene(const std::filesystem::path& dir, std::span<const SampleId> test_ids);

/// Artifact name -> file digest, as recorded in the manifest.
std::map<std::string, std::string> manifest_digests(const std::filesystem::path& dir);

}  // namespace fusegraph
