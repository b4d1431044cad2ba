#pragma once

/** \file learn.hpp
 *  \brief Linear one-vs-rest estimators and the early/late fusion baselines.
 *
 * Each binary problem minimizes the mean loss plus (reg/2)|w|^2 by full-batch
 * gradient descent with Armijo backtracking, so the logistic objective never
 * increases between epochs. The regularization constant is picked by
 * stratified k-fold balanced accuracy.
 */

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fusegraph/dataset.hpp"
#include "fusegraph/embedding.hpp"

namespace fusegraph {

enum class Objective { logistic, hinge };

[[nodiscard]] std::string_view to_string(Objective objective);
[[nodiscard]] Objective parse_objective(std::string_view name);

struct TrainConfig {
    std::vector<double> reg_grid{1e-4, 1e-3, 1e-2, 1e-1};
    std::size_t folds = 5;
    std::size_t epochs = 300;
    /// Initial step; backtracking adapts it every epoch.
    double learning_rate = 1.0;
    std::uint64_t seed = 0;
    Objective objective = Objective::logistic;
    /// Stops early once an epoch improves the loss by less than this (relative).
    double tolerance = 1e-9;

    friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct GridScore {
    double reg = 0.0;
    double cv_balanced_accuracy = 0.0;

    friend bool operator==(const GridScore&, const GridScore&) = default;
};

/** \brief Trained linear model.
 *
 * With two classes a single weight vector scores the second class against the
 * first (class scores {0, margin}); otherwise there is one vector per class.
 */
struct Estimator {
    std::vector<std::string> classes;
    std::vector<std::vector<double>> weights;
    std::vector<double> biases;
    double reg = 0.0;
    TrainConfig config;
    std::vector<GridScore> grid_scores;

    [[nodiscard]] std::int64_t dim() const noexcept {
        return weights.empty() ? 0 : static_cast<std::int64_t>(weights.front().size());
    }
    [[nodiscard]] bool binary() const noexcept { return weights.size() == 1 && classes.size() == 2; }

    /// Per-class scores; ShapeError on a dimension mismatch.
    [[nodiscard]] std::vector<double> scores(const SparseVector& x) const;

    friend bool operator==(const Estimator&, const Estimator&) = default;
};

/// Per-epoch full-batch objective of one binary fit.
struct FitTrace {
    std::vector<double> loss;
};

/// Fits one binary problem; targets are +1 / -1.
void fit_binary(std::span<const SparseVector> x, std::span<const int> targets, double reg, const TrainConfig& cfg,
                std::vector<double>& weights, double& bias, FitTrace* trace = nullptr);

/// Full-batch objective value at (weights, bias).
double binary_objective(std::span<const SparseVector> x, std::span<const int> targets, double reg, Objective objective,
                        std::span<const double> weights, double bias);

/// Fits at a fixed regularization constant (no model selection).
Estimator fit_estimator(std::span<const SparseVector> x, std::span<const std::string> y, double reg,
                        const TrainConfig& cfg, std::span<const std::string> classes = {});

/// Stratified fold index per sample, seeded.
std::vector<std::size_t> stratified_folds(std::span<const std::string> y, std::size_t folds, std::uint64_t seed);

/// Grid search over cfg.reg_grid, then refit on everything with the winner.
Estimator train_classifier(std::span<const SparseVector> x, std::span<const std::string> y, const TrainConfig& cfg);

/// argmax of class scores; ties go to the earlier class.
std::string predict_label(const Estimator& e, const SparseVector& x);

/// Softmax over class scores (for a binary model: {1 - p, p}, p the logistic of the margin).
std::vector<double> predict_proba(const Estimator& e, const SparseVector& x);

/// Probability of `label`.
double predict_probability_of(const Estimator& e, const SparseVector& x, const std::string& label);

/// Per-attribute min-max statistics fitted on a set of ids.
struct MinMaxScaler {
    std::vector<double> min;
    std::vector<double> max;
    std::vector<SampleId> fitted_on;

    static MinMaxScaler fit(const FeatureTable& table, std::span<const SampleId> ids);
    /// Rescales to [0,1] with clipping; constant attributes map to 0.
    [[nodiscard]] std::vector<double> apply(std::span<const double> row) const;
};

/** \brief Early-fusion baseline: min-max normalize each table on `train_ids`, then concatenate.
 *
 * All tables must cover the same ids. The fitted scalers are returned through
 * `scalers` when non-null.
 */
FeatureTable concat_features(std::span<const FeatureTable> tables, std::span<const SampleId> train_ids,
                             std::vector<MinMaxScaler>* scalers = nullptr);

/// Late-fusion baseline: per-sample modal label over an odd number of predictors;
/// among tied labels the one voted by the earliest predictor wins.
std::vector<std::string> majority_vote(std::span<const std::vector<std::string>> predictions);

/// Dense rows of `ids` as sparse vectors (zeros dropped).
std::vector<SparseVector> sparse_rows(const FeatureTable& table, std::span<const SampleId> ids);

}  // namespace fusegraph
