#include "fusegraph/learn.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "fusegraph/errors.hpp"
#include "fusegraph/metrics.hpp"
#include "fusegraph/parallel.hpp"
#include "fusegraph/random.hpp"

namespace fusegraph {

std::string_view to_string(Objective objective) {
    return objective == Objective::logistic ? "logistic" : "hinge";
}

Objective parse_objective(std::string_view name) {
    if (name == "logistic") return Objective::logistic;
    if (name == "hinge") return Objective::hinge;
    throw ConfigError("unknown objective '" + std::string(name) + "'");
}

std::vector<double> Estimator::scores(const SparseVector& x) const {
    if (x.dim != dim()) {
        throw ShapeError("vector of dim " + std::to_string(x.dim) + " given to an estimator of dim " +
                         std::to_string(dim()));
    }
    if (binary()) return {0.0, x.dot(weights.front()) + biases.front()};
    std::vector<double> out(weights.size());
    for (std::size_t c = 0; c < weights.size(); ++c) out[c] = x.dot(weights[c]) + biases[c];
    return out;
}

namespace {

// log(1 + exp(-z)) without overflow.
double logistic_loss(double z) { return z > 0 ? std::log1p(std::exp(-z)) : -z + std::log1p(std::exp(z)); }

// d/dz log(1 + exp(-z)) = -1 / (1 + exp(z)).
double logistic_slope(double z) {
    if (z > 0) {
        const double e = std::exp(-z);
        return -e / (1.0 + e);
    }
    return -1.0 / (1.0 + std::exp(z));
}

double squared_norm(std::span<const double> w) {
    double acc = 0.0;
    for (double v : w) acc += v * v;
    return acc;
}

// Objective and gradient in one pass.
double objective_and_gradient(std::span<const SparseVector> x, std::span<const int> targets, double reg,
                              Objective objective, std::span<const double> w, double b, std::vector<double>& grad_w,
                              double& grad_b) {
    const auto n = static_cast<double>(x.size());
    std::fill(grad_w.begin(), grad_w.end(), 0.0);
    grad_b = 0.0;
    double loss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double y = targets[i];
        const double z = y * (x[i].dot(w) + b);
        double slope = 0.0;
        if (objective == Objective::logistic) {
            loss += logistic_loss(z);
            slope = logistic_slope(z);
        } else if (z < 1.0) {
            loss += 1.0 - z;
            slope = -1.0;
        }
        if (slope != 0.0) {
            const double g = slope * y / n;
            for (const auto& e : x[i].entries) grad_w[static_cast<std::size_t>(e.index)] += g * e.value;
            grad_b += g;
        }
    }
    for (std::size_t k = 0; k < w.size(); ++k) grad_w[k] += reg * w[k];
    return loss / n + 0.5 * reg * squared_norm(w);
}

}  // namespace

double binary_objective(std::span<const SparseVector> x, std::span<const int> targets, double reg, Objective objective,
                        std::span<const double> weights, double bias) {
    double loss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double z = targets[i] * (x[i].dot(weights) + bias);
        loss += objective == Objective::logistic ? logistic_loss(z) : std::max(0.0, 1.0 - z);
    }
    return loss / static_cast<double>(x.size()) + 0.5 * reg * squared_norm(weights);
}

void fit_binary(std::span<const SparseVector> x, std::span<const int> targets, double reg, const TrainConfig& cfg,
                std::vector<double>& weights, double& bias, FitTrace* trace) {
    if (x.empty()) throw ShapeError("cannot fit on an empty training set");
    const auto dim = static_cast<std::size_t>(x.front().dim);
    weights.assign(dim, 0.0);
    bias = 0.0;
    std::vector<double> grad(dim);
    std::vector<double> candidate(dim);
    double grad_b = 0.0;

    if (cfg.objective == Objective::logistic) {
        double step = cfg.learning_rate;
        double loss = objective_and_gradient(x, targets, reg, cfg.objective, weights, bias, grad, grad_b);
        if (trace) trace->loss.push_back(loss);
        for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
            const double grad_sq = squared_norm(grad) + grad_b * grad_b;
            if (grad_sq == 0.0) break;
            double next_loss = loss;
            bool accepted = false;
            while (step > 1e-16) {
                for (std::size_t k = 0; k < dim; ++k) candidate[k] = weights[k] - step * grad[k];
                const double candidate_b = bias - step * grad_b;
                next_loss = binary_objective(x, targets, reg, cfg.objective, candidate, candidate_b);
                if (next_loss <= loss - 0.5 * step * grad_sq) {
                    weights.swap(candidate);
                    bias = candidate_b;
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            if (!accepted) break;
            step *= 2.0;
            const double improvement = loss - next_loss;
            loss = objective_and_gradient(x, targets, reg, cfg.objective, weights, bias, grad, grad_b);
            if (trace) trace->loss.push_back(loss);
            if (improvement < cfg.tolerance * std::max(1.0, std::abs(loss))) break;
        }
        return;
    }

    // Hinge: subgradient steps lr / sqrt(t + 1), keeping the best iterate.
    std::vector<double> current(dim, 0.0);
    double current_b = 0.0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t epoch = 0; epoch <= cfg.epochs; ++epoch) {
        const double loss = objective_and_gradient(x, targets, reg, cfg.objective, current, current_b, grad, grad_b);
        if (loss < best) {
            best = loss;
            weights = current;
            bias = current_b;
        }
        if (trace) trace->loss.push_back(best);
        if (epoch == cfg.epochs) break;
        const double step = cfg.learning_rate / std::sqrt(static_cast<double>(epoch) + 1.0);
        for (std::size_t k = 0; k < dim; ++k) current[k] -= step * grad[k];
        current_b -= step * grad_b;
    }
}

namespace {

void check_inputs(std::span<const SparseVector> x, std::span<const std::string> y) {
    if (x.size() != y.size()) {
        throw ShapeError(std::to_string(x.size()) + " vectors but " + std::to_string(y.size()) + " labels");
    }
    if (x.empty()) throw ShapeError("empty training set");
    for (const auto& v : x) {
        if (v.dim != x.front().dim) throw ShapeError("training vectors differ in dimension");
    }
}

std::vector<std::string> distinct_sorted(std::span<const std::string> y) {
    std::set<std::string> s(y.begin(), y.end());
    return {s.begin(), s.end()};
}

}  // namespace

Estimator fit_estimator(std::span<const SparseVector> x, std::span<const std::string> y, double reg,
                        const TrainConfig& cfg, std::span<const std::string> classes) {
    check_inputs(x, y);
    Estimator est;
    est.classes = classes.empty() ? distinct_sorted(y) : std::vector<std::string>(classes.begin(), classes.end());
    if (est.classes.size() < 2) throw DegenerateLabelError("training needs at least two classes");
    est.reg = reg;
    est.config = cfg;
    const std::size_t problems = est.classes.size() == 2 ? 1 : est.classes.size();
    est.weights.resize(problems);
    est.biases.resize(problems);
    parallel_for(problems, [&](std::size_t p) {
        const auto& positive = problems == 1 ? est.classes[1] : est.classes[p];
        std::vector<int> targets(y.size());
        for (std::size_t i = 0; i < y.size(); ++i) targets[i] = y[i] == positive ? 1 : -1;
        fit_binary(x, targets, reg, cfg, est.weights[p], est.biases[p]);
    });
    return est;
}

std::vector<std::size_t> stratified_folds(std::span<const std::string> y, std::size_t folds, std::uint64_t seed) {
    std::map<std::string, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < y.size(); ++i) by_class[y[i]].push_back(i);
    std::vector<std::size_t> fold(y.size());
    Rng rng(seed);
    std::size_t next = 0;
    for (auto& [label, members] : by_class) {
        rng.shuffle(members);
        for (const auto i : members) fold[i] = next++ % folds;
    }
    return fold;
}

Estimator train_classifier(std::span<const SparseVector> x, std::span<const std::string> y, const TrainConfig& cfg) {
    check_inputs(x, y);
    if (cfg.reg_grid.empty()) throw ConfigError("regularization grid is empty");
    if (cfg.folds < 2) throw ConfigError("cross validation needs at least 2 folds");
    const auto classes = distinct_sorted(y);
    if (classes.size() < 2) throw DegenerateLabelError("training needs at least two classes");
    if (x.size() < cfg.folds) {
        throw ShapeError(std::to_string(x.size()) + " samples cannot fill " + std::to_string(cfg.folds) + " folds");
    }

    const auto fold = stratified_folds(y, cfg.folds, cfg.seed);
    const std::size_t tasks = cfg.reg_grid.size() * cfg.folds;
    std::vector<double> fold_score(tasks, 0.0);
    parallel_for(tasks, [&](std::size_t task) {
        const std::size_t g = task / cfg.folds;
        const std::size_t f = task % cfg.folds;
        std::vector<SparseVector> train_x;
        std::vector<std::string> train_y;
        std::vector<std::string> held_true;
        std::vector<std::size_t> held;
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (fold[i] == f) {
                held.push_back(i);
                held_true.push_back(y[i]);
            } else {
                train_x.push_back(x[i]);
                train_y.push_back(y[i]);
            }
        }
        const auto model = fit_estimator(train_x, train_y, cfg.reg_grid[g], cfg, classes);
        std::vector<std::string> held_pred;
        held_pred.reserve(held.size());
        for (const auto i : held) held_pred.push_back(predict_label(model, x[i]));
        fold_score[task] = balanced_accuracy(held_true, held_pred);
    });

    std::vector<GridScore> grid;
    for (std::size_t g = 0; g < cfg.reg_grid.size(); ++g) {
        double mean = 0.0;
        for (std::size_t f = 0; f < cfg.folds; ++f) mean += fold_score[g * cfg.folds + f];
        grid.push_back({cfg.reg_grid[g], mean / static_cast<double>(cfg.folds)});
    }
    std::size_t best = 0;
    for (std::size_t g = 1; g < grid.size(); ++g) {
        const bool better = grid[g].cv_balanced_accuracy > grid[best].cv_balanced_accuracy;
        const bool tie_smaller = grid[g].cv_balanced_accuracy == grid[best].cv_balanced_accuracy &&
                                 grid[g].reg < grid[best].reg;
        if (better || tie_smaller) best = g;
    }
    auto est = fit_estimator(x, y, grid[best].reg, cfg, classes);
    est.grid_scores = std::move(grid);
    return est;
}

std::string predict_label(const Estimator& e, const SparseVector& x) {
    const auto s = e.scores(x);
    const auto best = std::max_element(s.begin(), s.end());  // first maximum
    return e.classes[static_cast<std::size_t>(best - s.begin())];
}

std::vector<double> predict_proba(const Estimator& e, const SparseVector& x) {
    auto s = e.scores(x);
    const double top = *std::max_element(s.begin(), s.end());
    double total = 0.0;
    for (auto& v : s) {
        v = std::exp(v - top);
        total += v;
    }
    for (auto& v : s) v /= total;
    return s;
}

double predict_probability_of(const Estimator& e, const SparseVector& x, const std::string& label) {
    const auto it = std::find(e.classes.begin(), e.classes.end(), label);
    if (it == e.classes.end()) throw DomainError("estimator has no class '" + label + "'");
    return predict_proba(e, x)[static_cast<std::size_t>(it - e.classes.begin())];
}

MinMaxScaler MinMaxScaler::fit(const FeatureTable& table, std::span<const SampleId> ids) {
    MinMaxScaler s;
    s.min.assign(table.dim(), std::numeric_limits<double>::infinity());
    s.max.assign(table.dim(), -std::numeric_limits<double>::infinity());
    s.fitted_on.assign(ids.begin(), ids.end());
    for (const auto& id : ids) {
        const auto row = table.row(id);
        for (std::size_t k = 0; k < row.size(); ++k) {
            s.min[k] = std::min(s.min[k], row[k]);
            s.max[k] = std::max(s.max[k], row[k]);
        }
    }
    if (ids.empty()) {
        std::fill(s.min.begin(), s.min.end(), 0.0);
        std::fill(s.max.begin(), s.max.end(), 0.0);
    }
    return s;
}

std::vector<double> MinMaxScaler::apply(std::span<const double> row) const {
    std::vector<double> out(row.size());
    for (std::size_t k = 0; k < row.size(); ++k) {
        const double span = max[k] - min[k];
        out[k] = span > 0.0 ? std::clamp((row[k] - min[k]) / span, 0.0, 1.0) : 0.0;
    }
    return out;
}

FeatureTable concat_features(std::span<const FeatureTable> tables, std::span<const SampleId> train_ids,
                             std::vector<MinMaxScaler>* scalers) {
    if (tables.empty()) throw ShapeError("concatenation needs at least one table");
    const auto& first = tables.front();
    std::string name;
    std::size_t dim = 0;
    for (const auto& t : tables) {
        if (t.size() != first.size()) throw ShapeError("alignment error: tables cover different sample sets");
        for (const auto& id : first.ids()) {
            if (!t.contains(id)) {
                throw ShapeError("alignment error: sample '" + id + "' missing from '" + t.descriptor_name() + "'");
            }
        }
        name += (name.empty() ? "" : "+") + t.descriptor_name();
        dim += t.dim();
    }
    std::vector<MinMaxScaler> fitted;
    for (const auto& t : tables) fitted.push_back(MinMaxScaler::fit(t, train_ids));

    FeatureTable out(name, dim);
    std::vector<double> row;
    for (const auto& id : first.ids()) {
        row.clear();
        for (std::size_t k = 0; k < tables.size(); ++k) {
            const auto scaled = fitted[k].apply(tables[k].row(id));
            row.insert(row.end(), scaled.begin(), scaled.end());
        }
        out.add_row(id, row);
    }
    if (scalers) *scalers = std::move(fitted);
    return out;
}

std::vector<std::string> majority_vote(std::span<const std::vector<std::string>> predictions) {
    if (predictions.empty() || predictions.size() % 2 == 0) {
        throw ArityError("majority vote needs an odd number of predictors, got " + std::to_string(predictions.size()));
    }
    const std::size_t n = predictions.front().size();
    for (const auto& p : predictions) {
        if (p.size() != n) throw ShapeError("predictor outputs differ in length");
    }
    std::vector<std::string> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t best_votes = 0;
        for (std::size_t p = 0; p < predictions.size(); ++p) {
            const auto& label = predictions[p][i];
            std::size_t votes = 0;
            for (const auto& q : predictions) votes += q[i] == label ? 1 : 0;
            if (votes > best_votes) {
                best_votes = votes;
                out[i] = label;
            }
        }
    }
    return out;
}

std::vector<SparseVector> sparse_rows(const FeatureTable& table, std::span<const SampleId> ids) {
    std::vector<SparseVector> out;
    out.reserve(ids.size());
    for (const auto& id : ids) {
        const auto row = table.row(id);
        SparseVector v;
        v.dim = static_cast<std::int64_t>(table.dim());
        for (std::size_t k = 0; k < row.size(); ++k) {
            if (row[k] != 0.0) v.entries.push_back({static_cast<std::int64_t>(k), row[k]});
        }
        out.push_back(std::move(v));
    }
    return out;
}

}  // namespace fusegraph
