#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "fusegraph/errors.hpp"
#include "fusegraph/learn.hpp"
#include "fusegraph/metrics.hpp"

using namespace fusegraph;
using Catch::Matchers::WithinAbs;

namespace {

SparseVector dense(std::vector<double> values) {
    std::vector<SparseEntry> entries;
    for (std::size_t k = 0; k < values.size(); ++k) entries.push_back({static_cast<std::int64_t>(k), values[k]});
    return make_sparse(static_cast<std::int64_t>(values.size()), std::move(entries));
}

struct Toy {
    std::vector<SparseVector> x;
    std::vector<std::string> y;
};

// Two well separated clouds along the first coordinate.
Toy separable(std::size_t per_class, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 0.3);
    Toy t;
    for (std::size_t i = 0; i < per_class; ++i) {
        t.x.push_back(dense({2.0 + noise(rng), noise(rng)}));
        t.y.push_back("pos");
        t.x.push_back(dense({-2.0 + noise(rng), noise(rng)}));
        t.y.push_back("neg");
    }
    return t;
}

Toy one_hot(std::size_t classes, std::size_t per_class) {
    Toy t;
    for (std::size_t c = 0; c < classes; ++c) {
        for (std::size_t i = 0; i < per_class; ++i) {
            std::vector<double> v(classes, 0.0);
            v[c] = 1.0;
            t.x.push_back(dense(v));
            t.y.push_back("c" + std::to_string(c));
        }
    }
    return t;
}

}  // namespace

TEST_CASE("a separable binary problem is learned", "[learn]") {
    const auto t = separable(20, 1);
    const auto est = train_classifier(t.x, t.y, {});
    CHECK(est.binary());
    CHECK(est.classes == std::vector<std::string>{"neg", "pos"});
    std::vector<std::string> pred;
    for (const auto& v : t.x) pred.push_back(predict_label(est, v));
    CHECK(balanced_accuracy(t.y, pred) == 1.0);
    CHECK(predict_label(est, dense({3.0, 0.0})) == "pos");
    CHECK(predict_probability_of(est, dense({3.0, 0.0}), "pos") > 0.5);
}

TEST_CASE("one-hot classes are separated with perfect cross validation", "[learn]") {
    const auto t = one_hot(3, 5);
    TrainConfig cfg;
    cfg.folds = 5;
    const auto est = train_classifier(t.x, t.y, cfg);
    CHECK(est.weights.size() == 3);
    REQUIRE(est.grid_scores.size() == cfg.reg_grid.size());
    double best = 0.0;
    for (const auto& g : est.grid_scores) best = std::max(best, g.cv_balanced_accuracy);
    CHECK(best == 1.0);
    for (std::size_t i = 0; i < t.x.size(); ++i) CHECK(predict_label(est, t.x[i]) == t.y[i]);
}

TEST_CASE("training is deterministic for a fixed seed", "[learn]") {
    const auto t = separable(15, 3);
    TrainConfig cfg;
    cfg.seed = 42;
    CHECK(train_classifier(t.x, t.y, cfg) == train_classifier(t.x, t.y, cfg));
}

TEST_CASE("prediction of a hand-built model", "[learn]") {
    Estimator e;
    e.classes = {"a", "b", "c"};
    e.weights = {{1.0, 0.0}, {0.0, 1.0}, {0.0, 0.0}};
    e.biases = {0.0, 0.0, 0.0};
    const auto x = dense({2.0, 1.0});
    CHECK(predict_label(e, x) == "a");
    const auto p = predict_proba(e, x);
    const double z = std::exp(2.0) + std::exp(1.0) + 1.0;
    CHECK_THAT(p[0], WithinAbs(std::exp(2.0) / z, 1e-12));
    CHECK_THAT(p[2], WithinAbs(1.0 / z, 1e-12));
    // a tie goes to the earlier class
    CHECK(predict_label(e, dense({1.0, 1.0})) == "a");
    CHECK_THROWS_AS(e.scores(dense({1.0})), ShapeError);
    CHECK_THROWS_AS(predict_probability_of(e, x, "zz"), DomainError);

    Estimator bin;
    bin.classes = {"n", "p"};
    bin.weights = {{1.0}};
    bin.biases = {0.5};
    const auto q = predict_proba(bin, dense({0.5}));
    CHECK_THAT(q[1], WithinAbs(1.0 / (1.0 + std::exp(-1.0)), 1e-12));
    CHECK_THAT(q[0] + q[1], WithinAbs(1.0, 1e-15));
}

TEST_CASE("the logistic objective never increases between epochs", "[learn][property]") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> gauss;
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<SparseVector> x;
        std::vector<int> targets;
        for (int i = 0; i < 30; ++i) {
            x.push_back(dense({gauss(rng), gauss(rng), gauss(rng)}));
            targets.push_back(gauss(rng) + x.back().at(0) > 0 ? 1 : -1);
        }
        TrainConfig cfg;
        cfg.epochs = 50;
        std::vector<double> w;
        double b = 0.0;
        FitTrace trace;
        fit_binary(x, targets, 1e-2, cfg, w, b, &trace);
        REQUIRE(trace.loss.size() >= 2);
        for (std::size_t e = 1; e < trace.loss.size(); ++e) CHECK(trace.loss[e] <= trace.loss[e - 1]);
        CHECK_THAT(binary_objective(x, targets, 1e-2, Objective::logistic, w, b), WithinAbs(trace.loss.back(), 1e-12));
    }
}

TEST_CASE("hinge training keeps its best iterate", "[learn]") {
    const auto t = separable(10, 9);
    TrainConfig cfg;
    cfg.objective = Objective::hinge;
    cfg.epochs = 80;
    cfg.learning_rate = 0.5;
    std::vector<int> targets;
    for (const auto& y : t.y) targets.push_back(y == "pos" ? 1 : -1);
    std::vector<double> w;
    double b = 0.0;
    FitTrace trace;
    fit_binary(t.x, targets, 1e-3, cfg, w, b, &trace);
    for (std::size_t e = 1; e < trace.loss.size(); ++e) CHECK(trace.loss[e] <= trace.loss[e - 1]);
    CHECK(binary_objective(t.x, targets, 1e-3, Objective::hinge, w, b) == trace.loss.back());
    CHECK(binary_objective(t.x, targets, 1e-3, Objective::hinge, w, b) < 1.0);
}

TEST_CASE("the selected constant has the best cross-validated score", "[learn][property]") {
    std::mt19937_64 rng(13);
    std::normal_distribution<double> gauss;
    for (int trial = 0; trial < 5; ++trial) {
        Toy t;
        for (int i = 0; i < 40; ++i) {
            const int c = i % 3;
            t.x.push_back(dense({c + gauss(rng), gauss(rng)}));
            t.y.push_back("k" + std::to_string(c));
        }
        TrainConfig cfg;
        cfg.reg_grid = {1e-3, 1e-1, 1.0, 10.0};
        cfg.epochs = 60;
        cfg.seed = rng();
        const auto est = train_classifier(t.x, t.y, cfg);
        for (const auto& g : est.grid_scores) {
            CHECK(g.cv_balanced_accuracy <= [&] {
                for (const auto& h : est.grid_scores) {
                    if (h.reg == est.reg) return h.cv_balanced_accuracy;
                }
                return -1.0;
            }());
        }
    }
}

TEST_CASE("stratified folds balance each class", "[learn]") {
    std::vector<std::string> y;
    for (int i = 0; i < 10; ++i) y.push_back(i < 6 ? "a" : "b");
    const auto fold = stratified_folds(y, 2, 3);
    std::map<std::pair<std::size_t, std::string>, int> count;
    for (std::size_t i = 0; i < y.size(); ++i) ++count[{fold[i], y[i]}];
    CHECK(count[{0, "a"}] == 3);
    CHECK(count[{1, "a"}] == 3);
    CHECK(count[{0, "b"}] + count[{1, "b"}] == 4);
    CHECK(std::abs(count[{0, "b"}] - count[{1, "b"}]) <= 1);
}

TEST_CASE("training rejects degenerate inputs", "[learn]") {
    const std::vector<SparseVector> x{dense({1.0}), dense({2.0}), dense({3.0})};
    const std::vector<std::string> same{"a", "a", "a"};
    CHECK_THROWS_AS(train_classifier(x, same, {}), DegenerateLabelError);
    const std::vector<std::string> short_y{"a", "b"};
    CHECK_THROWS_AS(train_classifier(x, short_y, {}), ShapeError);
    TrainConfig empty_grid;
    empty_grid.reg_grid.clear();
    const std::vector<std::string> y{"a", "b", "a"};
    CHECK_THROWS_AS(train_classifier(x, y, empty_grid), ConfigError);
    const std::vector<SparseVector> mixed{dense({1.0}), dense({2.0, 1.0}), dense({3.0})};
    CHECK_THROWS_AS(fit_estimator(mixed, y, 0.1, {}), ShapeError);
    CHECK_THROWS_AS(parse_objective("svr"), ConfigError);
}

TEST_CASE("concatenation rescales with train statistics only", "[learn]") {
    FeatureTable a("a", 1);
    FeatureTable b("b", 2);
    a.add_row("s1", std::vector<double>{0.0});
    a.add_row("s2", std::vector<double>{10.0});
    a.add_row("s3", std::vector<double>{20.0});
    b.add_row("s1", std::vector<double>{1.0, 5.0});
    b.add_row("s2", std::vector<double>{3.0, 5.0});
    b.add_row("s3", std::vector<double>{-1.0, 5.0});
    const std::vector<FeatureTable> tables{a, b};
    const std::vector<SampleId> train{"s1", "s2"};
    std::vector<MinMaxScaler> scalers;
    const auto out = concat_features(tables, train, &scalers);
    CHECK(out.dim() == 3);
    CHECK(out.descriptor_name() == "a+b");
    const auto s3 = out.row("s3");
    CHECK(s3[0] == 1.0);  // clipped
    CHECK(s3[1] == 0.0);  // clipped
    CHECK(s3[2] == 0.0);  // constant attribute
    CHECK(out.row("s2")[1] == 1.0);
    REQUIRE(scalers.size() == 2);
    CHECK(scalers[0].fitted_on == train);
    CHECK(scalers[1].min == std::vector<double>{1.0, 5.0});

    FeatureTable c("c", 1);
    c.add_row("s1", std::vector<double>{0.0});
    const std::vector<FeatureTable> misaligned{a, c};
    CHECK_THROWS_AS(concat_features(misaligned, train), ShapeError);
}

TEST_CASE("majority vote takes the modal label", "[learn]") {
    const std::vector<std::vector<std::string>> votes{{"a", "x", "p"}, {"a", "y", "q"}, {"b", "y", "r"}};
    CHECK(majority_vote(votes) == std::vector<std::string>{"a", "y", "p"});
    const std::vector<std::vector<std::string>> even{{"a"}, {"b"}};
    CHECK_THROWS_AS(majority_vote(even), ArityError);
    const std::vector<std::vector<std::string>> ragged{{"a"}, {"b", "c"}, {"a"}};
    CHECK_THROWS_AS(majority_vote(ragged), ShapeError);
}

TEST_CASE("sparse rows drop zeros", "[learn]") {
    FeatureTable t("t", 3);
    t.add_row("a", std::vector<double>{0.0, 2.0, 0.0});
    const std::vector<SampleId> ids{"a"};
    const auto rows = sparse_rows(t, ids);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].dim == 3);
    CHECK(rows[0].entries == std::vector<SparseEntry>{{1, 2.0}});
}
