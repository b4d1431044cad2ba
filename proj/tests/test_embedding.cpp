#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "fusegraph/embedding.hpp"
#include "fusegraph/errors.hpp"
#include "fusegraph/reference.hpp"
#include "support.hpp"

using namespace fusegraph;
using Catch::Matchers::WithinAbs;
using testing_support::oracle_mcs_size;
using testing_support::random_goi;
using testing_support::random_store;

namespace {

GoI goi_of(std::vector<std::string> labels, std::vector<std::pair<std::uint32_t, std::uint32_t>> edges = {}) {
    GoI g;
    g.center = labels.front();
    std::sort(labels.begin(), labels.end());
    for (const auto& l : labels) g.vertices.push_back({l, 1.0});
    for (const auto& [a, b] : edges) g.edges.push_back({a, b, 1.0});
    return g;
}

double gaussian(double x, double sigma) {
    return std::exp(-x * x / (2 * sigma * sigma)) / (sigma * std::sqrt(2 * std::acos(-1.0)));
}

}  // namespace

TEST_CASE("sparse vectors are canonicalized", "[embedding]") {
    const auto v = make_sparse(5, {{3, 1.0}, {1, 2.0}, {3, 0.5}, {4, 0.0}});
    REQUIRE(v.entries.size() == 2);
    CHECK(v.entries[0] == SparseEntry{1, 2.0});
    CHECK(v.entries[1] == SparseEntry{3, 1.5});
    CHECK(v.at(3) == 1.5);
    CHECK(v.at(0) == 0.0);
    CHECK(v.l1_norm() == 3.5);
    CHECK_THROWS_AS(make_sparse(2, {{2, 1.0}}), ShapeError);
}

TEST_CASE("FV-V of an empty graph is the zero vector", "[embedding]") {
    const VocabularyV vocab({"A", "B", "C"});
    const auto v = embed_v(FusionGraph("q", 1, 1, {}, {}), vocab);
    CHECK(v.values.dim == 3);
    CHECK(v.values.entries.empty());
}

TEST_CASE("FV-V places vertex weights at vocabulary indices", "[embedding]") {
    const VocabularyV vocab({"C", "A", "B"});
    const FusionGraph g("q", 2, 1, {{"A", 1.4}, {"B", 0.7}}, {});
    const auto v = embed_v(g, vocab);
    CHECK(v.kind == EmbeddingKind::vertex);
    CHECK(v.values.dim == 3);
    REQUIRE(v.values.entries.size() == 2);
    CHECK(v.values.entries[0] == SparseEntry{0, 1.4});
    CHECK(v.values.entries[1] == SparseEntry{1, 0.7});
}

TEST_CASE("unknown vertices are rejected", "[embedding]") {
    const VocabularyV vocab({"A"});
    const FusionGraph g("q", 1, 1, {{"Z", 1.0}}, {});
    CHECK_THROWS_AS(embed_v(g, vocab), DomainError);
    CHECK_THROWS_AS(embed_h(g, vocab), DomainError);
    CHECK_THROWS_AS(VocabularyV({"A", "A"}), DuplicateError);
}

TEST_CASE("FV-H sums both edge directions into the pair coordinate", "[embedding]") {
    const VocabularyV vocab({"A", "B", "C"});
    const FusionGraph g("q", 1, 2, {{"A", 1.0}, {"B", 0.5}}, {{0, 1, 0.75}, {1, 0, 0.25}});
    const auto h = embed_h(g, vocab);
    CHECK(h.values.dim == 6);
    CHECK(hybrid_dim(3) == 6);
    CHECK(hybrid_pair_index(3, 0, 1) == 3);
    CHECK(hybrid_pair_index(3, 0, 2) == 4);
    CHECK(hybrid_pair_index(3, 1, 2) == 5);
    CHECK(h.values.at(3) == 1.0);
    CHECK(h.values.at(0) == 1.0);
    CHECK(h.values.at(1) == 0.5);

    // flipping the single edge of a one-edge graph leaves the vector unchanged
    const FusionGraph forward("q", 1, 2, {{"A", 1.0}, {"C", 0.5}}, {{0, 1, 0.6}});
    const FusionGraph backward("q", 1, 2, {{"A", 1.0}, {"C", 0.5}}, {{1, 0, 0.6}});
    CHECK(embed_h(forward, vocab) == embed_h(backward, vocab));

    // no edges: vertex block only
    const FusionGraph bare("q", 1, 2, {{"A", 1.0}, {"C", 0.5}}, {});
    CHECK(embed_h(bare, vocab).values.entries == embed_v(bare, vocab).values.entries);
}

TEST_CASE("hybrid pair indices enumerate pairs in lexicographic order", "[embedding]") {
    for (std::int64_t n = 1; n < 12; ++n) {
        std::int64_t expected = n;
        for (std::int64_t i = 0; i < n; ++i) {
            for (std::int64_t j = i + 1; j < n; ++j) CHECK(hybrid_pair_index(n, i, j) == expected++);
        }
        CHECK(hybrid_dim(n) == expected);
    }
}

TEST_CASE("GoI of an isolated vertex and of a triangle", "[embedding]") {
    const FusionGraph lone("q", 1, 1, {{"v", 1.0}}, {});
    const auto g1 = extract_gois(lone);
    REQUIRE(g1.size() == 1);
    CHECK(g1[0].vertices.size() == 1);
    CHECK(g1[0].edges.empty());

    // v -> a, v -> b, a -> b, b -> a
    const FusionGraph tri("q", 1, 3, {{"v", 3.0}, {"a", 1.0}, {"b", 2.0}},
                          {{0, 1, 0.5}, {0, 2, 0.25}, {1, 2, 1.0}, {2, 1, 0.5}});
    const auto gois = extract_gois(tri);
    CHECK(gois.size() == 3);
    const auto it = std::find_if(gois.begin(), gois.end(), [](const GoI& g) { return g.center == "v"; });
    REQUIRE(it != gois.end());
    REQUIRE(it->vertices.size() == 3);
    CHECK(it->vertices[0].id == "a");
    CHECK(it->vertices[2].id == "v");
    CHECK(it->vertices[2].weight == 3.0);
    REQUIRE(it->edges.size() == 3);
    // a-b carries both directions
    CHECK(it->edges[0] == GoiEdge{0, 1, 1.5});

    // a reaches only b, so its GoI is {a, b}
    const auto of_a = std::find_if(gois.begin(), gois.end(), [](const GoI& g) { return g.center == "a"; });
    CHECK(of_a->vertices.size() == 2);

    // with in-neighbours a also pulls in v
    const auto both = extract_gois(tri, GoiOptions{true});
    const auto of_a2 = std::find_if(both.begin(), both.end(), [](const GoI& g) { return g.center == "a"; });
    CHECK(of_a2->vertices.size() == 3);
}

TEST_CASE("MCS distance hand values", "[embedding]") {
    const auto abc = goi_of({"a", "b", "c"});
    CHECK(mcs_distance(abc, abc) == 0.0);
    CHECK(mcs_distance(abc, goi_of({"x", "y"})) == 1.0);
    CHECK_THAT(mcs_distance(abc, goi_of({"b", "c", "d"})), WithinAbs(1.0 / 3.0, 1e-15));
    CHECK_THROWS_AS(mcs_distance(abc, GoI{}), DomainError);

    // with edges counted: a-b present in both, b-c only in the first
    const auto left = goi_of({"a", "b", "c"}, {{0, 1}, {1, 2}});
    const auto right = goi_of({"a", "b"}, {{0, 1}});
    CHECK_THAT(mcs_distance(left, right, McsSize::vertices_and_edges), WithinAbs(1.0 - 3.0 / 5.0, 1e-15));
}

TEST_CASE("MCS distance agrees with exhaustive search", "[embedding][property]") {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 300; ++trial) {
        const auto a = random_goi(rng, 6, 9);
        const auto b = random_goi(rng, 6, 9);
        for (const bool edges : {false, true}) {
            const auto mode = edges ? McsSize::vertices_and_edges : McsSize::vertices;
            const double denom = static_cast<double>(
                std::max(a.vertices.size() + (edges ? a.edges.size() : 0), b.vertices.size() + (edges ? b.edges.size() : 0)));
            const double d = mcs_distance(a, b, mode);
            CHECK(d == 1.0 - static_cast<double>(oracle_mcs_size(a, b, edges)) / denom);
            CHECK(d == mcs_distance(b, a, mode));
            CHECK(d >= 0.0);
            CHECK(d <= 1.0);
        }
        CHECK(mcs_distance(a, a) == 0.0);
    }
}

TEST_CASE("codebook from identical GoIs has one word", "[embedding]") {
    const std::vector<GoI> gois(5, goi_of({"a", "b"}));
    const auto book = build_codebook(gois, {});
    CHECK(book.dim() == 1);
    CHECK(book.bandwidth > 0.0);
}

TEST_CASE("two far groups give two words", "[embedding]") {
    std::vector<GoI> gois;
    for (int i = 0; i < 3; ++i) gois.push_back(goi_of({"a", "b"}));
    for (int i = 0; i < 3; ++i) gois.push_back(goi_of({"x", "y"}));
    CodebookOptions options;
    options.bandwidth = 0.5;
    const auto book = build_codebook(gois, options);
    REQUIRE(book.dim() == 2);
    CHECK(book.words[0].vertices[0].id == "a");
    CHECK(book.words[1].vertices[0].id == "x");
    CHECK(book.sigma == 0.25);
}

TEST_CASE("one training GoI gives one word equal to it", "[embedding]") {
    std::vector<GoI> gois{goi_of({"a"}), goi_of({"b", "c"}), goi_of({"d"})};
    CodebookOptions options;
    options.max_training_gois = 1;
    options.seed = 9;
    const auto book = build_codebook(gois, options);
    REQUIRE(book.dim() == 1);
    CHECK(std::find(gois.begin(), gois.end(), book.words[0]) != gois.end());
}

TEST_CASE("codebook parameters are validated", "[embedding]") {
    const std::vector<GoI> gois{goi_of({"a"})};
    CodebookOptions bad;
    bad.bandwidth = 0.0;
    CHECK_THROWS_AS(build_codebook(gois, bad), DomainError);
    bad.bandwidth = -1.0;
    CHECK_THROWS_AS(build_codebook(gois, bad), DomainError);
    CHECK_THROWS_AS(build_codebook(std::vector<GoI>{}, {}), DomainError);
}

TEST_CASE("medoid shift follows chains and breaks cycles at the smallest index", "[embedding]") {
    // 1-D points 0, 1, 2, 10 with bandwidth 1.5; point 0 ties between 0 and 1
    const std::vector<double> x{0, 1, 2, 10};
    std::vector<double> d(16);
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = 0; j < 4; ++j) d[i * 4 + j] = std::abs(x[i] - x[j]);
    }
    const auto t = medoid_shift_targets(d, 4, 1.5);
    CHECK(t == std::vector<std::size_t>{0, 1, 1, 3});
    CHECK(t == reference::medoid_shift_targets(d, 4, 1.5));
}

TEST_CASE("soft assignment hand values", "[embedding]") {
    Codebook one;
    one.words = {goi_of({"a"})};
    one.sigma = 1.0;
    const auto r1 = soft_assign(goi_of({"z"}), one);
    REQUIRE(r1.size() == 1);
    CHECK(r1[0] == 1.0);

    // distances 0 and 1 from the query, sigma 1
    Codebook two;
    two.words = {goi_of({"a", "b"}), goi_of({"x", "y"})};
    two.sigma = 1.0;
    const auto r2 = soft_assign(goi_of({"a", "b"}), two);
    const double k0 = gaussian(0, 1);
    const double k1 = gaussian(1, 1);
    CHECK_THAT(k0, WithinAbs(0.3989, 1e-4));
    CHECK_THAT(k1, WithinAbs(0.2420, 1e-4));
    CHECK_THAT(r2[0], WithinAbs(k0 / (k0 + k1), 1e-12));
    CHECK_THAT(r2[1], WithinAbs(k1 / (k0 + k1), 1e-12));
    CHECK_THAT(r2[0], WithinAbs(0.6225, 1e-4));

    // equidistant query
    const auto r3 = soft_assign(goi_of({"a", "x"}), two);
    CHECK_THAT(r3[0], WithinAbs(0.5, 1e-15));
    CHECK_THAT(r3[1], WithinAbs(0.5, 1e-15));
}

TEST_CASE("soft assignment tends to uniform for huge sigma", "[embedding][property]") {
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 20; ++trial) {
        Codebook book;
        const std::size_t d = 1 + rng() % 6;
        for (std::size_t j = 0; j < d; ++j) book.words.push_back(random_goi(rng, 5, 8));
        book.sigma = 1e6;
        const auto row = soft_assign(random_goi(rng, 5, 8), book);
        for (const double v : row) CHECK_THAT(v, WithinAbs(1.0 / static_cast<double>(d), 1e-3));
    }
}

TEST_CASE("FV-K of a single vertex against a single word", "[embedding]") {
    Codebook book;
    book.words = {goi_of({"a"})};
    book.sigma = 0.5;
    const auto v = embed_k(FusionGraph("q", 1, 1, {{"v", 1.0}}, {}), book);
    CHECK(v.kind == EmbeddingKind::kernel);
    REQUIRE(v.values.entries.size() == 1);
    CHECK(v.values.entries[0].value == 1.0);
    CHECK_THROWS_AS(embed_k(FusionGraph("q", 1, 1, {}, {}), book), DomainError);
}

TEST_CASE("FV-K averages the GoI assignments", "[embedding]") {
    // two isolated vertices, each identical to one of two far-apart words; tiny sigma makes rows one-hot
    Codebook book;
    book.words = {goi_of({"a"}), goi_of({"b"})};
    book.sigma = 1e-3;
    const auto v = embed_k(FusionGraph("q", 1, 1, {{"a", 1.0}, {"b", 1.0}}, {}), book);
    CHECK_THAT(v.values.at(0), WithinAbs(0.5, 1e-12));
    CHECK_THAT(v.values.at(1), WithinAbs(0.5, 1e-12));
}

TEST_CASE("embedding invariants on random fusion graphs", "[embedding][property]") {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t n = 3 + rng() % 25;
        const std::size_t m = 1 + rng() % 3;
        const std::size_t L = 1 + rng() % 5;
        const auto store = random_store(rng, n, m, L);
        const VocabularyV vocab(store.ids());
        std::vector<FusionGraph> graphs;
        for (const auto& id : store.ids()) graphs.push_back(extract_fusion_graph(store.ranks_of(id), store, L));
        std::vector<GoI> gois;
        for (const auto& g : graphs) {
            const auto part = extract_gois(g);
            CHECK(part.size() == g.vertices().size());
            gois.insert(gois.end(), part.begin(), part.end());
        }
        if (gois.empty()) continue;
        CodebookOptions options;
        options.seed = rng();
        options.max_training_gois = 40;
        const auto book = build_codebook(gois, options);
        CHECK(book.dim() >= 1);

        for (const auto& g : graphs) {
            const auto v = embed_v(g, vocab);
            CHECK(v.values.entries.size() <= m * L);
            for (const auto& vert : g.vertices()) CHECK(v.values.at(static_cast<std::int64_t>(vocab.index_of(vert.id))) == vert.weight);
            const auto h = embed_h(g, vocab);
            CHECK(h.values.dim == hybrid_dim(static_cast<std::int64_t>(n)));
            for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) CHECK(h.values.at(i) == v.values.at(i));
            if (g.vertices().empty()) continue;
            const auto k = embed_k(g, book);
            CHECK_THAT(k.values.l1_norm(), WithinAbs(1.0, 1e-9));
            for (const auto& goi : extract_gois(g)) {
                const auto row = soft_assign(goi, book);
                double sum = 0.0;
                for (const double x : row) {
                    CHECK(x > 0.0);
                    sum += x;
                }
                CHECK_THAT(sum, WithinAbs(1.0, 1e-9));
            }
        }
    }
}

TEST_CASE("codebooks are reproducible and words are structurally distinct", "[embedding][property]") {
    std::mt19937_64 rng(21);
    std::vector<GoI> gois;
    for (int i = 0; i < 120; ++i) gois.push_back(random_goi(rng, 5, 7));
    CodebookOptions options;
    options.seed = 5;
    options.max_training_gois = 60;
    const auto a = build_codebook(gois, options);
    const auto b = build_codebook(gois, options);
    CHECK(a == b);
    for (std::size_t i = 0; i < a.words.size(); ++i) {
        for (std::size_t j = i + 1; j < a.words.size(); ++j) {
            const bool same_labels = a.words[i].vertices.size() == a.words[j].vertices.size() &&
                                     std::equal(a.words[i].vertices.begin(), a.words[i].vertices.end(),
                                                a.words[j].vertices.begin(),
                                                [](const Vertex& x, const Vertex& y) { return x.id == y.id; });
            const bool same_edges = a.words[i].edges.size() == a.words[j].edges.size() &&
                                    std::equal(a.words[i].edges.begin(), a.words[i].edges.end(), a.words[j].edges.begin(),
                                               [](const GoiEdge& x, const GoiEdge& y) { return x.a == y.a && x.b == y.b; });
            CHECK_FALSE((same_labels && same_edges));
        }
    }
}

TEST_CASE("parallel and serial distance matrices agree", "[embedding][parallel]") {
    std::mt19937_64 rng(17);
    std::vector<GoI> gois;
    for (int i = 0; i < 70; ++i) gois.push_back(random_goi(rng, 6, 10));
    for (const auto mode : {McsSize::vertices, McsSize::vertices_and_edges}) {
        const auto d = mcs_distance_matrix(gois, mode);
        CHECK(d == reference::mcs_distance_matrix(gois, mode));
        CHECK(medoid_shift_targets(d, gois.size(), 0.6) == reference::medoid_shift_targets(d, gois.size(), 0.6));
    }
}

TEST_CASE("embedding kind and MCS mode names parse", "[embedding]") {
    CHECK(parse_embedding_kind("V") == EmbeddingKind::vertex);
    CHECK(parse_embedding_kind("hybrid") == EmbeddingKind::hybrid);
    CHECK(parse_embedding_kind("K") == EmbeddingKind::kernel);
    CHECK_THROWS_AS(parse_embedding_kind("Q"), ConfigError);
    CHECK(parse_mcs_size(to_string(McsSize::vertices_and_edges)) == McsSize::vertices_and_edges);
}
