#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "fusegraph/errors.hpp"
#include "fusegraph/fusion_graph.hpp"
#include "fusegraph/reference.hpp"
#include "support.hpp"

using namespace fusegraph;
using Catch::Matchers::WithinAbs;
using testing_support::oracle_fusion_graph;
using testing_support::random_store;

namespace {

Rank make_rank(const SampleId& query, std::size_t k, std::vector<std::pair<SampleId, double>> entries) {
    Rank r;
    r.query = query;
    r.ranker_index = k;
    for (std::size_t p = 0; p < entries.size(); ++p) {
        r.entries.push_back({entries[p].first, 1.0 - entries[p].second, entries[p].second, p + 1});
    }
    return r;
}

// The two-ranker example: A sits at positions 2 and 1 of q's ranks, B once in a rank of A.
struct WorkedExample {
    RankStore store{2};
    std::vector<Rank> query_ranks;
    WorkedExample() {
        query_ranks = {make_rank("q", 0, {{"B", 1.0}, {"A", 0.8}}), make_rank("q", 1, {{"A", 0.6}})};
        store.insert(make_rank("A", 0, {{"B", 0.5}}));
        store.insert(make_rank("A", 1, {}));
        store.insert(make_rank("B", 0, {{"Z", 1.0}}));
        store.insert(make_rank("B", 1, {}));
    }
};

}  // namespace

TEST_CASE("empty ranks give an empty graph", "[fusion_graph]") {
    RankStore store(2);
    const std::vector<Rank> ranks{make_rank("q", 0, {}), make_rank("q", 1, {})};
    const auto g = extract_fusion_graph(ranks, store, 5);
    CHECK(g.vertices().empty());
    CHECK(g.edges().empty());
    const auto stats = graph_stats(g);
    CHECK(stats.vertex_count == 0);
    CHECK(stats.edge_count == 0);
    CHECK_FALSE(stats.vertex_weights.has_value());
    CHECK_FALSE(stats.edge_weights.has_value());
}

TEST_CASE("an edge needs both endpoints to be vertices", "[fusion_graph]") {
    RankStore store(1);
    store.insert(make_rank("A", 0, {{"B", 0.5}}));
    const std::vector<Rank> ranks{make_rank("q", 0, {{"A", 0.9}})};
    const auto g = extract_fusion_graph(ranks, store, 1);
    REQUIRE(g.vertices().size() == 1);
    CHECK(g.vertex_weight("A") == 0.9);
    CHECK(g.edges().empty());
    const auto stats = graph_stats(g);
    CHECK(stats.vertex_count == 1);
    REQUIRE(stats.vertex_weights.has_value());
    CHECK(stats.vertex_weights->min == 0.9);
    CHECK(stats.vertex_weights->max == 0.9);
}

TEST_CASE("vertex and edge weights of the two-ranker example", "[fusion_graph]") {
    WorkedExample ex;
    const auto g = extract_fusion_graph(ex.query_ranks, ex.store, 2);
    CHECK_THAT(g.vertex_weight("A"), WithinAbs(1.4, 1e-15));
    CHECK(g.vertex_weight("B") == 1.0);
    CHECK_THAT(g.edge_weight("A", "B"), WithinAbs(0.75, 1e-15));
    CHECK(g.edge_weight("B", "A") == 0.0);
    const auto stats = graph_stats(g);
    CHECK(stats.vertex_count == 2);
    CHECK(stats.edge_count == 1);
    CHECK(g.ranker_count() == 2);
    CHECK(g.cutoff() == 2);
    CHECK(g.query() == "q");
}

TEST_CASE("a response without ranks is an incomplete store", "[fusion_graph]") {
    RankStore store(1);
    const std::vector<Rank> ranks{make_rank("q", 0, {{"A", 1.0}})};
    CHECK_THROWS_AS(extract_fusion_graph(ranks, store, 1), IncompleteError);
}

TEST_CASE("ranks of different queries cannot be fused", "[fusion_graph]") {
    RankStore store(2);
    store.insert(make_rank("A", 0, {}));
    store.insert(make_rank("A", 1, {}));
    const std::vector<Rank> ranks{make_rank("q", 0, {{"A", 1.0}}), make_rank("p", 1, {{"A", 1.0}})};
    CHECK_THROWS_AS(extract_fusion_graph(ranks, store, 1), ShapeError);
}

TEST_CASE("graph construction validates its input", "[fusion_graph]") {
    CHECK_THROWS_AS(FusionGraph("q", 1, 1, {{"a", 1}, {"a", 2}}, {}), DuplicateError);
    CHECK_THROWS_AS(FusionGraph("q", 1, 1, {{"a", 1}}, {{0, 3, 1.0}}), FormatError);
    CHECK_THROWS_AS(FusionGraph("q", 1, 1, {{"a", 1}, {"b", 1}}, {{0, 1, 1.0}, {0, 1, 2.0}}), DuplicateError);
    const FusionGraph g("q", 1, 1, {{"b", 1}, {"a", 2}}, {{0, 1, 0.5}});
    CHECK(g.vertices().front().id == "a");
    CHECK(g.edge_weight("b", "a") == 0.5);
    CHECK(g.out_edges(*g.vertex_index("b")).size() == 1);
    CHECK(g.out_edges(*g.vertex_index("a")).empty());
}

TEST_CASE("extraction matches the direct transcription on random instances", "[fusion_graph][property]") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 2 + rng() % 29;
        const std::size_t m = 1 + rng() % 3;
        const std::size_t L = 1 + rng() % 5;
        const auto store = random_store(rng, n, m, L);
        const auto q = store.ids()[rng() % n];
        const auto ranks = store.ranks_of(q);
        const auto g = extract_fusion_graph(ranks, store, L);
        const auto oracle = oracle_fusion_graph({ranks.begin(), ranks.end()}, store);
        REQUIRE(g.vertices().size() == oracle.vertices.size());
        for (const auto& v : g.vertices()) CHECK_THAT(v.weight, WithinAbs(oracle.vertices.at(v.id), 1e-9));
        REQUIRE(g.edges().size() == oracle.edges.size());
        for (const auto& e : g.edges()) {
            const auto& from = g.vertices()[e.from].id;
            const auto& to = g.vertices()[e.to].id;
            CHECK_THAT(e.weight, WithinAbs(oracle.edges.at({from, to}), 1e-9));
        }
    }
}

TEST_CASE("fusion graph invariants on random instances", "[fusion_graph][property]") {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 2 + rng() % 40;
        const std::size_t m = 1 + rng() % 4;
        const std::size_t L = 1 + rng() % 8;
        const auto store = random_store(rng, n, m, L);
        const auto q = store.ids()[rng() % n];
        std::vector<Rank> ranks(store.ranks_of(q).begin(), store.ranks_of(q).end());
        const auto g = extract_fusion_graph(ranks, store, L);

        CHECK(g.vertices().size() <= m * L);
        CHECK(g.edges().size() <= (m * L) * (m * L));
        for (const auto& v : g.vertices()) {
            CHECK(v.weight >= 0.0);
            CHECK(v.weight <= static_cast<double>(m));
            CHECK(v.id != q);
        }
        for (std::size_t i = 1; i < g.vertices().size(); ++i) CHECK(g.vertices()[i - 1].id < g.vertices()[i].id);
        for (const auto& e : g.edges()) {
            CHECK(e.weight > 0.0);
            CHECK(e.from != e.to);
        }

        // shuffling the query's ranks changes nothing
        std::shuffle(ranks.begin(), ranks.end(), rng);
        CHECK(extract_fusion_graph(ranks, store, L) == g);
    }
}

TEST_CASE("vertex sets grow with the cut-off", "[fusion_graph][property]") {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t n = 5 + rng() % 20;
        const std::size_t m = 1 + rng() % 3;
        const auto big = random_store(rng, n, m, 8);
        const std::size_t L = 1 + rng() % 7;
        // prefixes of every rank form the store at the smaller cut-off
        RankStore small(m);
        for (auto r : big.all_ranks()) {
            if (r.entries.size() > L) r.entries.resize(L);
            small.insert(std::move(r));
        }
        const auto q = big.ids()[rng() % n];
        const auto g_small = extract_fusion_graph(small.ranks_of(q), small, L);
        const auto g_big = extract_fusion_graph(big.ranks_of(q), big, 8);
        for (const auto& v : g_small.vertices()) CHECK(g_big.vertex_index(v.id).has_value());
    }
}

TEST_CASE("parallel and serial graph extraction agree", "[fusion_graph][parallel]") {
    std::mt19937_64 rng(31);
    const auto store = random_store(rng, 80, 3, 6);
    const auto ids = store.ids();
    CHECK(extract_fusion_graphs(ids, store, store, 6) == reference::extract_fusion_graphs(ids, store, store, 6));
}
