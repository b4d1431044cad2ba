#pragma once

/** \file fusion_graph.hpp
 *  \brief Rank-fusion graph of one query.
 *
 * Vertices are the union of responses over the query's m ranks, weighted by
 * the sum of their similarities. An edge A->B exists when A and B are both
 * vertices and B occurs in some rank of A; its weight sums, over every rank
 * of the query holding A and every rank of A holding B, the similarity of B
 * in A's rank divided by A's position in the query's rank.
 */

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "fusegraph/ranker.hpp"

namespace fusegraph {

struct Vertex {
    SampleId id;
    double weight = 0.0;

    friend bool operator==(const Vertex&, const Vertex&) = default;
};

/// Directed edge between vertex indices.
struct Edge {
    std::uint32_t from = 0;
    std::uint32_t to = 0;
    double weight = 0.0;

    friend bool operator==(const Edge&, const Edge&) = default;
};

/** \brief Weighted directed graph with unique sample-labeled vertices.
 *
 * Vertices are sorted by id and edges by (from, to), so two graphs holding
 * the same content compare equal and serialize identically.
 */
class FusionGraph {
public:
    FusionGraph() = default;
    /// Sorts and validates: unique labels, edge endpoints in range, no duplicate edges.
    FusionGraph(SampleId query, std::size_t ranker_count, std::size_t cutoff, std::vector<Vertex> vertices,
                std::vector<Edge> edges);

    [[nodiscard]] const SampleId& query() const noexcept { return query_; }
    [[nodiscard]] std::size_t ranker_count() const noexcept { return ranker_count_; }
    [[nodiscard]] std::size_t cutoff() const noexcept { return cutoff_; }
    [[nodiscard]] const std::vector<Vertex>& vertices() const noexcept { return vertices_; }
    [[nodiscard]] const std::vector<Edge>& edges() const noexcept { return edges_; }

    [[nodiscard]] std::optional<std::size_t> vertex_index(const SampleId& id) const;
    /// 0 when absent.
    [[nodiscard]] double vertex_weight(const SampleId& id) const;
    /// 0 when absent.
    [[nodiscard]] double edge_weight(const SampleId& from, const SampleId& to) const;

    /// Indices of out-edges of vertex `v`, contiguous in edges().
    [[nodiscard]] std::span<const Edge> out_edges(std::size_t v) const;

    friend bool operator==(const FusionGraph&, const FusionGraph&) = default;

private:
    SampleId query_;
    std::size_t ranker_count_ = 0;
    std::size_t cutoff_ = 0;
    std::vector<Vertex> vertices_;
    std::vector<Edge> edges_;
};

/** \brief Builds the fusion graph of a query.
 *
 * `query_ranks` are the query's normalized ranks (any order; they are
 * processed by ranker index). Every response id must have its m ranks in
 * `store`, otherwise IncompleteError. Zero-weight edges are dropped.
 */
FusionGraph extract_fusion_graph(std::span<const Rank> query_ranks, const RankStore& store, std::size_t cutoff);

/// Graphs for every query in `queries`, each built from its ranks in `store` (OpenMP kernel).
std::vector<FusionGraph> extract_fusion_graphs(std::span<const SampleId> queries, const RankStore& query_store,
                                               const RankStore& response_store, std::size_t cutoff);

struct WeightRange {
    double min = 0.0;
    double max = 0.0;
    friend bool operator==(const WeightRange&, const WeightRange&) = default;
};

struct GraphStats {
    std::size_t vertex_count = 0;
    std::size_t edge_count = 0;
    std::optional<WeightRange> vertex_weights;
    std::optional<WeightRange> edge_weights;
};

GraphStats graph_stats(const FusionGraph& g);

}  // namespace fusegraph
