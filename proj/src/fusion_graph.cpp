#include "fusegraph/fusion_graph.hpp"

#include <algorithm>
#include <string_view>
#include <unordered_map>

#include "fusegraph/errors.hpp"
#include "fusegraph/parallel.hpp"

namespace fusegraph {

FusionGraph::FusionGraph(SampleId query, std::size_t ranker_count, std::size_t cutoff, std::vector<Vertex> vertices,
                         std::vector<Edge> edges)
    : query_(std::move(query)), ranker_count_(ranker_count), cutoff_(cutoff) {
    // Re-index edges after sorting vertices by id.
    std::vector<std::uint32_t> order(vertices.size());
    for (std::uint32_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return vertices[a].id < vertices[b].id; });
    std::vector<std::uint32_t> remap(vertices.size());
    vertices_.reserve(vertices.size());
    for (std::uint32_t i = 0; i < order.size(); ++i) {
        remap[order[i]] = i;
        vertices_.push_back(std::move(vertices[order[i]]));
    }
    for (std::size_t i = 1; i < vertices_.size(); ++i) {
        if (vertices_[i - 1].id == vertices_[i].id) throw DuplicateError("duplicate vertex '" + vertices_[i].id + "'");
    }
    for (auto& e : edges) {
        if (e.from >= remap.size() || e.to >= remap.size()) throw FormatError("edge endpoint out of range");
        e.from = remap[e.from];
        e.to = remap[e.to];
    }
    std::sort(edges.begin(), edges.end(),
              [](const Edge& a, const Edge& b) { return a.from != b.from ? a.from < b.from : a.to < b.to; });
    for (std::size_t i = 1; i < edges.size(); ++i) {
        if (edges[i - 1].from == edges[i].from && edges[i - 1].to == edges[i].to) {
            throw DuplicateError("duplicate edge in fusion graph of '" + query_ + "'");
        }
    }
    edges_ = std::move(edges);
}

std::optional<std::size_t> FusionGraph::vertex_index(const SampleId& id) const {
    const auto it = std::lower_bound(vertices_.begin(), vertices_.end(), id,
                                     [](const Vertex& v, const SampleId& key) { return v.id < key; });
    if (it == vertices_.end() || it->id != id) return std::nullopt;
    return static_cast<std::size_t>(it - vertices_.begin());
}

double FusionGraph::vertex_weight(const SampleId& id) const {
    const auto i = vertex_index(id);
    return i ? vertices_[*i].weight : 0.0;
}

double FusionGraph::edge_weight(const SampleId& from, const SampleId& to) const {
    const auto a = vertex_index(from);
    const auto b = vertex_index(to);
    if (!a || !b) return 0.0;
    const Edge key{static_cast<std::uint32_t>(*a), static_cast<std::uint32_t>(*b), 0.0};
    const auto it = std::lower_bound(edges_.begin(), edges_.end(), key, [](const Edge& x, const Edge& y) {
        return x.from != y.from ? x.from < y.from : x.to < y.to;
    });
    if (it == edges_.end() || it->from != key.from || it->to != key.to) return 0.0;
    return it->weight;
}

std::span<const Edge> FusionGraph::out_edges(std::size_t v) const {
    const auto from = static_cast<std::uint32_t>(v);
    const auto lo = std::lower_bound(edges_.begin(), edges_.end(), from,
                                     [](const Edge& e, std::uint32_t key) { return e.from < key; });
    const auto hi = std::upper_bound(lo, edges_.end(), from,
                                     [](std::uint32_t key, const Edge& e) { return key < e.from; });
    return {lo, hi};
}

FusionGraph extract_fusion_graph(std::span<const Rank> query_ranks, const RankStore& store, std::size_t cutoff) {
    std::vector<const Rank*> ranks;
    ranks.reserve(query_ranks.size());
    for (const auto& r : query_ranks) ranks.push_back(&r);
    std::sort(ranks.begin(), ranks.end(), [](const Rank* a, const Rank* b) { return a->ranker_index < b->ranker_index; });
    SampleId query = ranks.empty() ? SampleId{} : ranks.front()->query;
    for (const Rank* r : ranks) {
        if (r->query != query) throw ShapeError("query ranks mix queries '" + query + "' and '" + r->query + "'");
    }

    // Vertex weights: sum of similarities over the query's ranks.
    std::vector<Vertex> vertices;
    std::unordered_map<std::string_view, std::uint32_t> index;
    for (const Rank* r : ranks) {
        for (const auto& e : r->entries) {
            auto [it, fresh] = index.try_emplace(e.response, static_cast<std::uint32_t>(vertices.size()));
            if (fresh) vertices.push_back({e.response, 0.0});
            vertices[it->second].weight += e.similarity;
        }
    }

    std::unordered_map<std::uint64_t, double> accumulated;
    for (const Rank* r : ranks) {
        for (const auto& a : r->entries) {
            const auto from = index.at(a.response);
            const double position = static_cast<double>(a.position);
            for (const Rank& of_a : store.ranks_of(a.response)) {
                for (const auto& b : of_a.entries) {
                    const auto to = index.find(b.response);
                    if (to == index.end()) continue;
                    const auto key = (static_cast<std::uint64_t>(from) << 32) | to->second;
                    accumulated[key] += b.similarity / position;
                }
            }
        }
    }

    std::vector<Edge> edges;
    edges.reserve(accumulated.size());
    for (const auto& [key, weight] : accumulated) {
        if (weight <= 0.0) continue;
        edges.push_back({static_cast<std::uint32_t>(key >> 32), static_cast<std::uint32_t>(key & 0xffffffffu), weight});
    }
    return FusionGraph(std::move(query), query_ranks.size(), cutoff, std::move(vertices), std::move(edges));
}

std::vector<FusionGraph> extract_fusion_graphs(std::span<const SampleId> queries, const RankStore& query_store,
                                               const RankStore& response_store, std::size_t cutoff) {
    std::vector<FusionGraph> graphs(queries.size());
    parallel_for(queries.size(), [&](std::size_t i) {
        graphs[i] = extract_fusion_graph(query_store.ranks_of(queries[i]), response_store, cutoff);
    });
    return graphs;
}

GraphStats graph_stats(const FusionGraph& g) {
    GraphStats stats;
    stats.vertex_count = g.vertices().size();
    stats.edge_count = g.edges().size();
    for (const auto& v : g.vertices()) {
        if (!stats.vertex_weights) stats.vertex_weights = WeightRange{v.weight, v.weight};
        stats.vertex_weights->min = std::min(stats.vertex_weights->min, v.weight);
        stats.vertex_weights->max = std::max(stats.vertex_weights->max, v.weight);
    }
    for (const auto& e : g.edges()) {
        if (!stats.edge_weights) stats.edge_weights = WeightRange{e.weight, e.weight};
        stats.edge_weights->min = std::min(stats.edge_weights->min, e.weight);
        stats.edge_weights->max = std::max(stats.edge_weights->max, e.weight);
    }
    return stats;
}

}  // namespace fusegraph
