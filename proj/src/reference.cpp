#include "fusegraph/reference.hpp"

#include <limits>

namespace fusegraph::reference {

RankStore build_rank_store(const std::map<std::string, FeatureTable>& tables, std::span<const Ranker> rankers,
                           std::span<const SampleId> response_ids, const RankOptions& options) {
    const auto responses = response_tables_for(tables, rankers, response_ids);
    RankStore store(rankers.size());
    for (const auto& id : response_ids) {
        for (std::size_t k = 0; k < rankers.size(); ++k) {
            Rank rank = compute_rank(responses[k].row(id), responses[k], rankers[k].comparator, options.cutoff,
                                     options.self_exclusion ? std::optional<SampleId>(id) : std::nullopt);
            rank.query = id;
            rank.ranker_index = k;
            store.insert(normalize_rank(std::move(rank)));
        }
    }
    return store;
}

std::vector<FusionGraph> extract_fusion_graphs(std::span<const SampleId> queries, const RankStore& query_store,
                                               const RankStore& response_store, std::size_t cutoff) {
    std::vector<FusionGraph> graphs;
    graphs.reserve(queries.size());
    for (const auto& q : queries) graphs.push_back(extract_fusion_graph(query_store.ranks_of(q), response_store, cutoff));
    return graphs;
}

std::vector<double> mcs_distance_matrix(std::span<const GoI> gois, McsSize size) {
    const std::size_t n = gois.size();
    std::vector<double> d(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            d[i * n + j] = mcs_distance(gois[i], gois[j], size);
            d[j * n + i] = d[i * n + j];
        }
    }
    return d;
}

std::vector<std::size_t> medoid_shift_targets(std::span<const double> distances, std::size_t count, double bandwidth) {
    std::vector<std::size_t> target(count);
    for (std::size_t i = 0; i < count; ++i) {
        std::size_t best = i;
        double best_cost = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < count; ++k) {
            if (!(distances[i * count + k] < bandwidth)) continue;
            double cost = 0.0;
            for (std::size_t j = 0; j < count; ++j) {
                if (distances[i * count + j] < bandwidth) cost += distances[k * count + j] * distances[k * count + j];
            }
            if (cost < best_cost) {
                best_cost = cost;
                best = k;
            }
        }
        target[i] = best;
    }
    return target;
}

}  // namespace fusegraph::reference
