#pragma once

/** \file reference.hpp
 *  \brief Single-threaded counterparts of the OpenMP kernels.
 *
 * Each function computes exactly what its parallel namesake computes, with a
 * plain loop. Tests compare the two for equality; the benchmark times them.
 */

#include <map>
#include <span>
#include <string>
#include <vector>

#include "fusegraph/embedding.hpp"
#include "fusegraph/fusion_graph.hpp"
#include "fusegraph/ranker.hpp"

namespace fusegraph::reference {

RankStore build_rank_store(const std::map<std::string, FeatureTable>& tables, std::span<const Ranker> rankers,
                           std::span<const SampleId> response_ids, const RankOptions& options);

std::vector<FusionGraph> extract_fusion_graphs(std::span<const SampleId> queries, const RankStore& query_store,
                                               const RankStore& response_store, std::size_t cutoff);

std::vector<double> mcs_distance_matrix(std::span<const GoI> gois, McsSize size = McsSize::vertices);

std::vector<std::size_t> medoid_shift_targets(std::span<const double> distances, std::size_t count, double bandwidth);

}  // namespace fusegraph::reference
