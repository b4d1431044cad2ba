#pragma once

/** \file ranker.hpp
 *  \brief Comparators, top-L ranks and the per-sample rank store.
 *
 * Every comparator is a dissimilarity. A rank lists the L least dissimilar
 * responses to a query, ties broken by ascending sample id, and after
 * normalization carries per-rank min-max similarities in [0,1].
 */

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fusegraph/dataset.hpp"

namespace fusegraph {

enum class Comparator {
    euclidean,
    cosine_dissimilarity,
    weighted_jaccard,
    pearson_distance,
};

[[nodiscard]] std::string_view to_string(Comparator c);
/// Throws ConfigError for unknown names.
[[nodiscard]] Comparator parse_comparator(std::string_view name);

/// 1 - sum(min)/sum(max). Both-zero inputs give 0. Negative components raise DomainError.
double weighted_jaccard_distance(std::span<const double> u, std::span<const double> v);

/// 1 - Pearson correlation, in [0,2]. Constant inputs raise DomainError.
double pearson_distance(std::span<const double> u, std::span<const double> v);

double euclidean_distance(std::span<const double> u, std::span<const double> v);

/// 1 - cosine similarity, clamped to [0,2]. A zero vector against a non-zero one gives 1.
double cosine_dissimilarity(std::span<const double> u, std::span<const double> v);

double compare(Comparator c, std::span<const double> u, std::span<const double> v);

struct Ranker {
    std::string descriptor_name;
    Comparator comparator = Comparator::euclidean;

    friend bool operator==(const Ranker&, const Ranker&) = default;
};

struct RankEntry {
    SampleId response;
    double raw_score = 0.0;
    double similarity = 0.0;
    std::size_t position = 0;  // 1-based

    friend bool operator==(const RankEntry&, const RankEntry&) = default;
};

struct Rank {
    SampleId query;
    std::size_t ranker_index = 0;
    std::vector<RankEntry> entries;

    [[nodiscard]] std::size_t size() const noexcept { return entries.size(); }
    [[nodiscard]] bool empty() const noexcept { return entries.empty(); }

    friend bool operator==(const Rank&, const Rank&) = default;
};

/** \brief Top-L responses by ascending dissimilarity.
 *
 * Raw scores and positions are filled; similarities are left at 0 until
 * normalize_rank. `exclude` never appears in the output. A comparator
 * DomainError is rethrown with the offending response id attached.
 */
Rank compute_rank(std::span<const double> query, const FeatureTable& responses, Comparator comparator,
                  std::size_t cutoff, const std::optional<SampleId>& exclude = std::nullopt);

/// Fills similarity = 1 - (raw - min)/(max - min) per rank; a constant rank gets all ones.
Rank normalize_rank(Rank rank);

/** \brief m normalized ranks for every response sample.
 *
 * Lookups are by sample id; each id maps to its ranks in ranker order.
 */
class RankStore {
public:
    RankStore() = default;
    explicit RankStore(std::size_t ranker_count) : ranker_count_(ranker_count) {}

    void insert(Rank rank);

    [[nodiscard]] std::size_t ranker_count() const noexcept { return ranker_count_; }
    [[nodiscard]] std::size_t size() const noexcept { return ranks_.size(); }
    [[nodiscard]] bool contains(const SampleId& id) const { return ranks_.contains(id); }

    /// All m ranks of `id`; IncompleteError if any is missing.
    [[nodiscard]] std::span<const Rank> ranks_of(const SampleId& id) const;

    /// Sample ids in ascending order.
    [[nodiscard]] std::vector<SampleId> ids() const;

    /// Flattened in (id, ranker) order.
    [[nodiscard]] std::vector<Rank> all_ranks() const;

    friend bool operator==(const RankStore&, const RankStore&) = default;

private:
    std::size_t ranker_count_ = 0;
    std::map<SampleId, std::vector<Rank>> ranks_;
};

struct RankOptions {
    std::size_t cutoff = 10;
    bool self_exclusion = true;
};

/** \brief Normalized ranks of one query under every ranker.
 *
 * `tables[k]` must hold the response rows of ranker k's descriptor and
 * `query_tables[k]` the query's row. The query id is excluded when
 * self-exclusion is on.
 */
std::vector<Rank> rank_query(const SampleId& query, std::span<const FeatureTable* const> query_tables,
                             std::span<const FeatureTable> response_tables, std::span<const Ranker> rankers,
                             const RankOptions& options);

/** \brief Rank store over `response_ids` (OpenMP kernel).
 *
 * `tables` maps descriptor name to its full feature table. Response tables
 * are restricted to `response_ids` first, so no other sample can surface in a
 * rank. A missing row raises IncompleteError naming (id, descriptor).
 */
RankStore build_rank_store(const std::map<std::string, FeatureTable>& tables, std::span<const Ranker> rankers,
                           std::span<const SampleId> response_ids, const RankOptions& options);

/// Response tables restricted to `response_ids`, one per ranker.
std::vector<FeatureTable> response_tables_for(const std::map<std::string, FeatureTable>& tables,
                                              std::span<const Ranker> rankers,
                                              std::span<const SampleId> response_ids);

}  // namespace fusegraph
