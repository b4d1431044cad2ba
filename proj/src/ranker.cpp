#include "fusegraph/ranker.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fusegraph/errors.hpp"
#include "fusegraph/parallel.hpp"

namespace fusegraph {

namespace {

void require_same_length(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size()) {
        throw ShapeError("comparator inputs differ in length (" + std::to_string(u.size()) + " vs " +
                         std::to_string(v.size()) + ")");
    }
}

}  // namespace

std::string_view to_string(Comparator c) {
    switch (c) {
        case Comparator::euclidean: return "euclidean";
        case Comparator::cosine_dissimilarity: return "cosine_dissimilarity";
        case Comparator::weighted_jaccard: return "weighted_jaccard";
        case Comparator::pearson_distance: return "pearson_distance";
    }
    return "unknown";
}

Comparator parse_comparator(std::string_view name) {
    for (auto c : {Comparator::euclidean, Comparator::cosine_dissimilarity, Comparator::weighted_jaccard,
                   Comparator::pearson_distance}) {
        if (to_string(c) == name) return c;
    }
    throw ConfigError("unknown comparator '" + std::string(name) + "'");
}

double weighted_jaccard_distance(std::span<const double> u, std::span<const double> v) {
    require_same_length(u, v);
    double lo = 0.0;
    double hi = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (u[i] < 0.0 || v[i] < 0.0) throw DomainError("weighted Jaccard needs non-negative components");
        lo += std::min(u[i], v[i]);
        hi += std::max(u[i], v[i]);
    }
    if (hi == 0.0) return 0.0;
    return std::clamp(1.0 - lo / hi, 0.0, 1.0);
}

double pearson_distance(std::span<const double> u, std::span<const double> v) {
    require_same_length(u, v);
    if (u.size() < 2) throw DomainError("Pearson distance needs at least 2 components");
    const auto n = static_cast<double>(u.size());
    const double mu = std::accumulate(u.begin(), u.end(), 0.0) / n;
    const double mv = std::accumulate(v.begin(), v.end(), 0.0) / n;
    double cross = 0.0;
    double su = 0.0;
    double sv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double du = u[i] - mu;
        const double dv = v[i] - mv;
        cross += du * dv;
        su += du * du;
        sv += dv * dv;
    }
    if (su == 0.0 || sv == 0.0) throw DomainError("Pearson distance of a constant vector is undefined");
    const double rho = cross / (std::sqrt(su) * std::sqrt(sv));
    return std::clamp(1.0 - rho, 0.0, 2.0);
}

double euclidean_distance(std::span<const double> u, std::span<const double> v) {
    require_same_length(u, v);
    double acc = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double d = u[i] - v[i];
        acc += d * d;
    }
    return std::sqrt(acc);
}

double cosine_dissimilarity(std::span<const double> u, std::span<const double> v) {
    require_same_length(u, v);
    double dot = 0.0;
    double nu = 0.0;
    double nv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        dot += u[i] * v[i];
        nu += u[i] * u[i];
        nv += v[i] * v[i];
    }
    if (nu == 0.0 && nv == 0.0) return 0.0;
    if (nu == 0.0 || nv == 0.0) return 1.0;
    return std::clamp(1.0 - dot / (std::sqrt(nu) * std::sqrt(nv)), 0.0, 2.0);
}

double compare(Comparator c, std::span<const double> u, std::span<const double> v) {
    switch (c) {
        case Comparator::euclidean: return euclidean_distance(u, v);
        case Comparator::cosine_dissimilarity: return cosine_dissimilarity(u, v);
        case Comparator::weighted_jaccard: return weighted_jaccard_distance(u, v);
        case Comparator::pearson_distance: return pearson_distance(u, v);
    }
    throw ConfigError("unknown comparator");
}

Rank compute_rank(std::span<const double> query, const FeatureTable& responses, Comparator comparator,
                  std::size_t cutoff, const std::optional<SampleId>& exclude) {
    if (query.size() != responses.dim()) {
        throw ShapeError("query has " + std::to_string(query.size()) + " values, descriptor '" +
                         responses.descriptor_name() + "' has dim " + std::to_string(responses.dim()));
    }
    struct Candidate {
        double score;
        std::size_t row;
    };
    std::vector<Candidate> candidates;
    candidates.reserve(responses.size());
    for (std::size_t i = 0; i < responses.size(); ++i) {
        const auto& id = responses.ids()[i];
        if (exclude && *exclude == id) continue;
        double score = 0.0;
        try {
            score = compare(comparator, query, responses.row(i));
        } catch (const DomainError& e) {
            throw DomainError(std::string(e.what()) + " (response '" + id + "', descriptor '" +
                              responses.descriptor_name() + "')");
        }
        candidates.push_back({score, i});
    }
    const auto& ids = responses.ids();
    const auto before = [&](const Candidate& a, const Candidate& b) {
        if (a.score != b.score) return a.score < b.score;
        return ids[a.row] < ids[b.row];
    };
    const auto keep = std::min(cutoff, candidates.size());
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(keep), candidates.end(),
                      before);

    Rank rank;
    rank.entries.reserve(keep);
    for (std::size_t k = 0; k < keep; ++k) {
        rank.entries.push_back({ids[candidates[k].row], candidates[k].score, 0.0, k + 1});
    }
    return rank;
}

Rank normalize_rank(Rank rank) {
    if (rank.entries.empty()) return rank;
    const auto [lo, hi] = std::minmax_element(rank.entries.begin(), rank.entries.end(),
                                              [](const RankEntry& a, const RankEntry& b) { return a.raw_score < b.raw_score; });
    const double min_raw = lo->raw_score;
    const double span = hi->raw_score - min_raw;
    for (auto& e : rank.entries) {
        e.similarity = span > 0.0 ? std::clamp(1.0 - (e.raw_score - min_raw) / span, 0.0, 1.0) : 1.0;
    }
    return rank;
}

void RankStore::insert(Rank rank) {
    if (rank.ranker_index >= ranker_count_) {
        throw ShapeError("ranker index " + std::to_string(rank.ranker_index) + " out of range for a store of " +
                         std::to_string(ranker_count_) + " rankers");
    }
    auto& slot = ranks_[rank.query];
    if (slot.empty()) slot.resize(ranker_count_);
    const auto k = rank.ranker_index;
    if (!slot[k].query.empty()) {
        throw DuplicateError("rank (" + rank.query + ", " + std::to_string(k) + ") inserted twice");
    }
    slot[k] = std::move(rank);
}

std::span<const Rank> RankStore::ranks_of(const SampleId& id) const {
    const auto it = ranks_.find(id);
    if (it == ranks_.end()) throw IncompleteError("rank store has no ranks for sample '" + id + "'");
    for (std::size_t k = 0; k < it->second.size(); ++k) {
        if (it->second[k].query.empty()) {
            throw IncompleteError("rank store lacks rank " + std::to_string(k) + " of sample '" + id + "'");
        }
    }
    return it->second;
}

std::vector<SampleId> RankStore::ids() const {
    std::vector<SampleId> out;
    out.reserve(ranks_.size());
    for (const auto& [id, ranks] : ranks_) out.push_back(id);
    return out;
}

std::vector<Rank> RankStore::all_ranks() const {
    std::vector<Rank> out;
    for (const auto& [id, ranks] : ranks_) {
        for (const auto& r : ranks) {
            if (!r.query.empty()) out.push_back(r);
        }
    }
    return out;
}

std::vector<FeatureTable> response_tables_for(const std::map<std::string, FeatureTable>& tables,
                                              std::span<const Ranker> rankers,
                                              std::span<const SampleId> response_ids) {
    std::vector<FeatureTable> out;
    out.reserve(rankers.size());
    for (const auto& ranker : rankers) {
        const auto it = tables.find(ranker.descriptor_name);
        if (it == tables.end()) throw ConfigError("ranker references unknown descriptor '" + ranker.descriptor_name + "'");
        out.push_back(it->second.subset(response_ids));
    }
    return out;
}

std::vector<Rank> rank_query(const SampleId& query, std::span<const FeatureTable* const> query_tables,
                             std::span<const FeatureTable> response_tables, std::span<const Ranker> rankers,
                             const RankOptions& options) {
    std::vector<Rank> out;
    out.reserve(rankers.size());
    const std::optional<SampleId> exclude =
        options.self_exclusion ? std::optional<SampleId>(query) : std::nullopt;
    for (std::size_t k = 0; k < rankers.size(); ++k) {
        const auto row = query_tables[k]->row(query);
        Rank rank = compute_rank(row, response_tables[k], rankers[k].comparator, options.cutoff, exclude);
        rank.query = query;
        rank.ranker_index = k;
        out.push_back(normalize_rank(std::move(rank)));
    }
    return out;
}

RankStore build_rank_store(const std::map<std::string, FeatureTable>& tables, std::span<const Ranker> rankers,
                           std::span<const SampleId> response_ids, const RankOptions& options) {
    const auto responses = response_tables_for(tables, rankers, response_ids);
    const std::size_t m = rankers.size();
    std::vector<Rank> slots(response_ids.size() * m);
    const std::optional<SampleId> none;
    parallel_for(slots.size(), [&](std::size_t task) {
        const std::size_t sample = task / m;
        const std::size_t k = task % m;
        const auto& id = response_ids[sample];
        const auto row = responses[k].row(id);
        Rank rank = compute_rank(row, responses[k], rankers[k].comparator, options.cutoff,
                                 options.self_exclusion ? std::optional<SampleId>(id) : none);
        rank.query = id;
        rank.ranker_index = k;
        slots[task] = normalize_rank(std::move(rank));
    });
    RankStore store(m);
    for (auto& rank : slots) store.insert(std::move(rank));
    return store;
}

}  // namespace fusegraph
