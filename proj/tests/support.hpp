#pragma once

// Generators and independent oracles shared by the unit and acceptance tests.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <unistd.h>

#include "fusegraph/embedding.hpp"
#include "fusegraph/fusion_graph.hpp"
#include "fusegraph/ranker.hpp"

namespace testing_support {

using namespace fusegraph;

inline std::string sid(std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "x%03zu", i);
    return buf;
}

/// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("fusegraph_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    [[nodiscard]] const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

/// Random normalized ranks: n samples, m rankers, length <= L, no self entries.
/// Similarities are sorted non-increasing in [0,1], with repeats and zeros mixed in.
inline RankStore random_store(std::mt19937_64& rng, std::size_t n, std::size_t m, std::size_t L) {
    RankStore store(m);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::size_t q = 0; q < n; ++q) {
        for (std::size_t k = 0; k < m; ++k) {
            std::vector<std::size_t> others;
            for (std::size_t i = 0; i < n; ++i) {
                if (i != q) others.push_back(i);
            }
            std::shuffle(others.begin(), others.end(), rng);
            const std::size_t len = std::min<std::size_t>(others.size(), rng() % (L + 1));
            std::vector<double> sims(len);
            for (auto& s : sims) {
                const auto r = rng() % 10;
                s = r == 0 ? 0.0 : (r == 1 ? 1.0 : std::round(unit(rng) * 8.0) / 8.0);
            }
            std::sort(sims.begin(), sims.end(), std::greater<>());
            Rank rank;
            rank.query = sid(q);
            rank.ranker_index = k;
            for (std::size_t p = 0; p < len; ++p) {
                rank.entries.push_back({sid(others[p]), 1.0 - sims[p], sims[p], p + 1});
            }
            store.insert(std::move(rank));
        }
    }
    return store;
}

/// Direct transcription of the vertex and edge weight definitions.
struct OracleGraph {
    std::map<SampleId, double> vertices;
    std::map<std::pair<SampleId, SampleId>, double> edges;
};

inline OracleGraph oracle_fusion_graph(const std::vector<Rank>& query_ranks, const RankStore& store) {
    OracleGraph g;
    for (const auto& rank : query_ranks) {
        for (const auto& e : rank.entries) g.vertices[e.response] += e.similarity;
    }
    for (const auto& rank_q : query_ranks) {          // tau_i of q
        for (const auto& a : rank_q.entries) {        // A in tau_i
            for (const auto& rank_a : store.ranks_of(a.response)) {  // tau_j of A
                for (const auto& b : rank_a.entries) {               // B in tau_j
                    if (!g.vertices.contains(b.response)) continue;
                    g.edges[{a.response, b.response}] += b.similarity / static_cast<double>(a.position);
                }
            }
        }
    }
    for (auto it = g.edges.begin(); it != g.edges.end();) {
        it = it->second > 0.0 ? std::next(it) : g.edges.erase(it);
    }
    return g;
}

/// Random uniquely-labeled undirected graph with up to `max_vertices` vertices drawn from a label pool.
inline GoI random_goi(std::mt19937_64& rng, std::size_t max_vertices, std::size_t pool) {
    std::vector<std::size_t> labels(pool);
    for (std::size_t i = 0; i < pool; ++i) labels[i] = i;
    std::shuffle(labels.begin(), labels.end(), rng);
    const std::size_t count = 1 + rng() % max_vertices;
    labels.resize(count);
    std::sort(labels.begin(), labels.end());
    GoI g;
    g.center = sid(labels[rng() % count]);
    for (const auto l : labels) g.vertices.push_back({sid(l), 0.25 + static_cast<double>(rng() % 4)});
    for (std::uint32_t a = 0; a < count; ++a) {
        for (std::uint32_t b = a + 1; b < count; ++b) {
            if (rng() % 2) g.edges.push_back({a, b, 0.5});
        }
    }
    return g;
}

/// Exhaustive common-subgraph search: every partial label-preserving injection of a's
/// vertices into b's, scored by mapped vertices (plus preserved edges when asked).
inline std::size_t oracle_mcs_size(const GoI& a, const GoI& b, bool count_edges) {
    std::set<std::pair<std::uint32_t, std::uint32_t>> edges_b;
    for (const auto& e : b.edges) {
        edges_b.insert({e.a, e.b});
        edges_b.insert({e.b, e.a});
    }
    std::vector<int> map(a.vertices.size(), -1);
    std::vector<bool> used(b.vertices.size(), false);
    std::size_t best = 0;
    auto score = [&] {
        std::size_t s = 0;
        for (const int t : map) s += t >= 0 ? 1 : 0;
        if (count_edges) {
            for (const auto& e : a.edges) {
                if (map[e.a] >= 0 && map[e.b] >= 0 &&
                    edges_b.contains({static_cast<std::uint32_t>(map[e.a]), static_cast<std::uint32_t>(map[e.b])})) {
                    ++s;
                }
            }
        }
        return s;
    };
    auto rec = [&](auto&& self, std::size_t i) -> void {
        if (i == a.vertices.size()) {
            best = std::max(best, score());
            return;
        }
        self(self, i + 1);
        for (std::size_t t = 0; t < b.vertices.size(); ++t) {
            if (used[t] || b.vertices[t].id != a.vertices[i].id) continue;
            used[t] = true;
            map[i] = static_cast<int>(t);
            self(self, i + 1);
            map[i] = -1;
            used[t] = false;
        }
    };
    rec(rec, 0);
    return best;
}

/// AP@K by recounting precision at every relevant position from scratch.
inline double oracle_ap(const std::vector<bool>& rel, std::size_t k) {
    std::size_t total = 0;
    for (const bool r : rel) total += r ? 1 : 0;
    if (total == 0) return 0.0;
    double sum = 0.0;
    for (std::size_t i = 1; i <= k; ++i) {
        if (!rel[i - 1]) continue;
        std::size_t hits = 0;
        for (std::size_t j = 1; j <= i; ++j) hits += rel[j - 1] ? 1 : 0;
        sum += static_cast<double>(hits) / static_cast<double>(i);
    }
    return sum / static_cast<double>(std::min(k, total));
}

}  // namespace testing_support
