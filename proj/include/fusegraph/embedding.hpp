#pragma once

/** \file embedding.hpp
 *  \brief Projection of fusion graphs into sparse fusion vectors.
 *
 * Three embeddings are provided:
 *  - vertex (FV-V): one coordinate per response sample holding its vertex weight;
 *  - hybrid (FV-H): the vertex block followed by one coordinate per unordered
 *    sample pair holding the summed weights of both edge directions;
 *  - kernel (FV-K): a bag-of-graphs histogram, soft-assigning each per-vertex
 *    subgraph (GoI) to a codebook of medoid GoIs and average-pooling.
 */

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "fusegraph/fusion_graph.hpp"

namespace fusegraph {

struct SparseEntry {
    std::int64_t index = 0;
    double value = 0.0;

    friend bool operator==(const SparseEntry&, const SparseEntry&) = default;
};

/// Sparse real vector; entries sorted by strictly increasing index.
struct SparseVector {
    std::int64_t dim = 0;
    std::vector<SparseEntry> entries;

    [[nodiscard]] double dot(std::span<const double> dense) const {
        double acc = 0.0;
        for (const auto& e : entries) acc += e.value * dense[static_cast<std::size_t>(e.index)];
        return acc;
    }
    [[nodiscard]] double l1_norm() const;
    [[nodiscard]] double at(std::int64_t index) const;

    friend bool operator==(const SparseVector&, const SparseVector&) = default;
};

/// Sorts entries by index, sums duplicates and drops zeros.
SparseVector make_sparse(std::int64_t dim, std::vector<SparseEntry> entries);

enum class EmbeddingKind { vertex, hybrid, kernel };

[[nodiscard]] std::string_view to_string(EmbeddingKind kind);
/// Accepts "V"/"H"/"K" or "vertex"/"hybrid"/"kernel".
[[nodiscard]] EmbeddingKind parse_embedding_kind(std::string_view name);

struct FusionVector {
    EmbeddingKind kind = EmbeddingKind::vertex;
    SparseVector values;

    friend bool operator==(const FusionVector&, const FusionVector&) = default;
};

/// Index <-> response sample correspondence; ids are kept sorted.
class VocabularyV {
public:
    VocabularyV() = default;
    explicit VocabularyV(std::vector<SampleId> ids);

    [[nodiscard]] std::size_t size() const noexcept { return ids_.size(); }
    [[nodiscard]] const std::vector<SampleId>& ids() const noexcept { return ids_; }
    /// Throws DomainError for unknown samples.
    [[nodiscard]] std::size_t index_of(const SampleId& id) const;
    [[nodiscard]] bool contains(const SampleId& id) const { return index_.contains(id); }

    friend bool operator==(const VocabularyV& a, const VocabularyV& b) { return a.ids_ == b.ids_; }

private:
    std::vector<SampleId> ids_;
    std::unordered_map<SampleId, std::size_t> index_;
};

FusionVector embed_v(const FusionGraph& g, const VocabularyV& vocab);

/// Dimension n + n(n-1)/2. Self-loops have no pair coordinate and are ignored.
FusionVector embed_h(const FusionGraph& g, const VocabularyV& vocab);

/// Pair coordinate of (i, j), i < j, in the hybrid layout.
[[nodiscard]] std::int64_t hybrid_pair_index(std::int64_t n, std::int64_t i, std::int64_t j);
[[nodiscard]] std::int64_t hybrid_dim(std::int64_t n);

/// Undirected edge between GoI-local vertex indices, a < b.
struct GoiEdge {
    std::uint32_t a = 0;
    std::uint32_t b = 0;
    double weight = 0.0;

    friend bool operator==(const GoiEdge&, const GoiEdge&) = default;
};

/** \brief Graph of interest: a vertex, its out-neighbours and the edges among them.
 *
 * Vertices are sorted by id; edges by (a, b). Vertex and edge weights come
 * from the fusion graph, edge weights summed over both directions.
 */
struct GoI {
    SampleId center;
    std::vector<Vertex> vertices;
    std::vector<GoiEdge> edges;

    friend bool operator==(const GoI&, const GoI&) = default;
};

struct GoiOptions {
    /// Also pull in vertices with an edge into the centre.
    bool include_in_neighbors = false;
};

std::vector<GoI> extract_gois(const FusionGraph& g, const GoiOptions& options = {});

/// What |G| and |mcs| count.
enum class McsSize {
    vertices,            // label-set intersection
    vertices_and_edges,  // plus edges present in both among the common labels
};

[[nodiscard]] std::string_view to_string(McsSize size);
[[nodiscard]] McsSize parse_mcs_size(std::string_view name);

/// 1 - |mcs(a,b)| / max(|a|, |b|). Empty graphs raise DomainError.
double mcs_distance(const GoI& a, const GoI& b, McsSize size = McsSize::vertices);

/// Row-major |gois| x |gois| distance matrix (OpenMP kernel, one row per task).
std::vector<double> mcs_distance_matrix(std::span<const GoI> gois, McsSize size = McsSize::vertices);

struct Codebook {
    std::vector<GoI> words;
    double sigma = 1.0;
    double bandwidth = 1.0;
    McsSize mcs_size = McsSize::vertices;

    [[nodiscard]] std::size_t dim() const noexcept { return words.size(); }

    friend bool operator==(const Codebook&, const Codebook&) = default;
};

struct CodebookOptions {
    /// nullopt selects the median off-diagonal training distance.
    std::optional<double> bandwidth;
    /// nullopt selects bandwidth / 2.
    std::optional<double> sigma;
    std::size_t max_training_gois = 500;
    std::uint64_t seed = 0;
    McsSize mcs_size = McsSize::vertices;
};

/** \brief Medoid-shift over the GoI distance matrix.
 *
 * A uniformly sampled subset of at most max_training_gois GoIs is clustered.
 * Every point points to the member of its neighbourhood (distance strictly
 * below the bandwidth) minimizing the summed squared distance to that
 * neighbourhood, ties to the lowest index; pointer chains are followed to a
 * fixed point, and each distinct fixed point becomes one word.
 */
Codebook build_codebook(std::span<const GoI> gois, const CodebookOptions& options);

/// Next-point map of one medoid-shift round; shared by build_codebook and its reference.
std::vector<std::size_t> medoid_shift_targets(std::span<const double> distances, std::size_t count, double bandwidth);

/// Normalized Gaussian affinities of `s` to every codeword. Sums to 1.
std::vector<double> soft_assign(const GoI& s, const Codebook& codebook);

/// Average-pooled soft assignments of g's GoIs. Empty graphs raise DomainError.
FusionVector embed_k(const FusionGraph& g, const Codebook& codebook, const GoiOptions& options = {});

}  // namespace fusegraph
