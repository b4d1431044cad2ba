#include "fusegraph/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "fusegraph/errors.hpp"
#include "fusegraph/parallel.hpp"
#include "fusegraph/random.hpp"

namespace fusegraph {

double SparseVector::l1_norm() const {
    double acc = 0.0;
    for (const auto& e : entries) acc += std::abs(e.value);
    return acc;
}

double SparseVector::at(std::int64_t index) const {
    const auto it = std::lower_bound(entries.begin(), entries.end(), index,
                                     [](const SparseEntry& e, std::int64_t key) { return e.index < key; });
    return (it != entries.end() && it->index == index) ? it->value : 0.0;
}

SparseVector make_sparse(std::int64_t dim, std::vector<SparseEntry> entries) {
    std::sort(entries.begin(), entries.end(), [](const SparseEntry& a, const SparseEntry& b) { return a.index < b.index; });
    SparseVector out;
    out.dim = dim;
    for (const auto& e : entries) {
        if (e.index < 0 || e.index >= dim) {
            throw ShapeError("sparse index " + std::to_string(e.index) + " outside [0," + std::to_string(dim) + ")");
        }
        if (!out.entries.empty() && out.entries.back().index == e.index) {
            out.entries.back().value += e.value;
        } else {
            out.entries.push_back(e);
        }
    }
    std::erase_if(out.entries, [](const SparseEntry& e) { return e.value == 0.0; });
    return out;
}

std::string_view to_string(EmbeddingKind kind) {
    switch (kind) {
        case EmbeddingKind::vertex: return "V";
        case EmbeddingKind::hybrid: return "H";
        case EmbeddingKind::kernel: return "K";
    }
    return "?";
}

EmbeddingKind parse_embedding_kind(std::string_view name) {
    if (name == "V" || name == "vertex") return EmbeddingKind::vertex;
    if (name == "H" || name == "hybrid") return EmbeddingKind::hybrid;
    if (name == "K" || name == "kernel") return EmbeddingKind::kernel;
    throw ConfigError("unknown embedding kind '" + std::string(name) + "'");
}

VocabularyV::VocabularyV(std::vector<SampleId> ids) : ids_(std::move(ids)) {
    std::sort(ids_.begin(), ids_.end());
    for (std::size_t i = 0; i < ids_.size(); ++i) {
        if (!index_.emplace(ids_[i], i).second) throw DuplicateError("duplicate vocabulary id '" + ids_[i] + "'");
    }
}

std::size_t VocabularyV::index_of(const SampleId& id) const {
    const auto it = index_.find(id);
    if (it == index_.end()) throw DomainError("sample '" + id + "' is not in the vocabulary");
    return it->second;
}

FusionVector embed_v(const FusionGraph& g, const VocabularyV& vocab) {
    std::vector<SparseEntry> entries;
    entries.reserve(g.vertices().size());
    for (const auto& v : g.vertices()) {
        entries.push_back({static_cast<std::int64_t>(vocab.index_of(v.id)), v.weight});
    }
    return {EmbeddingKind::vertex, make_sparse(static_cast<std::int64_t>(vocab.size()), std::move(entries))};
}

std::int64_t hybrid_dim(std::int64_t n) { return n + n * (n - 1) / 2; }

std::int64_t hybrid_pair_index(std::int64_t n, std::int64_t i, std::int64_t j) {
    return n + i * (2 * n - i - 1) / 2 + (j - i - 1);
}

FusionVector embed_h(const FusionGraph& g, const VocabularyV& vocab) {
    const auto n = static_cast<std::int64_t>(vocab.size());
    std::vector<std::int64_t> slot(g.vertices().size());
    std::vector<SparseEntry> entries;
    entries.reserve(g.vertices().size() + g.edges().size());
    for (std::size_t v = 0; v < g.vertices().size(); ++v) {
        slot[v] = static_cast<std::int64_t>(vocab.index_of(g.vertices()[v].id));
        entries.push_back({slot[v], g.vertices()[v].weight});
    }
    for (const auto& e : g.edges()) {
        const auto i = slot[e.from];
        const auto j = slot[e.to];
        if (i == j) continue;
        entries.push_back({hybrid_pair_index(n, std::min(i, j), std::max(i, j)), e.weight});
    }
    return {EmbeddingKind::hybrid, make_sparse(hybrid_dim(n), std::move(entries))};
}

std::vector<GoI> extract_gois(const FusionGraph& g, const GoiOptions& options) {
    const auto& vertices = g.vertices();
    std::vector<std::vector<std::uint32_t>> in_neighbors;
    if (options.include_in_neighbors) {
        in_neighbors.resize(vertices.size());
        for (const auto& e : g.edges()) in_neighbors[e.to].push_back(e.from);
    }

    std::vector<GoI> out;
    out.reserve(vertices.size());
    std::vector<std::int64_t> local(vertices.size(), -1);
    for (std::size_t v = 0; v < vertices.size(); ++v) {
        // Vertex indices of g are id-sorted, so sorting members sorts by id.
        std::vector<std::uint32_t> members{static_cast<std::uint32_t>(v)};
        for (const auto& e : g.out_edges(v)) members.push_back(e.to);
        if (options.include_in_neighbors) members.insert(members.end(), in_neighbors[v].begin(), in_neighbors[v].end());
        std::sort(members.begin(), members.end());
        members.erase(std::unique(members.begin(), members.end()), members.end());

        GoI goi;
        goi.center = vertices[v].id;
        goi.vertices.reserve(members.size());
        for (std::size_t k = 0; k < members.size(); ++k) {
            local[members[k]] = static_cast<std::int64_t>(k);
            goi.vertices.push_back(vertices[members[k]]);
        }
        std::vector<GoiEdge> edges;
        for (const auto member : members) {
            for (const auto& e : g.out_edges(member)) {
                if (local[e.to] < 0 || e.to == e.from) continue;
                const auto a = static_cast<std::uint32_t>(local[e.from]);
                const auto b = static_cast<std::uint32_t>(local[e.to]);
                edges.push_back({std::min(a, b), std::max(a, b), e.weight});
            }
        }
        std::sort(edges.begin(), edges.end(),
                  [](const GoiEdge& x, const GoiEdge& y) { return x.a != y.a ? x.a < y.a : x.b < y.b; });
        for (const auto& e : edges) {
            if (!goi.edges.empty() && goi.edges.back().a == e.a && goi.edges.back().b == e.b) {
                goi.edges.back().weight += e.weight;
            } else {
                goi.edges.push_back(e);
            }
        }
        for (const auto member : members) local[member] = -1;
        out.push_back(std::move(goi));
    }
    return out;
}

std::string_view to_string(McsSize size) {
    return size == McsSize::vertices ? "vertices" : "vertices_and_edges";
}

McsSize parse_mcs_size(std::string_view name) {
    if (name == "vertices") return McsSize::vertices;
    if (name == "vertices_and_edges") return McsSize::vertices_and_edges;
    throw ConfigError("unknown MCS size mode '" + std::string(name) + "'");
}

namespace {

// Common-label positions: pairs (index in a, index in b), walking both sorted lists.
std::vector<std::pair<std::uint32_t, std::uint32_t>> common_labels(const GoI& a, const GoI& b) {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < a.vertices.size() && j < b.vertices.size()) {
        const int c = a.vertices[i].id.compare(b.vertices[j].id);
        if (c == 0) {
            out.emplace_back(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j));
            ++i;
            ++j;
        } else if (c < 0) {
            ++i;
        } else {
            ++j;
        }
    }
    return out;
}

std::size_t common_edges(const GoI& a, const GoI& b, std::span<const std::pair<std::uint32_t, std::uint32_t>> common) {
    std::vector<std::int64_t> a_to_b(a.vertices.size(), -1);
    for (const auto& [ia, ib] : common) a_to_b[ia] = ib;
    std::set<std::pair<std::uint32_t, std::uint32_t>> b_edges;
    for (const auto& e : b.edges) b_edges.emplace(e.a, e.b);
    std::size_t count = 0;
    for (const auto& e : a.edges) {
        if (a_to_b[e.a] < 0 || a_to_b[e.b] < 0) continue;
        const auto x = static_cast<std::uint32_t>(a_to_b[e.a]);
        const auto y = static_cast<std::uint32_t>(a_to_b[e.b]);
        if (b_edges.contains({std::min(x, y), std::max(x, y)})) ++count;
    }
    return count;
}

}  // namespace

double mcs_distance(const GoI& a, const GoI& b, McsSize size) {
    if (a.vertices.empty() || b.vertices.empty()) throw DomainError("MCS distance of an empty graph");
    const auto common = common_labels(a, b);
    std::size_t shared = common.size();
    std::size_t size_a = a.vertices.size();
    std::size_t size_b = b.vertices.size();
    if (size == McsSize::vertices_and_edges) {
        shared += common_edges(a, b, common);
        size_a += a.edges.size();
        size_b += b.edges.size();
    }
    return 1.0 - static_cast<double>(shared) / static_cast<double>(std::max(size_a, size_b));
}

std::vector<double> mcs_distance_matrix(std::span<const GoI> gois, McsSize size) {
    const std::size_t n = gois.size();
    std::vector<double> d(n * n, 0.0);
    parallel_for(n, [&](std::size_t i) {
        for (std::size_t j = i + 1; j < n; ++j) d[i * n + j] = mcs_distance(gois[i], gois[j], size);
    });
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < i; ++j) d[i * n + j] = d[j * n + i];
    }
    return d;
}

std::vector<std::size_t> medoid_shift_targets(std::span<const double> distances, std::size_t count, double bandwidth) {
    std::vector<std::size_t> target(count);
    parallel_for(count, [&](std::size_t i) {
        const auto row = distances.subspan(i * count, count);
        std::vector<std::size_t> neighborhood;
        for (std::size_t j = 0; j < count; ++j) {
            if (row[j] < bandwidth) neighborhood.push_back(j);
        }
        std::size_t best = i;
        double best_cost = std::numeric_limits<double>::infinity();
        for (const auto k : neighborhood) {
            double cost = 0.0;
            for (const auto j : neighborhood) {
                const double dk = distances[k * count + j];
                cost += dk * dk;
            }
            if (cost < best_cost) {
                best_cost = cost;
                best = k;
            }
        }
        target[i] = best;
    });
    return target;
}

namespace {

double auto_bandwidth(std::span<const double> d, std::size_t n) {
    std::vector<double> off;
    off.reserve(n * (n - 1) / 2);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) off.push_back(d[i * n + j]);
    }
    if (off.empty()) return 1.0;
    std::sort(off.begin(), off.end());
    const std::size_t mid = off.size() / 2;
    const double median = off.size() % 2 == 1 ? off[mid] : 0.5 * (off[mid - 1] + off[mid]);
    if (median > 0.0) return median;
    const auto positive = std::upper_bound(off.begin(), off.end(), 0.0);
    return positive != off.end() ? *positive : 1.0;
}

std::size_t follow_to_mode(std::span<const std::size_t> target, std::size_t start) {
    std::vector<std::size_t> path;
    std::set<std::size_t> seen;
    std::size_t at = start;
    while (!seen.contains(at)) {
        seen.insert(at);
        path.push_back(at);
        if (target[at] == at) return at;
        at = target[at];
    }
    // Cycle: the smallest index on it is the mode.
    const auto cycle_start = std::find(path.begin(), path.end(), at);
    return *std::min_element(cycle_start, path.end());
}

}  // namespace

Codebook build_codebook(std::span<const GoI> gois, const CodebookOptions& options) {
    if (gois.empty()) throw DomainError("codebook needs at least one GoI");
    if (options.bandwidth && !(*options.bandwidth > 0.0)) throw DomainError("bandwidth must be positive");
    if (options.sigma && !(*options.sigma > 0.0)) throw DomainError("sigma must be positive");
    if (options.max_training_gois == 0) throw DomainError("max_training_gois must be positive");

    std::vector<std::size_t> chosen(gois.size());
    for (std::size_t i = 0; i < chosen.size(); ++i) chosen[i] = i;
    if (chosen.size() > options.max_training_gois) {
        Rng rng(options.seed);
        rng.shuffle(chosen);
        chosen.resize(options.max_training_gois);
        std::sort(chosen.begin(), chosen.end());
    }
    std::vector<GoI> sample;
    sample.reserve(chosen.size());
    for (const auto i : chosen) sample.push_back(gois[i]);

    const std::size_t n = sample.size();
    const auto d = mcs_distance_matrix(sample, options.mcs_size);
    const double bandwidth = options.bandwidth.value_or(auto_bandwidth(d, n));
    const auto target = medoid_shift_targets(d, n, bandwidth);

    std::set<std::size_t> modes;
    for (std::size_t i = 0; i < n; ++i) modes.insert(follow_to_mode(target, i));

    Codebook book;
    book.bandwidth = bandwidth;
    book.sigma = options.sigma.value_or(bandwidth / 2.0);
    book.mcs_size = options.mcs_size;
    // Structural key: vertex labels plus undirected edge label pairs.
    std::set<std::pair<std::vector<SampleId>, std::vector<std::pair<SampleId, SampleId>>>> keys;
    for (const auto mode : modes) {
        const auto& word = sample[mode];
        std::vector<SampleId> labels;
        for (const auto& v : word.vertices) labels.push_back(v.id);
        std::vector<std::pair<SampleId, SampleId>> edges;
        for (const auto& e : word.edges) edges.emplace_back(labels[e.a], labels[e.b]);
        if (keys.emplace(std::move(labels), std::move(edges)).second) book.words.push_back(word);
    }
    return book;
}

std::vector<double> soft_assign(const GoI& s, const Codebook& codebook) {
    if (codebook.words.empty()) throw DomainError("soft assignment against an empty codebook");
    if (!(codebook.sigma > 0.0)) throw DomainError("sigma must be positive");
    const std::size_t d = codebook.words.size();
    // K(x) = exp(-x^2 / 2s^2) / (s sqrt(2 pi)); the constant cancels in the
    // ratio, and shifting exponents by their maximum keeps the ratio exact.
    std::vector<double> exponent(d);
    for (std::size_t j = 0; j < d; ++j) {
        const double x = mcs_distance(s, codebook.words[j], codebook.mcs_size);
        exponent[j] = -(x * x) / (2.0 * codebook.sigma * codebook.sigma);
    }
    const double top = *std::max_element(exponent.begin(), exponent.end());
    std::vector<double> row(d);
    double total = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        row[j] = std::exp(exponent[j] - top);
        total += row[j];
    }
    for (auto& value : row) value /= total;
    return row;
}

FusionVector embed_k(const FusionGraph& g, const Codebook& codebook, const GoiOptions& options) {
    const auto gois = extract_gois(g, options);
    if (gois.empty()) throw DomainError("kernel embedding of an empty fusion graph (query '" + g.query() + "')");
    std::vector<double> pooled(codebook.dim(), 0.0);
    for (const auto& goi : gois) {
        const auto row = soft_assign(goi, codebook);
        for (std::size_t j = 0; j < row.size(); ++j) pooled[j] += row[j];
    }
    std::vector<SparseEntry> entries;
    for (std::size_t j = 0; j < pooled.size(); ++j) {
        entries.push_back({static_cast<std::int64_t>(j), pooled[j] / static_cast<double>(gois.size())});
    }
    return {EmbeddingKind::kernel, make_sparse(static_cast<std::int64_t>(codebook.dim()), std::move(entries))};
}

}  // namespace fusegraph
