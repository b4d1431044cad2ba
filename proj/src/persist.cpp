#include "fusegraph/persist.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "json.hpp"

#include "fusegraph/errors.hpp"

namespace fusegraph {

using nlohmann::json;

namespace {

void write_header(std::ostream& out, const std::string& artifact, std::size_t count, json extras = json::object()) {
    extras["artifact"] = artifact;
    extras["count"] = count;
    extras["format_version"] = kFormatVersion;
    out << extras.dump() << '\n';
}

void write_record(std::ostream& out, json record) {
    record["format_version"] = kFormatVersion;
    out << record.dump() << '\n';
}

void check_version(const json& j, const std::string& where) {
    if (!j.is_object() || !j.contains("format_version")) throw FormatError(where + ": missing format_version");
    if (j.at("format_version") != kFormatVersion) {
        throw FormatError(where + ": format_version " + j.at("format_version").dump() + ", expected " +
                          std::to_string(kFormatVersion));
    }
}

struct Records {
    json header;
    std::vector<json> items;
};

Records read_records(std::istream& in, const std::string& artifact) {
    Records r;
    std::string line;
    std::size_t line_no = 0;
    try {
        if (!std::getline(in, line)) throw FormatError(artifact + ": empty file");
        ++line_no;
        r.header = json::parse(line);
        check_version(r.header, artifact + " header");
        if (r.header.at("artifact") != artifact) {
            throw FormatError("expected a '" + artifact + "' artifact, found " + r.header.at("artifact").dump());
        }
        const auto count = r.header.at("count").get<std::size_t>();
        r.items.reserve(count);
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty()) continue;
            auto item = json::parse(line);
            check_version(item, artifact + " line " + std::to_string(line_no));
            r.items.push_back(std::move(item));
        }
        if (r.items.size() != count) {
            throw FormatError(artifact + ": header announces " + std::to_string(count) + " records, found " +
                              std::to_string(r.items.size()) + " (truncated?)");
        }
    } catch (const json::exception& e) {
        throw FormatError(artifact + " line " + std::to_string(line_no) + ": " + e.what());
    }
    return r;
}

// Applies `decode` to every record, turning JSON access errors into FormatError.
template <typename T, typename Decode>
std::vector<T> decode_all(const Records& r, const std::string& artifact, Decode&& decode) {
    std::vector<T> out;
    out.reserve(r.items.size());
    try {
        for (const auto& item : r.items) out.push_back(decode(item));
    } catch (const json::exception& e) {
        throw FormatError(artifact + ": " + e.what());
    }
    return out;
}

json rank_to_json(const Rank& rank) {
    json entries = json::array();
    for (const auto& e : rank.entries) entries.push_back(json::array({e.response, e.raw_score, e.similarity, e.position}));
    return {{"query", rank.query}, {"ranker_index", rank.ranker_index}, {"entries", std::move(entries)}};
}

Rank rank_from_json(const json& j) {
    Rank rank;
    rank.query = j.at("query").get<std::string>();
    rank.ranker_index = j.at("ranker_index").get<std::size_t>();
    for (const auto& e : j.at("entries")) {
        rank.entries.push_back({e.at(0).get<std::string>(), e.at(1).get<double>(), e.at(2).get<double>(),
                                e.at(3).get<std::size_t>()});
    }
    return rank;
}

json graph_to_json(const FusionGraph& g) {
    json vertices = json::array();
    for (const auto& v : g.vertices()) vertices.push_back(json::array({v.id, v.weight}));
    json edges = json::array();
    for (const auto& e : g.edges()) {
        edges.push_back(json::array({g.vertices()[e.from].id, g.vertices()[e.to].id, e.weight}));
    }
    return {{"query", g.query()}, {"m", g.ranker_count()}, {"L", g.cutoff()}, {"vertices", std::move(vertices)},
            {"edges", std::move(edges)}};
}

FusionGraph graph_from_json(const json& j) {
    std::vector<Vertex> vertices;
    std::map<std::string, std::uint32_t> index;
    for (const auto& v : j.at("vertices")) {
        index.emplace(v.at(0).get<std::string>(), static_cast<std::uint32_t>(vertices.size()));
        vertices.push_back({v.at(0).get<std::string>(), v.at(1).get<double>()});
    }
    std::vector<Edge> edges;
    for (const auto& e : j.at("edges")) {
        const auto from = index.find(e.at(0).get<std::string>());
        const auto to = index.find(e.at(1).get<std::string>());
        if (from == index.end() || to == index.end()) throw FormatError("edge endpoint is not a vertex");
        edges.push_back({from->second, to->second, e.at(2).get<double>()});
    }
    return FusionGraph(j.at("query").get<std::string>(), j.at("m").get<std::size_t>(), j.at("L").get<std::size_t>(),
                       std::move(vertices), std::move(edges));
}

json goi_to_json(const GoI& goi) {
    json vertices = json::array();
    for (const auto& v : goi.vertices) vertices.push_back(json::array({v.id, v.weight}));
    json edges = json::array();
    for (const auto& e : goi.edges) {
        edges.push_back(json::array({goi.vertices[e.a].id, goi.vertices[e.b].id, e.weight}));
    }
    return {{"center", goi.center}, {"vertices", std::move(vertices)}, {"edges", std::move(edges)}};
}

GoI goi_from_json(const json& j) {
    GoI goi;
    goi.center = j.at("center").get<std::string>();
    std::map<std::string, std::uint32_t> index;
    for (const auto& v : j.at("vertices")) {
        index.emplace(v.at(0).get<std::string>(), static_cast<std::uint32_t>(goi.vertices.size()));
        goi.vertices.push_back({v.at(0).get<std::string>(), v.at(1).get<double>()});
    }
    for (const auto& e : j.at("edges")) {
        const auto a = index.find(e.at(0).get<std::string>());
        const auto b = index.find(e.at(1).get<std::string>());
        if (a == index.end() || b == index.end()) throw FormatError("GoI edge endpoint is not a vertex");
        goi.edges.push_back({a->second, b->second, e.at(2).get<double>()});
    }
    return goi;
}

json sparse_to_json(const SparseVector& v) {
    json entries = json::array();
    for (const auto& e : v.entries) entries.push_back(json::array({e.index, e.value}));
    return entries;
}

SparseVector sparse_from_json(std::int64_t dim, const json& entries) {
    SparseVector v;
    v.dim = dim;
    for (const auto& e : entries) {
        const SparseEntry entry{e.at(0).get<std::int64_t>(), e.at(1).get<double>()};
        if (entry.index < 0 || entry.index >= dim) throw FormatError("sparse index out of range");
        if (!v.entries.empty() && v.entries.back().index >= entry.index) throw FormatError("sparse indices not increasing");
        v.entries.push_back(entry);
    }
    return v;
}

json config_to_json(const TrainConfig& c) {
    return {{"reg_grid", c.reg_grid},   {"folds", c.folds},
            {"epochs", c.epochs},       {"learning_rate", c.learning_rate},
            {"seed", c.seed},           {"objective", std::string(to_string(c.objective))},
            {"tolerance", c.tolerance}};
}

TrainConfig config_from_json(const json& j) {
    TrainConfig c;
    c.reg_grid = j.at("reg_grid").get<std::vector<double>>();
    c.folds = j.at("folds").get<std::size_t>();
    c.epochs = j.at("epochs").get<std::size_t>();
    c.learning_rate = j.at("learning_rate").get<double>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.objective = parse_objective(j.at("objective").get<std::string>());
    c.tolerance = j.at("tolerance").get<double>();
    return c;
}

template <typename Write, typename Value>
void save_file(const std::filesystem::path& path, Write&& write, const Value& value) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    write(out, value);
    if (!out) throw IoError("write failed for " + path.string());
}

std::ifstream open_artifact(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open artifact " + path.string());
    return in;
}

}  // namespace

void write_ranks(std::ostream& out, std::span<const Rank> ranks) {
    write_header(out, "rank", ranks.size());
    for (const auto& r : ranks) write_record(out, rank_to_json(r));
}

std::vector<Rank> read_ranks(std::istream& in) {
    return decode_all<Rank>(read_records(in, "rank"), "rank", rank_from_json);
}

void write_rank_store(std::ostream& out, const RankStore& store) {
    const auto ranks = store.all_ranks();
    write_header(out, "rank_store", ranks.size(), {{"ranker_count", store.ranker_count()}});
    for (const auto& r : ranks) write_record(out, rank_to_json(r));
}

RankStore read_rank_store(std::istream& in) {
    const auto records = read_records(in, "rank_store");
    std::size_t m = 0;
    try {
        m = records.header.at("ranker_count").get<std::size_t>();
    } catch (const json::exception& e) {
        throw FormatError(std::string("rank_store header: ") + e.what());
    }
    RankStore store(m);
    for (auto& rank : decode_all<Rank>(records, "rank_store", rank_from_json)) store.insert(std::move(rank));
    return store;
}

void write_graphs(std::ostream& out, std::span<const FusionGraph> graphs) {
    write_header(out, "fusion_graph", graphs.size());
    for (const auto& g : graphs) write_record(out, graph_to_json(g));
}

std::vector<FusionGraph> read_graphs(std::istream& in) {
    return decode_all<FusionGraph>(read_records(in, "fusion_graph"), "fusion_graph", graph_from_json);
}

void write_vectors(std::ostream& out, const VectorSet& vectors) {
    if (vectors.ids.size() != vectors.vectors.size()) throw ShapeError("vector set ids and vectors differ in length");
    write_header(out, "fusion_vector", vectors.vectors.size());
    for (std::size_t i = 0; i < vectors.ids.size(); ++i) {
        const auto& v = vectors.vectors[i];
        write_record(out, {{"id", vectors.ids[i]},
                           {"kind", std::string(to_string(v.kind))},
                           {"dim", v.values.dim},
                           {"entries", sparse_to_json(v.values)}});
    }
}

VectorSet read_vectors(std::istream& in) {
    const auto records = read_records(in, "fusion_vector");
    VectorSet out;
    try {
        for (const auto& item : records.items) {
            out.ids.push_back(item.at("id").get<std::string>());
            out.vectors.push_back({parse_embedding_kind(item.at("kind").get<std::string>()),
                                   sparse_from_json(item.at("dim").get<std::int64_t>(), item.at("entries"))});
        }
    } catch (const json::exception& e) {
        throw FormatError(std::string("fusion_vector: ") + e.what());
    }
    return out;
}

void write_codebook(std::ostream& out, const Codebook& codebook) {
    write_header(out, "codebook", codebook.words.size(),
                 {{"sigma", codebook.sigma},
                  {"bandwidth", codebook.bandwidth},
                  {"mcs_size", std::string(to_string(codebook.mcs_size))}});
    for (const auto& w : codebook.words) write_record(out, goi_to_json(w));
}

Codebook read_codebook(std::istream& in) {
    const auto records = read_records(in, "codebook");
    Codebook book;
    try {
        book.sigma = records.header.at("sigma").get<double>();
        book.bandwidth = records.header.at("bandwidth").get<double>();
        book.mcs_size = parse_mcs_size(records.header.at("mcs_size").get<std::string>());
    } catch (const json::exception& e) {
        throw FormatError(std::string("codebook header: ") + e.what());
    }
    book.words = decode_all<GoI>(records, "codebook", goi_from_json);
    return book;
}

void write_estimator(std::ostream& out, const Estimator& e) {
    json grid = json::array();
    for (const auto& g : e.grid_scores) grid.push_back(json::array({g.reg, g.cv_balanced_accuracy}));
    write_header(out, "estimator", 1);
    write_record(out, {{"classes", e.classes},
                       {"weights", e.weights},
                       {"biases", e.biases},
                       {"reg", e.reg},
                       {"config", config_to_json(e.config)},
                       {"grid_scores", std::move(grid)}});
}

Estimator read_estimator(std::istream& in) {
    const auto records = read_records(in, "estimator");
    auto all = decode_all<Estimator>(records, "estimator", [](const json& j) {
        Estimator e;
        e.classes = j.at("classes").get<std::vector<std::string>>();
        e.weights = j.at("weights").get<std::vector<std::vector<double>>>();
        e.biases = j.at("biases").get<std::vector<double>>();
        e.reg = j.at("reg").get<double>();
        e.config = config_from_json(j.at("config"));
        for (const auto& g : j.at("grid_scores")) e.grid_scores.push_back({g.at(0).get<double>(), g.at(1).get<double>()});
        if (e.weights.size() != e.biases.size()) throw FormatError("estimator weights and biases differ in count");
        return e;
    });
    if (all.size() != 1) throw FormatError("estimator artifact must hold exactly one record");
    return std::move(all.front());
}

void write_vocabulary(std::ostream& out, const VocabularyV& vocab) {
    write_header(out, "vocabulary", 1);
    write_record(out, {{"ids", vocab.ids()}});
}

VocabularyV read_vocabulary(std::istream& in) {
    auto all = decode_all<VocabularyV>(read_records(in, "vocabulary"), "vocabulary", [](const json& j) {
        return VocabularyV(j.at("ids").get<std::vector<std::string>>());
    });
    if (all.size() != 1) throw FormatError("vocabulary artifact must hold exactly one record");
    return std::move(all.front());
}

void write_split(std::ostream& out, const SplitSpec& split) {
    write_header(out, "split", 1);
    write_record(out, {{"train", split.train}, {"test", split.test}, {"seed", split.seed}});
}

SplitSpec read_split(std::istream& in) {
    auto all = decode_all<SplitSpec>(read_records(in, "split"), "split", [](const json& j) {
        SplitSpec s;
        s.train = j.at("train").get<std::vector<std::string>>();
        s.test = j.at("test").get<std::vector<std::string>>();
        s.seed = j.at("seed").get<std::uint64_t>();
        return s;
    });
    if (all.size() != 1) throw FormatError("split artifact must hold exactly one record");
    return std::move(all.front());
}

void write_scalers(std::ostream& out, std::span<const MinMaxScaler> scalers) {
    write_header(out, "scaler", scalers.size());
    for (const auto& s : scalers) write_record(out, {{"min", s.min}, {"max", s.max}, {"fitted_on", s.fitted_on}});
}

std::vector<MinMaxScaler> read_scalers(std::istream& in) {
    return decode_all<MinMaxScaler>(read_records(in, "scaler"), "scaler", [](const json& j) {
        MinMaxScaler s;
        s.min = j.at("min").get<std::vector<double>>();
        s.max = j.at("max").get<std::vector<double>>();
        s.fitted_on = j.at("fitted_on").get<std::vector<std::string>>();
        return s;
    });
}

void save_rank_store(const std::filesystem::path& path, const RankStore& store) { save_file(path, write_rank_store, store); }
RankStore load_rank_store(const std::filesystem::path& path) {
    auto in = open_artifact(path);
    return read_rank_store(in);
}

void save_graphs(const std::filesystem::path& path, std::span<const FusionGraph> graphs) {
    save_file(path, [](std::ostream& out, std::span<const FusionGraph> g) { write_graphs(out, g); }, graphs);
}
std::vector<FusionGraph> load_graphs(const std::filesystem::path& path) {
    auto in = open_artifact(path);
    return read_graphs(in);
}

void save_vectors(const std::filesystem::path& path, const VectorSet& vectors) { save_file(path, write_vectors, vectors); }
VectorSet load_vectors(const std::filesystem::path& path) {
    auto in = open_artifact(path);
    return read_vectors(in);
}

void save_codebook(const std::filesystem::path& path, const Codebook& codebook) { save_file(path, write_codebook, codebook); }
Codebook load_codebook(const std::filesystem::path& path) {
    auto in = open_artifact(path);
    return read_codebook(in);
}

void save_estimator(const std::filesystem::path& path, const Estimator& estimator) {
    save_file(path, write_estimator, estimator);
}
Estimator load_estimator(const std::filesystem::path& path) {
    auto in = open_artifact(path);
    return read_estimator(in);
}

void save_vocabulary(const std::filesystem::path& path, const VocabularyV& vocab) { save_file(path, write_vocabulary, vocab); }
VocabularyV load_vocabulary(const std::filesystem::path& path) {
    auto in = open_artifact(path);
    return read_vocabulary(in);
}

void save_split(const std::filesystem::path& path, const SplitSpec& split) { save_file(path, write_split, split); }
SplitSpec load_split(const std::filesystem::path& path) {
    auto in = open_artifact(path);
    return read_split(in);
}

void save_scalers(const std::filesystem::path& path, std::span<const MinMaxScaler> scalers) {
    save_file(path, [](std::ostream& out, std::span<const MinMaxScaler> s) { write_scalers(out, s); }, scalers);
}
std::vector<MinMaxScaler> load_scalers(const std::filesystem::path& path) {
    auto in = open_artifact(path);
    return read_scalers(in);
}

std::string text_digest(std::string_view text) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (const unsigned char c : text) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

std::string file_digest(const std::filesystem::path& path) {
    auto in = open_artifact(path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return text_digest(buffer.str());
}

}  // namespace fusegraph
