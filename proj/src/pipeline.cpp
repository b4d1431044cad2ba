#include "fusegraph/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "fusegraph/errors.hpp"
#include "fusegraph/parallel.hpp"

namespace fusegraph {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::atomic<bool> g_quiet{false};

void progress(const std::string& message) {
    if (!g_quiet.load()) std::cerr << "[fusegraph] " << message << '\n';
}

// ---- config parsing ----

void reject_unknown(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) throw ConfigError(where + " must be an object");
    for (const auto& [key, value] : obj.items()) {
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* k) { return key == k; })) {
            throw ConfigError("unknown key '" + key + "' in " + where);
        }
    }
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback) {
    if (!obj.contains(key) || obj.at(key).is_null()) return fallback;
    return obj.at(key).get<T>();
}

template <typename T>
std::optional<T> get_optional(const json& obj, const char* key) {
    if (!obj.contains(key) || obj.at(key).is_null()) return std::nullopt;
    return obj.at(key).get<T>();
}

fs::path resolve(const fs::path& base, const fs::path& p) {
    if (p.empty() || p.is_absolute() || base.empty()) return p;
    return base / p;
}

json embedding_to_json(const EmbeddingConfig& e) {
    json j{{"kind", std::string(to_string(e.kind))},
           {"max_training_gois", e.max_training_gois},
           {"goi_in_neighbors", e.goi_in_neighbors},
           {"mcs_size", std::string(to_string(e.mcs_size))}};
    j["bandwidth"] = e.bandwidth ? json(*e.bandwidth) : json(nullptr);
    j["sigma"] = e.sigma ? json(*e.sigma) : json(nullptr);
    return j;
}

json estimator_to_json(const TrainConfig& c) {
    return {{"reg_grid", c.reg_grid},
            {"folds", c.folds},
            {"epochs", c.epochs},
            {"learning_rate", c.learning_rate},
            {"objective", std::string(to_string(c.objective))},
            {"tolerance", c.tolerance}};
}

// Settings that shape training artifacts; paths and reporting options are left out.
json training_settings(const PipelineConfig& cfg) {
    json features = json::array();
    for (const auto& f : cfg.features) features.push_back(f.name);
    json rankers = json::array();
    for (const auto& r : cfg.rankers) {
        rankers.push_back({{"descriptor", r.descriptor_name}, {"comparator", std::string(to_string(r.comparator))}});
    }
    return {{"features", features},
            {"rankers", rankers},
            {"L", cfg.L},
            {"self_exclusion", cfg.self_exclusion},
            {"embedding", embedding_to_json(cfg.embedding)},
            {"estimator", estimator_to_json(cfg.estimator)},
            {"train_fraction", cfg.split.train_fraction},
            {"explicit_split", cfg.split.train_ids.has_value()},
            {"seed", cfg.seed}};
}

// ---- manifest ----

const char* const kManifest = "manifest.json";

struct Manifest {
    std::string config_digest;
    std::string data_digest;
    std::string split_digest;
    std::map<std::string, std::string> artifacts;
};

void write_manifest(const fs::path& dir, const Manifest& m) {
    json j{{"format_version", kFormatVersion},
           {"config_digest", m.config_digest},
           {"data_digest", m.data_digest},
           {"split_digest", m.split_digest},
           {"artifacts", m.artifacts}};
    std::ofstream out(dir / kManifest);
    if (!out) throw IoError("cannot write " + (dir / kManifest).string());
    out << j.dump(2) << '\n';
}

Manifest read_manifest(const fs::path& dir) {
    const auto path = dir / kManifest;
    std::ifstream in(path);
    if (!in) throw CompatibilityError("no training manifest at " + path.string() + "; run the earlier stages first");
    try {
        const auto j = json::parse(in);
        if (j.at("format_version") != kFormatVersion) throw FormatError(path.string() + ": unsupported format_version");
        Manifest m;
        m.config_digest = j.at("config_digest").get<std::string>();
        m.data_digest = j.at("data_digest").get<std::string>();
        m.split_digest = j.at("split_digest").get<std::string>();
        m.artifacts = j.at("artifacts").get<std::map<std::string, std::string>>();
        return m;
    } catch (const json::exception& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

// Manifest of `cfg.output_dir`, checked against the config and the named input artifacts.
Manifest checked_manifest(const PipelineConfig& cfg, std::initializer_list<const char*> inputs) {
    auto m = read_manifest(cfg.output_dir);
    if (m.config_digest != config_digest(cfg)) {
        throw CompatibilityError("artifacts in " + cfg.output_dir.string() +
                                 " were produced under a different config (digest " + m.config_digest + ")");
    }
    for (const char* name : inputs) {
        const auto it = m.artifacts.find(name);
        if (it == m.artifacts.end()) throw CompatibilityError("manifest has no entry for " + std::string(name));
        const auto path = cfg.output_dir / name;
        if (!fs::exists(path)) throw CompatibilityError("artifact " + path.string() + " is missing");
        if (file_digest(path) != it->second) {
            throw CompatibilityError("artifact " + path.string() + " does not match its manifest digest");
        }
    }
    return m;
}

void record(Manifest& m, const fs::path& dir, const std::string& name) {
    m.artifacts[name] = file_digest(dir / name);
}

std::string split_digest(const SplitSpec& split) {
    std::ostringstream out;
    write_split(out, split);
    return text_digest(out.str());
}

std::vector<const FeatureTable*> query_tables_for(const Dataset& data, std::span<const Ranker> rankers) {
    std::vector<const FeatureTable*> out;
    for (const auto& r : rankers) out.push_back(&data.tables.at(r.descriptor_name));
    return out;
}

std::vector<std::string> descriptor_order(const PipelineConfig& cfg) {
    std::vector<std::string> out;
    for (const auto& r : cfg.rankers) {
        if (std::find(out.begin(), out.end(), r.descriptor_name) == out.end()) out.push_back(r.descriptor_name);
    }
    return out;
}

std::string key(const std::string& prefix, const std::string& name) {
    return prefix.empty() ? name : prefix + "." + name;
}

std::vector<std::string> labels_of(const LabelTable& labels, std::span<const SampleId> ids) {
    std::vector<std::string> out;
    out.reserve(ids.size());
    for (const auto& id : ids) out.push_back(labels.label_of(id));
    return out;
}

TrainConfig seeded(const PipelineConfig& cfg) {
    auto c = cfg.estimator;
    c.seed = cfg.seed;
    return c;
}

void write_predictions(const fs::path& path, std::span<const Prediction> predictions,
                       const std::vector<std::string>& classes) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    if (predictions.empty()) return;
    out << "id,predicted";
    for (const auto& c : classes) out << ",p_" << c;
    out << '\n' << std::setprecision(17);
    for (const auto& p : predictions) {
        out << p.id << ',' << p.label;
        for (const double v : p.probabilities) out << ',' << v;
        out << '\n';
    }
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) out.push_back(cell);
    return out;
}

}  // namespace

void set_quiet(bool quiet) { g_quiet.store(quiet); }

// ---- config ----

PipelineConfig parse_config(const std::string& text, const fs::path& base_dir) {
    json j;
    try {
        j = json::parse(text, nullptr, true, true);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    PipelineConfig cfg;
    try {
        reject_unknown(j, "config",
                       {"features", "rankers", "labels", "L", "self_exclusion", "embedding", "estimator", "split", "seed",
                        "output_dir", "positive_label", "cutoffs", "sweep_L", "majority_vote"});
        for (const auto& f : j.at("features")) {
            reject_unknown(f, "features entry", {"name", "path"});
            cfg.features.push_back({f.at("name").get<std::string>(), resolve(base_dir, f.at("path").get<std::string>())});
        }
        for (const auto& r : j.at("rankers")) {
            reject_unknown(r, "rankers entry", {"descriptor", "comparator"});
            cfg.rankers.push_back({r.at("descriptor").get<std::string>(),
                                   parse_comparator(get_or<std::string>(r, "comparator", "euclidean"))});
        }
        cfg.labels = resolve(base_dir, j.at("labels").get<std::string>());
        const auto L = get_or<long long>(j, "L", 10);
        if (L < 1) throw ConfigError("L must be >= 1");
        cfg.L = static_cast<std::size_t>(L);
        cfg.self_exclusion = get_or<bool>(j, "self_exclusion", true);
        if (j.contains("embedding")) {
            const auto& e = j.at("embedding");
            reject_unknown(e, "embedding",
                           {"kind", "bandwidth", "sigma", "max_training_gois", "goi_in_neighbors", "mcs_size"});
            try {
                cfg.embedding.kind = parse_embedding_kind(get_or<std::string>(e, "kind", "V"));
                cfg.embedding.mcs_size = parse_mcs_size(get_or<std::string>(e, "mcs_size", "vertices"));
            } catch (const DomainError& err) {
                throw ConfigError(err.what());
            }
            cfg.embedding.bandwidth = get_optional<double>(e, "bandwidth");
            cfg.embedding.sigma = get_optional<double>(e, "sigma");
            cfg.embedding.max_training_gois = get_or<std::size_t>(e, "max_training_gois", 500);
            cfg.embedding.goi_in_neighbors = get_or<bool>(e, "goi_in_neighbors", false);
        }
        if (j.contains("estimator")) {
            const auto& e = j.at("estimator");
            reject_unknown(e, "estimator", {"reg_grid", "folds", "epochs", "learning_rate", "objective", "tolerance"});
            auto& t = cfg.estimator;
            t.reg_grid = get_or(e, "reg_grid", t.reg_grid);
            t.folds = get_or(e, "folds", t.folds);
            t.epochs = get_or(e, "epochs", t.epochs);
            t.learning_rate = get_or(e, "learning_rate", t.learning_rate);
            t.tolerance = get_or(e, "tolerance", t.tolerance);
            try {
                t.objective = parse_objective(get_or<std::string>(e, "objective", "logistic"));
            } catch (const DomainError& err) {
                throw ConfigError(err.what());
            }
        }
        if (j.contains("split")) {
            const auto& s = j.at("split");
            reject_unknown(s, "split", {"train_fraction", "train_ids", "test_ids"});
            cfg.split.train_fraction = get_or(s, "train_fraction", cfg.split.train_fraction);
            if (auto p = get_optional<std::string>(s, "train_ids")) cfg.split.train_ids = resolve(base_dir, *p);
            if (auto p = get_optional<std::string>(s, "test_ids")) cfg.split.test_ids = resolve(base_dir, *p);
        }
        cfg.seed = get_or<std::uint64_t>(j, "seed", 0);
        cfg.output_dir = resolve(base_dir, get_or<std::string>(j, "output_dir", "out"));
        cfg.positive_label = get_optional<std::string>(j, "positive_label");
        cfg.cutoffs = get_or(j, "cutoffs", cfg.cutoffs);
        cfg.sweep_L = get_or(j, "sweep_L", cfg.sweep_L);
        if (j.contains("majority_vote") && !j.at("majority_vote").is_null()) {
            const auto& v = j.at("majority_vote");
            if (v.is_boolean()) {
                cfg.majority_vote = v.get<bool>();
            } else if (v != "auto") {
                throw ConfigError("majority_vote must be true, false or \"auto\"");
            }
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    validate_config(cfg);
    return cfg;
}

PipelineConfig load_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path.parent_path());
}

void validate_config(const PipelineConfig& cfg) {
    if (cfg.features.empty()) throw ConfigError("no feature tables declared");
    std::set<std::string> names;
    for (const auto& f : cfg.features) {
        if (f.name.empty()) throw ConfigError("feature table with an empty name");
        if (!names.insert(f.name).second) throw ConfigError("descriptor '" + f.name + "' declared twice");
    }
    if (cfg.rankers.empty()) throw ConfigError("at least one ranker is required");
    for (const auto& r : cfg.rankers) {
        if (!names.contains(r.descriptor_name)) {
            throw ConfigError("ranker references undeclared descriptor '" + r.descriptor_name + "'");
        }
    }
    if (cfg.L < 1) throw ConfigError("L must be >= 1");
    if (cfg.labels.empty()) throw ConfigError("no label file declared");
    if (cfg.split.train_ids.has_value() != cfg.split.test_ids.has_value()) {
        throw ConfigError("split needs both train_ids and test_ids, or neither");
    }
    if (!cfg.split.train_ids && !(cfg.split.train_fraction > 0.0 && cfg.split.train_fraction < 1.0)) {
        throw ConfigError("train_fraction must lie in (0,1)");
    }
    if (cfg.estimator.reg_grid.empty()) throw ConfigError("estimator.reg_grid is empty");
    for (const double r : cfg.estimator.reg_grid) {
        if (!(r > 0.0)) throw ConfigError("estimator.reg_grid values must be positive");
    }
    if (cfg.estimator.folds < 2) throw ConfigError("estimator.folds must be >= 2");
    if (cfg.estimator.epochs < 1) throw ConfigError("estimator.epochs must be >= 1");
    if (!(cfg.estimator.learning_rate > 0.0)) throw ConfigError("estimator.learning_rate must be positive");
    if (cfg.embedding.bandwidth && !(*cfg.embedding.bandwidth > 0.0)) {
        throw ConfigError("embedding.bandwidth must be positive");
    }
    if (cfg.embedding.sigma && !(*cfg.embedding.sigma > 0.0)) throw ConfigError("embedding.sigma must be positive");
    if (cfg.embedding.max_training_gois < 1) throw ConfigError("embedding.max_training_gois must be >= 1");
    for (const auto k : cfg.cutoffs) {
        if (k < 1) throw ConfigError("cutoffs must be >= 1");
    }
    for (const auto l : cfg.sweep_L) {
        if (l < 1) throw ConfigError("sweep_L values must be >= 1");
    }
    if (cfg.majority_vote.value_or(false) && descriptor_order(cfg).size() % 2 == 0) {
        throw ArityError("majority vote requested with an even number of descriptors (" +
                         std::to_string(descriptor_order(cfg).size()) + ")");
    }
}

std::string config_digest(const PipelineConfig& cfg) { return text_digest(training_settings(cfg).dump()); }

// ---- data ----

Dataset load_dataset(const PipelineConfig& cfg) {
    Dataset data;
    for (const auto& f : cfg.features) {
        progress("loading descriptor '" + f.name + "' from " + f.path.string());
        data.tables.emplace(f.name, load_features(f.path, f.name));
    }
    data.labels = load_labels(cfg.labels);
    std::vector<FeatureTable> tables;
    for (const auto& [name, t] : data.tables) tables.push_back(t);
    validate_labels(data.labels, tables);
    return data;
}

std::string training_data_digest(const Dataset& data, std::span<const SampleId> train_ids) {
    std::ostringstream out;
    out << std::setprecision(17);
    for (const auto& [name, table] : data.tables) {
        out << "#" << name << ' ' << table.dim() << '\n';
        for (const auto& id : train_ids) {
            const auto i = table.find(id);
            if (!i) continue;
            out << id;
            for (const double v : table.row(*i)) out << ',' << v;
            out << '\n';
        }
    }
    for (const auto& id : train_ids) {
        const auto it = data.labels.rows.find(id);
        out << id << ':' << (it == data.labels.rows.end() ? std::string() : it->second) << '\n';
    }
    return text_digest(out.str());
}

SplitSpec make_split(const PipelineConfig& cfg, const LabelTable& labels) {
    if (!cfg.split.train_ids) return stratified_split(labels, cfg.split.train_fraction, cfg.seed);
    SplitSpec split;
    split.seed = cfg.seed;
    split.train = load_id_list(*cfg.split.train_ids);
    split.test = load_id_list(*cfg.split.test_ids);
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.test.begin(), split.test.end());
    for (auto* side : {&split.train, &split.test}) {
        const auto dup = std::adjacent_find(side->begin(), side->end());
        if (dup != side->end()) throw DuplicateError("split lists sample '" + *dup + "' twice");
    }
    std::vector<SampleId> overlap;
    std::set_intersection(split.train.begin(), split.train.end(), split.test.begin(), split.test.end(),
                          std::back_inserter(overlap));
    if (!overlap.empty()) throw ConfigError("sample '" + overlap.front() + "' is on both sides of the split");
    for (const auto& id : split.train) (void)labels.label_of(id);
    return split;
}

// ---- training ----

RankStore build_train_store(const PipelineConfig& cfg, const Dataset& data, std::span<const SampleId> train_ids) {
    if (train_ids.size() < 2) throw ShapeError("training needs at least two samples");
    return build_rank_store(data.tables, cfg.rankers, train_ids, {cfg.L, cfg.self_exclusion});
}

std::vector<FusionGraph> build_train_graphs(const PipelineConfig& cfg, const RankStore& store) {
    const auto ids = store.ids();
    return extract_fusion_graphs(ids, store, store, cfg.L);
}

std::optional<Codebook> build_train_codebook(const PipelineConfig& cfg, std::span<const FusionGraph> graphs) {
    if (cfg.embedding.kind != EmbeddingKind::kernel) return std::nullopt;
    const GoiOptions goi{cfg.embedding.goi_in_neighbors};
    std::vector<GoI> gois;
    for (const auto& g : graphs) {
        auto part = extract_gois(g, goi);
        gois.insert(gois.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
    }
    CodebookOptions options;
    options.bandwidth = cfg.embedding.bandwidth;
    options.sigma = cfg.embedding.sigma;
    options.max_training_gois = cfg.embedding.max_training_gois;
    options.seed = cfg.seed;
    options.mcs_size = cfg.embedding.mcs_size;
    return build_codebook(gois, options);
}

FusionVector embed_graph(const FusionGraph& g, const EmbeddingConfig& cfg, const VocabularyV& vocabulary,
                         const Codebook* codebook) {
    switch (cfg.kind) {
        case EmbeddingKind::vertex:
            return embed_v(g, vocabulary);
        case EmbeddingKind::hybrid:
            return embed_h(g, vocabulary);
        case EmbeddingKind::kernel:
            if (!codebook) throw CompatibilityError("kernel embedding without a codebook");
            return embed_k(g, *codebook, GoiOptions{cfg.goi_in_neighbors});
    }
    throw DomainError("unknown embedding kind");
}

VectorSet embed_graphs(std::span<const FusionGraph> graphs, const EmbeddingConfig& cfg,
                       const VocabularyV& vocabulary, const Codebook* codebook) {
    VectorSet out;
    out.ids.resize(graphs.size());
    out.vectors.resize(graphs.size());
    parallel_for(graphs.size(), [&](std::size_t i) {
        out.ids[i] = graphs[i].query();
        out.vectors[i] = embed_graph(graphs[i], cfg, vocabulary, codebook);
    });
    return out;
}

Estimator train_estimator(const PipelineConfig& cfg, const LabelTable& labels, const VectorSet& vectors) {
    std::vector<SparseVector> x;
    x.reserve(vectors.vectors.size());
    for (const auto& v : vectors.vectors) x.push_back(v.values);
    const auto y = labels_of(labels, vectors.ids);
    return train_classifier(x, y, seeded(cfg));
}

TrainedModel train_model(const PipelineConfig& cfg, const Dataset& data, const SplitSpec& split) {
    TrainedModel model;
    model.split = split;
    model.store = build_train_store(cfg, data, split.train);
    model.graphs = build_train_graphs(cfg, model.store);
    model.vocabulary = VocabularyV(split.train);
    model.codebook = build_train_codebook(cfg, model.graphs);
    model.vectors = embed_graphs(model.graphs, cfg.embedding, model.vocabulary,
                                 model.codebook ? &*model.codebook : nullptr);
    model.estimator = train_estimator(cfg, data.labels, model.vectors);
    return model;
}

// ---- inference ----

std::vector<Prediction> predict(const PipelineConfig& cfg, const Dataset& data, const TrainedModel& model,
                                std::span<const SampleId> test_ids, InferenceTiming* timing) {
    using clock = std::chrono::steady_clock;
    const auto responses = response_tables_for(data.tables, cfg.rankers, model.split.train);
    const auto query_tables = query_tables_for(data, cfg.rankers);
    const RankOptions options{cfg.L, cfg.self_exclusion};
    const Codebook* codebook = model.codebook ? &*model.codebook : nullptr;

    std::vector<Prediction> out(test_ids.size());
    std::vector<double> rank_time(test_ids.size(), 0.0);
    std::vector<double> rest_time(test_ids.size(), 0.0);
    parallel_for(test_ids.size(), [&](std::size_t i) {
        const auto t0 = clock::now();
        const auto ranks = rank_query(test_ids[i], query_tables, responses, cfg.rankers, options);
        const auto t1 = clock::now();
        const auto graph = extract_fusion_graph(ranks, model.store, cfg.L);
        const auto vector = embed_graph(graph, cfg.embedding, model.vocabulary, codebook);
        out[i] = {test_ids[i], predict_label(model.estimator, vector.values),
                  predict_proba(model.estimator, vector.values)};
        const auto t2 = clock::now();
        rank_time[i] = std::chrono::duration<double>(t1 - t0).count();
        rest_time[i] = std::chrono::duration<double>(t2 - t1).count();
    });
    if (timing) {
        for (std::size_t i = 0; i < test_ids.size(); ++i) {
            timing->rank_seconds += rank_time[i];
            timing->rest_seconds += rest_time[i];
        }
    }
    return out;
}

MetricReport score_predictions(std::span<const Prediction> predictions, const std::vector<std::string>& classes,
                               const LabelTable& labels, const std::optional<std::string>& positive_label,
                               std::span<const std::size_t> cutoffs, const std::string& prefix) {
    MetricReport report;
    std::vector<SampleId> ids;
    std::vector<std::string> truth;
    std::vector<std::string> predicted;
    std::vector<double> positive_scores;
    std::optional<std::size_t> positive_column;
    if (positive_label) {
        const auto it = std::find(classes.begin(), classes.end(), *positive_label);
        if (it == classes.end()) throw ConfigError("positive_label '" + *positive_label + "' is not a trained class");
        positive_column = static_cast<std::size_t>(it - classes.begin());
    }
    for (const auto& p : predictions) {
        const auto it = labels.rows.find(p.id);
        if (it == labels.rows.end()) continue;
        ids.push_back(p.id);
        truth.push_back(it->second);
        predicted.push_back(p.label);
        if (positive_column && *positive_column < p.probabilities.size()) {
            positive_scores.push_back(p.probabilities[*positive_column]);
        }
    }
    if (ids.empty()) {
        report.notes.push_back("no labeled predictions to score");
        return report;
    }
    report.values[key(prefix, "balanced_accuracy")] = balanced_accuracy(truth, predicted);
    for (const auto& [label, recall] : per_class_recall(truth, predicted)) {
        report.class_recalls[key(prefix, label)] = recall;
    }
    if (positive_column && positive_scores.size() == ids.size() && !cutoffs.empty()) {
        std::vector<bool> relevant(ids.size());
        for (std::size_t i = 0; i < ids.size(); ++i) relevant[i] = truth[i] == *positive_label;
        const auto list = relevance_by_score(ids, positive_scores, relevant);
        std::vector<std::size_t> used;
        for (const auto k : cutoffs) {
            if (k > list.size()) {
                report.notes.push_back("AP@" + std::to_string(k) + " skipped: only " + std::to_string(list.size()) +
                                       " scored samples");
                continue;
            }
            used.push_back(k);
            report.values[key(prefix, "AP@" + std::to_string(k))] = average_precision_at_k(list, k);
        }
        if (!used.empty()) {
            report.values[key(prefix, "mAP")] = mean_ap(list, used);
            if (report.cutoffs.empty()) report.cutoffs = used;
        }
        report.notes.push_back("AP@K divides by min(K, R), R the relevant count of the whole list; positive label '" +
                               *positive_label + "'");
    }
    return report;
}

// ---- baselines ----

BaselineResult evaluate_baselines(const PipelineConfig& cfg, const Dataset& data, const SplitSpec& split) {
    const auto descriptors = descriptor_order(cfg);
    const bool vote = cfg.majority_vote.value_or(descriptors.size() % 2 == 1);
    if (vote && descriptors.size() % 2 == 0) {
        throw ArityError("majority vote needs an odd number of descriptors, got " + std::to_string(descriptors.size()));
    }
    std::vector<SampleId> all(split.train);
    all.insert(all.end(), split.test.begin(), split.test.end());
    std::sort(all.begin(), all.end());

    std::vector<FeatureTable> tables;
    for (const auto& name : descriptors) tables.push_back(data.tables.at(name).subset(all));
    const auto train_y = labels_of(data.labels, split.train);
    const auto tcfg = seeded(cfg);

    BaselineResult result;
    auto fit_and_predict = [&](const FeatureTable& table) {
        const auto est = train_classifier(sparse_rows(table, split.train), train_y, tcfg);
        const auto test_x = sparse_rows(table, split.test);
        std::vector<Prediction> out;
        for (std::size_t i = 0; i < split.test.size(); ++i) {
            out.push_back({split.test[i], predict_label(est, test_x[i]), predict_proba(est, test_x[i])});
        }
        return std::make_pair(est.classes, out);
    };
    auto merge = [&](const MetricReport& r) {
        result.report.values.insert(r.values.begin(), r.values.end());
        result.report.class_recalls.insert(r.class_recalls.begin(), r.class_recalls.end());
        if (result.report.cutoffs.empty()) result.report.cutoffs = r.cutoffs;
        for (const auto& n : r.notes) {
            if (std::find(result.report.notes.begin(), result.report.notes.end(), n) == result.report.notes.end()) {
                result.report.notes.push_back(n);
            }
        }
    };

    progress("baseline: concatenation of " + std::to_string(tables.size()) + " descriptor(s)");
    const auto concat = concat_features(tables, split.train, &result.scalers);
    const auto [concat_classes, concat_pred] = fit_and_predict(concat);
    merge(score_predictions(concat_pred, concat_classes, data.labels, cfg.positive_label, cfg.cutoffs, "concat"));

    std::vector<std::vector<std::string>> votes;
    for (const auto& table : tables) {
        progress("baseline: single descriptor '" + table.descriptor_name() + "'");
        const auto single = concat_features(std::span<const FeatureTable>(&table, 1), split.train);
        const auto [classes, pred] = fit_and_predict(single);
        merge(score_predictions(pred, classes, data.labels, cfg.positive_label, cfg.cutoffs,
                                "single." + table.descriptor_name()));
        std::vector<std::string> labels;
        for (const auto& p : pred) labels.push_back(p.label);
        votes.push_back(std::move(labels));
    }
    if (vote) {
        progress("baseline: majority vote");
        const auto voted = majority_vote(votes);
        std::vector<Prediction> pred;
        for (std::size_t i = 0; i < split.test.size(); ++i) pred.push_back({split.test[i], voted[i], {}});
        merge(score_predictions(pred, {}, data.labels, std::nullopt, {}, "vote"));
    } else {
        const std::string notice = "majority vote skipped: " + std::to_string(descriptors.size()) +
                                   " descriptors (an odd count is required)";
        progress(notice);
        result.report.notes.push_back(notice);
    }
    result.report.notes.push_back("split_digest=" + split_digest(split));
    return result;
}

// ---- stages ----

void stage_ranks(const PipelineConfig& cfg) {
    validate_config(cfg);
    const auto data = load_dataset(cfg);
    const auto split = make_split(cfg, data.labels);
    progress("split: " + std::to_string(split.train.size()) + " train / " + std::to_string(split.test.size()) + " test");
    progress("ranks: " + std::to_string(split.train.size()) + " samples x " + std::to_string(cfg.rankers.size()) +
             " rankers, L=" + std::to_string(cfg.L));
    const auto store = build_train_store(cfg, data, split.train);

    fs::create_directories(cfg.output_dir);
    Manifest m{config_digest(cfg), training_data_digest(data, split.train), split_digest(split), {}};
    save_split(cfg.output_dir / "split.jsonl", split);
    save_rank_store(cfg.output_dir / "rank_store.jsonl", store);
    record(m, cfg.output_dir, "split.jsonl");
    record(m, cfg.output_dir, "rank_store.jsonl");
    write_manifest(cfg.output_dir, m);
}

void stage_graphs(const PipelineConfig& cfg) {
    auto m = checked_manifest(cfg, {"rank_store.jsonl"});
    const auto store = load_rank_store(cfg.output_dir / "rank_store.jsonl");
    progress("graphs: " + std::to_string(store.size()) + " fusion graphs");
    const auto graphs = build_train_graphs(cfg, store);
    save_graphs(cfg.output_dir / "train_graphs.jsonl", graphs);
    record(m, cfg.output_dir, "train_graphs.jsonl");
    write_manifest(cfg.output_dir, m);
}

void stage_embed(const PipelineConfig& cfg) {
    auto m = checked_manifest(cfg, {"split.jsonl", "train_graphs.jsonl"});
    const auto split = load_split(cfg.output_dir / "split.jsonl");
    const auto graphs = load_graphs(cfg.output_dir / "train_graphs.jsonl");
    const VocabularyV vocabulary(split.train);
    save_vocabulary(cfg.output_dir / "vocabulary.jsonl", vocabulary);
    record(m, cfg.output_dir, "vocabulary.jsonl");
    const auto codebook = build_train_codebook(cfg, graphs);
    if (codebook) {
        progress("embed: codebook of " + std::to_string(codebook->dim()) + " words");
        save_codebook(cfg.output_dir / "codebook.jsonl", *codebook);
        record(m, cfg.output_dir, "codebook.jsonl");
    }
    progress("embed: FV-" + std::string(to_string(cfg.embedding.kind)) + " for " + std::to_string(graphs.size()) +
             " graphs");
    const auto vectors = embed_graphs(graphs, cfg.embedding, vocabulary, codebook ? &*codebook : nullptr);
    save_vectors(cfg.output_dir / "train_vectors.jsonl", vectors);
    record(m, cfg.output_dir, "train_vectors.jsonl");
    write_manifest(cfg.output_dir, m);
}

void stage_train(const PipelineConfig& cfg) {
    auto m = checked_manifest(cfg, {"train_vectors.jsonl"});
    const auto labels = load_labels(cfg.labels);
    const auto vectors = load_vectors(cfg.output_dir / "train_vectors.jsonl");
    progress("train: " + std::to_string(vectors.ids.size()) + " vectors, " +
             std::to_string(cfg.estimator.reg_grid.size()) + " grid values x " + std::to_string(cfg.estimator.folds) +
             " folds");
    const auto estimator = train_estimator(cfg, labels, vectors);
    progress("train: selected reg=" + std::to_string(estimator.reg));
    save_estimator(cfg.output_dir / "estimator.jsonl", estimator);
    record(m, cfg.output_dir, "estimator.jsonl");
    write_manifest(cfg.output_dir, m);
}

void run_training(const PipelineConfig& cfg) {
    stage_ranks(cfg);
    stage_graphs(cfg);
    stage_embed(cfg);
    stage_train(cfg);
}

void run_inference(const PipelineConfig& cfg, const std::optional<std::vector<SampleId>>& test_ids) {
    const bool kernel = cfg.embedding.kind == EmbeddingKind::kernel;
    auto m = kernel ? checked_manifest(cfg, {"split.jsonl", "rank_store.jsonl", "vocabulary.jsonl", "codebook.jsonl",
                                             "estimator.jsonl"})
                    : checked_manifest(cfg, {"split.jsonl", "rank_store.jsonl", "vocabulary.jsonl", "estimator.jsonl"});
    const auto data = load_dataset(cfg);
    TrainedModel model;
    model.split = load_split(cfg.output_dir / "split.jsonl");
    if (training_data_digest(data, model.split.train) != m.data_digest) {
        throw CompatibilityError("training rows or labels changed since the artifacts were produced");
    }
    model.store = load_rank_store(cfg.output_dir / "rank_store.jsonl");
    model.vocabulary = load_vocabulary(cfg.output_dir / "vocabulary.jsonl");
    if (kernel) model.codebook = load_codebook(cfg.output_dir / "codebook.jsonl");
    model.estimator = load_estimator(cfg.output_dir / "estimator.jsonl");

    const auto& ids = test_ids ? *test_ids : model.split.test;
    for (const auto& id : ids) {
        if (std::binary_search(model.split.train.begin(), model.split.train.end(), id)) {
            throw ConfigError("test sample '" + id + "' belongs to the training split");
        }
    }
    progress("infer: " + std::to_string(ids.size()) + " test samples");
    InferenceTiming timing;
    const auto predictions = predict(cfg, data, model, ids, &timing);
    progress("infer: rank generation " + std::to_string(timing.rank_seconds) + " s, graph+embed+predict " +
             std::to_string(timing.rest_seconds) + " s (summed over samples)");
    write_predictions(cfg.output_dir / "predictions.csv", predictions, model.estimator.classes);
    if (predictions.empty()) return;
    auto report = score_predictions(predictions, model.estimator.classes, data.labels, cfg.positive_label, cfg.cutoffs,
                                    "fv_" + std::string(to_string(cfg.embedding.kind)));
    if (report.values.empty()) return;
    report.notes.push_back("split_digest=" + m.split_digest);
    write_report(cfg.output_dir / "report", report);
}

void run_baselines(const PipelineConfig& cfg) {
    validate_config(cfg);
    const auto data = load_dataset(cfg);
    const auto split = make_split(cfg, data.labels);
    const auto result = evaluate_baselines(cfg, data, split);
    fs::create_directories(cfg.output_dir);
    save_scalers(cfg.output_dir / "concat_scalers.jsonl", result.scalers);
    write_report(cfg.output_dir / "baselines", result.report);
}

MetricReport evaluate_predictions(const PipelineConfig& cfg) {
    const auto path = cfg.output_dir / "predictions.csv";
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string() + "; run infer first");
    const auto labels = load_labels(cfg.labels);
    std::vector<Prediction> predictions;
    std::vector<std::string> classes;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto cells = split_csv(line);
        if (line_no == 1) {
            if (cells.size() < 2 || cells[0] != "id" || cells[1] != "predicted") {
                throw ParseError(path.string(), line_no, "expected an 'id,predicted,...' header");
            }
            for (std::size_t i = 2; i < cells.size(); ++i) classes.push_back(cells[i].substr(2));
            continue;
        }
        if (cells.size() != classes.size() + 2) throw ParseError(path.string(), line_no, "wrong number of columns");
        Prediction p{cells[0], cells[1], {}};
        for (std::size_t i = 2; i < cells.size(); ++i) {
            try {
                p.probabilities.push_back(std::stod(cells[i]));
            } catch (const std::exception&) {
                throw ParseError(path.string(), line_no, "non-numeric probability '" + cells[i] + "'");
            }
        }
        predictions.push_back(std::move(p));
    }
    auto report = score_predictions(predictions, classes, labels, cfg.positive_label, cfg.cutoffs,
                                    "fv_" + std::string(to_string(cfg.embedding.kind)));
    if (!report.values.empty()) write_report(cfg.output_dir / "report", report);
    return report;
}

std::vector<SweepRow> sweep_l(const PipelineConfig& cfg, const Dataset& data, const SplitSpec& split) {
    std::vector<SweepRow> rows;
    for (const auto L : cfg.sweep_L) {
        auto c = cfg;
        c.L = L;
        progress("sweep-l: L=" + std::to_string(L));
        const auto model = train_model(c, data, split);
        const auto pred = predict(c, data, model, split.test);
        std::vector<std::string> truth;
        std::vector<std::string> guess;
        for (const auto& p : pred) {
            truth.push_back(data.labels.label_of(p.id));
            guess.push_back(p.label);
        }
        rows.push_back({L, balanced_accuracy(truth, guess)});
    }
    return rows;
}

void run_sweep_l(const PipelineConfig& cfg) {
    validate_config(cfg);
    const auto data = load_dataset(cfg);
    const auto split = make_split(cfg, data.labels);
    const auto rows = sweep_l(cfg, data, split);
    fs::create_directories(cfg.output_dir);
    const auto path = cfg.output_dir / "sweep_l.csv";
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << "L,balanced_accuracy\n" << std::setprecision(17);
    for (const auto& r : rows) out << r.L << ',' << r.balanced_accuracy << '\n';
}

// ---- audit ----

std::vector<std::string> audit_hygiene(const fs::path& dir, std::span<const SampleId> test_ids) {
    const std::set<SampleId> test(test_ids.begin(), test_ids.end());
    std::vector<std::string> violations;
    auto flag = [&](const std::string& where, const SampleId& id) {
        if (test.contains(id)) violations.push_back(where + ": test sample '" + id + "'");
    };
    if (fs::exists(dir / "split.jsonl")) {
        const auto split = load_split(dir / "split.jsonl");
        for (const auto& id : split.train) flag("split.jsonl train side", id);
    }
    if (fs::exists(dir / "rank_store.jsonl")) {
        const auto store = load_rank_store(dir / "rank_store.jsonl");
        for (const auto& rank : store.all_ranks()) {
            flag("rank_store.jsonl query", rank.query);
            for (const auto& e : rank.entries) flag("rank_store.jsonl response of '" + rank.query + "'", e.response);
        }
    }
    if (fs::exists(dir / "train_graphs.jsonl")) {
        for (const auto& g : load_graphs(dir / "train_graphs.jsonl")) {
            flag("train_graphs.jsonl query", g.query());
            for (const auto& v : g.vertices()) flag("train_graphs.jsonl vertex of '" + g.query() + "'", v.id);
        }
    }
    if (fs::exists(dir / "vocabulary.jsonl")) {
        const auto vocabulary = load_vocabulary(dir / "vocabulary.jsonl");
        for (const auto& id : vocabulary.ids()) flag("vocabulary.jsonl", id);
    }
    if (fs::exists(dir / "codebook.jsonl")) {
        const auto codebook = load_codebook(dir / "codebook.jsonl");
        for (const auto& word : codebook.words) {
            flag("codebook.jsonl word centre", word.center);
            for (const auto& v : word.vertices) flag("codebook.jsonl word vertex", v.id);
        }
    }
    if (fs::exists(dir / "train_vectors.jsonl")) {
        const auto vectors = load_vectors(dir / "train_vectors.jsonl");
        for (const auto& id : vectors.ids) flag("train_vectors.jsonl", id);
    }
    if (fs::exists(dir / "concat_scalers.jsonl")) {
        for (const auto& s : load_scalers(dir / "concat_scalers.jsonl")) {
            for (const auto& id : s.fitted_on) flag("concat_scalers.jsonl statistics", id);
        }
    }
    return violations;
}

std::map<std::string, std::string> manifest_digests(const fs::path& dir) {
    auto m = read_manifest(dir);
    auto out = m.artifacts;
    out["<config>"] = m.config_digest;
    out["<data>"] = m.data_digest;
    out["<split>"] = m.split_digest;
    return out;
}

}  // namespace fusegraph
