#include "fusegraph/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "fusegraph/errors.hpp"
#include "fusegraph/random.hpp"

namespace fusegraph {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.push_back(trim(line.substr(start)));
            break;
        }
        out.push_back(trim(line.substr(start, comma - start)));
        start = comma + 1;
    }
    return out;
}

bool skippable(std::string_view line) {
    const auto t = trim(line);
    return t.empty() || t.front() == '#';
}

std::optional<double> parse_number(std::string_view field) {
    double value = 0.0;
    const auto* first = field.data();
    const auto* last = field.data() + field.size();
    if (first != last && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last || first == last) return std::nullopt;
    return value;
}

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    return in;
}

}  // namespace

FeatureTable::FeatureTable(std::string descriptor_name, std::size_t dim)
    : name_(std::move(descriptor_name)), dim_(dim) {}

void FeatureTable::add_row(const SampleId& id, std::span<const double> values) {
    if (id.empty()) throw DomainError("empty sample id in descriptor '" + name_ + "'");
    if (values.size() != dim_) {
        throw ShapeError("row '" + id + "' has " + std::to_string(values.size()) + " values, descriptor '" +
                         name_ + "' expects " + std::to_string(dim_));
    }
    for (double v : values) {
        if (!std::isfinite(v)) throw DomainError("non-finite value in row '" + id + "'");
    }
    if (!index_.emplace(id, ids_.size()).second) {
        throw DuplicateError("duplicate sample id '" + id + "' in descriptor '" + name_ + "'");
    }
    ids_.push_back(id);
    values_.insert(values_.end(), values.begin(), values.end());
}

std::optional<std::size_t> FeatureTable::find(const SampleId& id) const {
    const auto it = index_.find(id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::span<const double> FeatureTable::row(const SampleId& id) const {
    const auto i = find(id);
    if (!i) throw IncompleteError("sample '" + id + "' has no row in descriptor '" + name_ + "'");
    return row(*i);
}

FeatureTable FeatureTable::subset(std::span<const SampleId> ids) const {
    FeatureTable out(name_, dim_);
    out.ids_.reserve(ids.size());
    out.values_.reserve(ids.size() * dim_);
    for (const auto& id : ids) out.add_row(id, row(id));
    return out;
}

bool operator==(const FeatureTable& a, const FeatureTable& b) {
    if (a.name_ != b.name_ || a.dim_ != b.dim_ || a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const auto j = b.find(a.ids_[i]);
        if (!j) return false;
        const auto ra = a.row(i);
        const auto rb = b.row(*j);
        if (!std::equal(ra.begin(), ra.end(), rb.begin())) return false;
    }
    return true;
}

FeatureTable parse_features(std::istream& in, const std::string& descriptor_name, const std::string& source) {
    std::optional<FeatureTable> table;
    std::string line;
    std::size_t line_no = 0;
    std::vector<double> values;
    while (std::getline(in, line)) {
        ++line_no;
        if (skippable(line)) continue;
        const auto fields = split_fields(line);
        if (fields.size() < 2) throw ParseError(source, line_no, "expected id followed by at least one value");
        if (fields[0].empty()) throw ParseError(source, line_no, "empty sample id");
        values.clear();
        for (std::size_t k = 1; k < fields.size(); ++k) {
            const auto v = parse_number(fields[k]);
            if (!v) throw ParseError(source, line_no, "non-numeric value '" + std::string(fields[k]) + "'");
            if (!std::isfinite(*v)) throw ParseError(source, line_no, "non-finite value");
            values.push_back(*v);
        }
        if (!table) table.emplace(descriptor_name, values.size());
        if (values.size() != table->dim()) {
            throw ParseError(source, line_no,
                             "expected " + std::to_string(table->dim()) + " values, got " +
                                 std::to_string(values.size()));
        }
        const SampleId id(fields[0]);
        if (table->contains(id)) {
            throw DuplicateError(source + ":" + std::to_string(line_no) + ": duplicate sample id '" + id + "'");
        }
        table->add_row(id, values);
    }
    if (!table) throw ParseError(source, line_no, "no feature rows");
    return std::move(*table);
}

FeatureTable load_features(const std::filesystem::path& path, const std::string& descriptor_name) {
    auto in = open_input(path);
    return parse_features(in, descriptor_name, path.string());
}

void save_features(const std::filesystem::path& path, const FeatureTable& table) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << std::setprecision(17);
    for (std::size_t i = 0; i < table.size(); ++i) {
        out << table.ids()[i];
        for (double v : table.row(i)) out << ',' << v;
        out << '\n';
    }
}

std::size_t LabelTable::class_index(const std::string& label) const {
    const auto it = std::lower_bound(classes.begin(), classes.end(), label);
    if (it == classes.end() || *it != label) throw DomainError("unknown class label '" + label + "'");
    return static_cast<std::size_t>(it - classes.begin());
}

const std::string& LabelTable::label_of(const SampleId& id) const {
    const auto it = rows.find(id);
    if (it == rows.end()) throw IncompleteError("sample '" + id + "' has no label");
    return it->second;
}

LabelTable make_label_table(std::map<SampleId, std::string> rows) {
    LabelTable out;
    std::set<std::string> classes;
    for (const auto& [id, label] : rows) classes.insert(label);
    out.rows = std::move(rows);
    out.classes.assign(classes.begin(), classes.end());
    return out;
}

LabelTable parse_labels(std::istream& in, const std::string& source) {
    std::map<SampleId, std::string> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (skippable(line)) continue;
        const auto fields = split_fields(line);
        if (fields.size() != 2) throw ParseError(source, line_no, "expected 'id,label'");
        if (fields[0].empty() || fields[1].empty()) throw ParseError(source, line_no, "empty id or label");
        if (!rows.emplace(std::string(fields[0]), std::string(fields[1])).second) {
            throw DuplicateError(source + ":" + std::to_string(line_no) + ": duplicate sample id '" +
                                 std::string(fields[0]) + "'");
        }
    }
    return make_label_table(std::move(rows));
}

LabelTable load_labels(const std::filesystem::path& path) {
    auto in = open_input(path);
    return parse_labels(in, path.string());
}

void save_labels(const std::filesystem::path& path, const LabelTable& labels) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    for (const auto& [id, label] : labels.rows) out << id << ',' << label << '\n';
}

void validate_labels(const LabelTable& labels, std::span<const FeatureTable> tables) {
    for (const auto& [id, label] : labels.rows) {
        const bool known = std::any_of(tables.begin(), tables.end(), [&](const FeatureTable& t) { return t.contains(id); });
        if (!known) throw IncompleteError("labeled sample '" + id + "' has no features in any descriptor");
    }
}

SplitSpec stratified_split(const LabelTable& labels, double train_fraction, std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw DomainError("train fraction must lie in (0,1)");
    }
    std::vector<std::vector<SampleId>> members(labels.classes.size());
    for (const auto& [id, label] : labels.rows) members[labels.class_index(label)].push_back(id);
    for (std::size_t c = 0; c < members.size(); ++c) {
        if (members[c].size() < 2) {
            throw StratificationError("class '" + labels.classes[c] + "' has " + std::to_string(members[c].size()) +
                                      " member(s); stratification needs at least 2");
        }
    }

    const auto total = static_cast<long long>(std::llround(train_fraction * static_cast<double>(labels.rows.size())));
    std::vector<long long> quota(members.size());
    std::vector<double> remainder(members.size());
    long long assigned = 0;
    for (std::size_t c = 0; c < members.size(); ++c) {
        const double exact = train_fraction * static_cast<double>(members[c].size());
        quota[c] = static_cast<long long>(std::floor(exact));
        remainder[c] = exact - static_cast<double>(quota[c]);
        assigned += quota[c];
    }
    std::vector<std::size_t> order(members.size());
    for (std::size_t c = 0; c < order.size(); ++c) order[c] = c;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
    for (std::size_t k = 0; assigned < total && k < order.size(); ++k) {
        ++quota[order[k]];
        ++assigned;
    }

    SplitSpec split;
    split.seed = seed;
    Rng rng(seed);
    for (std::size_t c = 0; c < members.size(); ++c) {
        auto ids = members[c];
        rng.shuffle(ids);
        const auto take = static_cast<std::size_t>(quota[c]);
        split.train.insert(split.train.end(), ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(take));
        split.test.insert(split.test.end(), ids.begin() + static_cast<std::ptrdiff_t>(take), ids.end());
    }
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.test.begin(), split.test.end());
    return split;
}

std::vector<SampleId> load_id_list(const std::filesystem::path& path) {
    auto in = open_input(path);
    std::vector<SampleId> ids;
    std::string line;
    while (std::getline(in, line)) {
        if (skippable(line)) continue;
        ids.emplace_back(trim(line));
    }
    return ids;
}

}  // namespace fusegraph
