#pragma once

/** \file dataset.hpp
 *  \brief Feature and label ingestion plus stratified splitting.
 *
 * Feature files are plain text, one sample per line: `id,v1,...,vd` with no
 * header. Label files are `id,label`. Blank lines and lines starting with `#`
 * are skipped in both.
 */

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace fusegraph {

/// Opaque sample token, unique within a collection.
using SampleId = std::string;

/** \brief Dense feature matrix of one descriptor, keyed by sample id.
 *
 * Rows are stored contiguously in insertion order; lookups go through an
 * id index. Immutable once loading is done.
 */
class FeatureTable {
public:
    FeatureTable() = default;
    FeatureTable(std::string descriptor_name, std::size_t dim);

    /// Throws DuplicateError for a repeated id, ShapeError for a wrong length,
    /// DomainError for a non-finite value.
    void add_row(const SampleId& id, std::span<const double> values);

    [[nodiscard]] const std::string& descriptor_name() const noexcept { return name_; }
    [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
    [[nodiscard]] std::size_t size() const noexcept { return ids_.size(); }
    [[nodiscard]] bool empty() const noexcept { return ids_.empty(); }

    [[nodiscard]] const std::vector<SampleId>& ids() const noexcept { return ids_; }
    [[nodiscard]] bool contains(const SampleId& id) const { return index_.contains(id); }
    [[nodiscard]] std::optional<std::size_t> find(const SampleId& id) const;

    [[nodiscard]] std::span<const double> row(std::size_t i) const {
        return {values_.data() + i * dim_, dim_};
    }
    /// Throws IncompleteError naming (id, descriptor) when absent.
    [[nodiscard]] std::span<const double> row(const SampleId& id) const;

    /// Rows for `ids`, in that order. Missing ids raise IncompleteError.
    [[nodiscard]] FeatureTable subset(std::span<const SampleId> ids) const;

    friend bool operator==(const FeatureTable& a, const FeatureTable& b);

private:
    std::string name_;
    std::size_t dim_ = 0;
    std::vector<SampleId> ids_;
    std::vector<double> values_;
    std::unordered_map<SampleId, std::size_t> index_;
};

/// Parses a feature file. The dimension is fixed by the first data row.
FeatureTable load_features(const std::filesystem::path& path, const std::string& descriptor_name);
FeatureTable parse_features(std::istream& in, const std::string& descriptor_name,
                            const std::string& source = "<stream>");
void save_features(const std::filesystem::path& path, const FeatureTable& table);

struct LabelTable {
    std::map<SampleId, std::string> rows;
    /// Distinct labels, sorted.
    std::vector<std::string> classes;

    [[nodiscard]] std::size_t class_index(const std::string& label) const;
    [[nodiscard]] const std::string& label_of(const SampleId& id) const;
};

LabelTable load_labels(const std::filesystem::path& path);
LabelTable parse_labels(std::istream& in, const std::string& source = "<stream>");
LabelTable make_label_table(std::map<SampleId, std::string> rows);
void save_labels(const std::filesystem::path& path, const LabelTable& labels);

/// Every labeled id must exist in at least one table.
void validate_labels(const LabelTable& labels, std::span<const FeatureTable> tables);

struct SplitSpec {
    std::vector<SampleId> train;  // sorted
    std::vector<SampleId> test;   // sorted
    std::uint64_t seed = 0;

    friend bool operator==(const SplitSpec&, const SplitSpec&) = default;
};

/** \brief Per-class stratified split.
 *
 * The train total is round(fraction * n); per-class quotas take the floor of
 * fraction * class_size and hand the leftover slots to the classes with the
 * largest fractional parts (ties by class order). Members are drawn from a
 * seeded shuffle of each class in id order.
 */
SplitSpec stratified_split(const LabelTable& labels, double train_fraction, std::uint64_t seed);

/// One id per line; blank and `#` lines skipped.
std::vector<SampleId> load_id_list(const std::filesystem::path& path);

}  // namespace fusegraph
