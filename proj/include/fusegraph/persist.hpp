#pragma once

/** \file persist.hpp
 *  \brief Line-oriented artifact files.
 *
 * Every artifact file starts with a header record
 * `{"artifact": <kind>, "count": N, "format_version": 1, ...}` followed by N
 * records, one JSON object per line, each carrying `format_version`. Object
 * keys are sorted and reals are written in shortest round-trip form, so equal
 * artifacts produce identical bytes. A version mismatch, a malformed line or a
 * record count that disagrees with the header raises FormatError.
 */

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "fusegraph/dataset.hpp"
#include "fusegraph/embedding.hpp"
#include "fusegraph/fusion_graph.hpp"
#include "fusegraph/learn.hpp"
#include "fusegraph/ranker.hpp"

namespace fusegraph {

inline constexpr int kFormatVersion = 1;

/// Fusion vectors paired with the sample they embed.
struct VectorSet {
    std::vector<SampleId> ids;
    std::vector<FusionVector> vectors;

    friend bool operator==(const VectorSet&, const VectorSet&) = default;
};

void write_ranks(std::ostream& out, std::span<const Rank> ranks);
std::vector<Rank> read_ranks(std::istream& in);

void write_rank_store(std::ostream& out, const RankStore& store);
RankStore read_rank_store(std::istream& in);

void write_graphs(std::ostream& out, std::span<const FusionGraph> graphs);
std::vector<FusionGraph> read_graphs(std::istream& in);

void write_vectors(std::ostream& out, const VectorSet& vectors);
VectorSet read_vectors(std::istream& in);

void write_codebook(std::ostream& out, const Codebook& codebook);
Codebook read_codebook(std::istream& in);

void write_estimator(std::ostream& out, const Estimator& estimator);
Estimator read_estimator(std::istream& in);

void write_vocabulary(std::ostream& out, const VocabularyV& vocab);
VocabularyV read_vocabulary(std::istream& in);

void write_split(std::ostream& out, const SplitSpec& split);
SplitSpec read_split(std::istream& in);

/// Min-max statistics of the concatenation baseline, one record per descriptor.
void write_scalers(std::ostream& out, std::span<const MinMaxScaler> scalers);
std::vector<MinMaxScaler> read_scalers(std::istream& in);

// File wrappers over the stream functions above.
void save_rank_store(const std::filesystem::path& path, const RankStore& store);
RankStore load_rank_store(const std::filesystem::path& path);
void save_graphs(const std::filesystem::path& path, std::span<const FusionGraph> graphs);
std::vector<FusionGraph> load_graphs(const std::filesystem::path& path);
void save_vectors(const std::filesystem::path& path, const VectorSet& vectors);
VectorSet load_vectors(const std::filesystem::path& path);
void save_codebook(const std::filesystem::path& path, const Codebook& codebook);
Codebook load_codebook(const std::filesystem::path& path);
void save_estimator(const std::filesystem::path& path, const Estimator& estimator);
Estimator load_estimator(const std::filesystem::path& path);
void save_vocabulary(const std::filesystem::path& path, const VocabularyV& vocab);
VocabularyV load_vocabulary(const std::filesystem::path& path);
void save_split(const std::filesystem::path& path, const SplitSpec& split);
SplitSpec load_split(const std::filesystem::path& path);
void save_scalers(const std::filesystem::path& path, std::span<const MinMaxScaler> scalers);
std::vector<MinMaxScaler> load_scalers(const std::filesystem::path& path);

/// FNV-1a 64-bit digest of a file's bytes, as 16 hex digits.
std::string file_digest(const std::filesystem::path& path);
std::string text_digest(std::string_view text);

}  // namespace fusegraph
