#pragma once

/** \file metrics.hpp
 *  \brief Classification and ranking metrics plus report output.
 *
 * AP@K divides by min(K, R), where R counts the relevant items of the whole
 * list; a list with no relevant item scores 0.
 */

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "fusegraph/dataset.hpp"

namespace fusegraph {

/// Unweighted mean of per-class recall over the classes present in `y_true`.
double balanced_accuracy(std::span<const std::string> y_true, std::span<const std::string> y_pred);

/// Recall of every class present in `y_true`, keyed by label.
std::map<std::string, double> per_class_recall(std::span<const std::string> y_true,
                                               std::span<const std::string> y_pred);

double average_precision_at_k(const std::vector<bool>& ranked_relevance, std::size_t k);

double mean_ap(const std::vector<bool>& ranked_relevance, std::span<const std::size_t> cutoffs);

/// Relevance list obtained by sorting samples by descending score, ties by id.
std::vector<bool> relevance_by_score(std::span<const SampleId> ids, std::span<const double> scores,
                                     const std::vector<bool>& relevant);

struct MetricReport {
    std::map<std::string, double> values;
    std::map<std::string, double> class_recalls;
    std::vector<std::size_t> cutoffs;
    std::vector<std::string> notes;
};

/// `<stem>.json` (structured) and `<stem>.csv` (`metric,value` rows).
void write_report(const std::filesystem::path& stem, const MetricReport& report);

}  // namespace fusegraph
