#include "fusegraph/metrics.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <numeric>

#include "json.hpp"

#include "fusegraph/errors.hpp"

namespace fusegraph {

std::map<std::string, double> per_class_recall(std::span<const std::string> y_true,
                                               std::span<const std::string> y_pred) {
    if (y_true.size() != y_pred.size()) {
        throw ShapeError("label lists differ in length (" + std::to_string(y_true.size()) + " vs " +
                         std::to_string(y_pred.size()) + ")");
    }
    if (y_true.empty()) throw ShapeError("metrics of an empty label list");
    std::map<std::string, std::pair<std::size_t, std::size_t>> counts;  // hits, total
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        auto& [hits, total] = counts[y_true[i]];
        ++total;
        if (y_pred[i] == y_true[i]) ++hits;
    }
    std::map<std::string, double> out;
    for (const auto& [label, c] : counts) out[label] = static_cast<double>(c.first) / static_cast<double>(c.second);
    return out;
}

double balanced_accuracy(std::span<const std::string> y_true, std::span<const std::string> y_pred) {
    const auto recalls = per_class_recall(y_true, y_pred);
    double sum = 0.0;
    for (const auto& [label, r] : recalls) sum += r;
    return sum / static_cast<double>(recalls.size());
}

double average_precision_at_k(const std::vector<bool>& ranked_relevance, std::size_t k) {
    if (k == 0) throw DomainError("AP@K needs K >= 1");
    if (k > ranked_relevance.size()) {
        throw DomainError("cutoff " + std::to_string(k) + " exceeds list length " +
                          std::to_string(ranked_relevance.size()));
    }
    const auto relevant_total = static_cast<std::size_t>(std::count(ranked_relevance.begin(), ranked_relevance.end(), true));
    if (relevant_total == 0) return 0.0;
    double sum = 0.0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < k; ++i) {
        if (!ranked_relevance[i]) continue;
        ++hits;
        sum += static_cast<double>(hits) / static_cast<double>(i + 1);
    }
    return sum / static_cast<double>(std::min(k, relevant_total));
}

double mean_ap(const std::vector<bool>& ranked_relevance, std::span<const std::size_t> cutoffs) {
    if (cutoffs.empty()) throw DomainError("mAP needs at least one cutoff");
    double sum = 0.0;
    for (const auto k : cutoffs) sum += average_precision_at_k(ranked_relevance, k);
    return sum / static_cast<double>(cutoffs.size());
}

std::vector<bool> relevance_by_score(std::span<const SampleId> ids, std::span<const double> scores,
                                     const std::vector<bool>& relevant) {
    if (ids.size() != scores.size() || ids.size() != relevant.size()) throw ShapeError("ranking inputs differ in length");
    std::vector<std::size_t> order(ids.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return ids[a] < ids[b];
    });
    std::vector<bool> out;
    out.reserve(order.size());
    for (const auto i : order) out.push_back(relevant[i]);
    return out;
}

void write_report(const std::filesystem::path& stem, const MetricReport& report) {
    nlohmann::json doc;
    doc["format_version"] = 1;
    doc["metrics"] = report.values;
    doc["class_recalls"] = report.class_recalls;
    doc["cutoffs"] = report.cutoffs;
    doc["notes"] = report.notes;
    auto json_path = stem;
    json_path += ".json";
    std::ofstream js(json_path);
    if (!js) throw IoError("cannot write " + json_path.string());
    js << doc.dump(2) << '\n';

    auto csv_path = stem;
    csv_path += ".csv";
    std::ofstream csv(csv_path);
    if (!csv) throw IoError("cannot write " + csv_path.string());
    csv << "metric,value\n" << std::setprecision(17);
    for (const auto& [name, value] : report.values) csv << name << ',' << value << '\n';
    for (const auto& [label, value] : report.class_recalls) csv << "recall[" << label << "]," << value << '\n';
}

}  // namespace fusegraph
