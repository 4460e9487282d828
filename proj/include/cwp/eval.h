#ifndef CWP_EVAL_H_
#define CWP_EVAL_H_

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cwp/corpus.h"
#include "cwp/llm.h"
#include "json.hpp"

namespace cwp::eval {

using corpus::ClassLabel;
using LabelMap = std::map<std::string, ClassLabel>;

struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;

  std::size_t total() const { return tp + fp + fn + tn; }
  bool operator==(const ConfusionCounts&) const = default;
};

// Yes is positive. Predictions must cover exactly the gold ids; otherwise
// IdListError names the unmatched ids.
ConfusionCounts confusion(const LabelMap& predictions, const LabelMap& gold);

struct MetricsReport {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Zero denominators give 0. Throws DataError for an empty confusion.
MetricsReport metrics_from_confusion(const ConfusionCounts& counts);

struct ConsistencyReport {
  std::size_t k = 0;
  double consistent_fraction = 0.0;
  std::map<std::string, bool> per_id_consistent;
};

// Uses the first k runs. An id is consistent iff all k runs predicted it with
// the same label. The id universe is `ids` when given, else every id seen in
// any run; unseen ids count as inconsistent. Throws for k < 2 or fewer than
// k runs.
ConsistencyReport consistency_at_k(std::span<const llm::PredictionRun> runs,
                                   std::size_t k,
                                   const std::vector<std::string>* ids = nullptr);

// consistent_fraction for k = 2 .. runs.size().
std::vector<std::pair<std::size_t, double>> consistency_curve(
    std::span<const llm::PredictionRun> runs,
    const std::vector<std::string>* ids = nullptr);

struct MetricSummary {
  double mean = 0.0;
  double std = 0.0;  // sample (n - 1); 0 for a single trial
};

MetricSummary summarize(std::span<const double> values);

struct AggregateReport {
  MetricSummary accuracy;
  MetricSummary precision;
  MetricSummary recall;
  MetricSummary f1;
  std::optional<MetricSummary> consistency;
  std::size_t n_trials = 0;
};

// consistency, when nonempty, must have one value per trial.
AggregateReport aggregate(std::span<const MetricsReport> trials,
                          std::span<const double> consistency = {});

// "mean ± std", three decimals.
std::string format_cell(const MetricSummary& summary);

nlohmann::json to_json(const MetricsReport& report);
nlohmann::json to_json(const AggregateReport& report);

struct TableRow {
  std::string partition;
  std::string setting;  // model, prompt, or pruning technique
  AggregateReport report;
};

// Columns: Partition, <setting_header>, Accuracy, Precision, Recall,
// F1-Score, Consistency. A missing consistency prints as "-".
std::string table_csv(std::span<const TableRow> rows, std::string_view setting_header);
std::string table_markdown(std::span<const TableRow> rows,
                           std::string_view setting_header);

}  // namespace cwp::eval

#endif  // CWP_EVAL_H_
