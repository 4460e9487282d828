#include "cwp/eval.h"

#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>

#include "cwp/error.h"
#include "cwp/text.h"

namespace cwp::eval {
namespace {

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

nlohmann::json to_json(const MetricSummary& s) { return {{"mean", s.mean}, {"std", s.std}}; }

std::vector<std::string> table_cells(const TableRow& row) {
  const AggregateReport& r = row.report;
  return {row.partition,
          row.setting,
          format_cell(r.accuracy),
          format_cell(r.precision),
          format_cell(r.recall),
          format_cell(r.f1),
          r.consistency ? format_cell(*r.consistency) : "-"};
}

std::vector<std::string> table_header(std::string_view setting_header) {
  return {"Partition", std::string(setting_header), "Accuracy", "Precision",
          "Recall",    "F1-Score",                  "Consistency"};
}

}  // namespace

ConfusionCounts confusion(const LabelMap& predictions, const LabelMap& gold) {
  std::vector<std::string> unmatched;
  for (const auto& [id, _] : gold) {
    if (!predictions.contains(id)) unmatched.push_back(id);
  }
  for (const auto& [id, _] : predictions) {
    if (!gold.contains(id)) unmatched.push_back(id);
  }
  if (!unmatched.empty()) {
    throw IdListError("predictions and gold labels cover different ids", std::move(unmatched));
  }
  ConfusionCounts c;
  for (const auto& [id, truth] : gold) {
    const bool pred_yes = predictions.at(id) == ClassLabel::kYes;
    const bool gold_yes = truth == ClassLabel::kYes;
    if (pred_yes && gold_yes) ++c.tp;
    else if (pred_yes) ++c.fp;
    else if (gold_yes) ++c.fn;
    else ++c.tn;
  }
  return c;
}

MetricsReport metrics_from_confusion(const ConfusionCounts& c) {
  if (c.total() == 0) throw DataError("cannot compute metrics over zero items");
  MetricsReport m;
  m.accuracy = ratio(c.tp + c.tn, c.total());
  m.precision = ratio(c.tp, c.tp + c.fp);
  m.recall = ratio(c.tp, c.tp + c.fn);
  m.f1 = m.precision + m.recall == 0.0
             ? 0.0
             : 2.0 * m.precision * m.recall / (m.precision + m.recall);
  return m;
}

ConsistencyReport consistency_at_k(std::span<const llm::PredictionRun> runs, std::size_t k,
                                   const std::vector<std::string>* ids) {
  if (k < 2) throw UsageError("consistency needs k >= 2");
  if (runs.size() < k) {
    throw UsageError("consistency@" + std::to_string(k) + " needs " + std::to_string(k) +
                     " runs, got " + std::to_string(runs.size()));
  }
  const auto first = runs.first(k);
  std::vector<std::string> universe;
  if (ids) {
    universe = *ids;
  } else {
    std::set<std::string> seen;
    for (const auto& run : first) {
      for (const auto& [id, _] : run.predictions) seen.insert(id);
      for (const auto& [id, _] : run.failures) seen.insert(id);
    }
    universe.assign(seen.begin(), seen.end());
  }

  ConsistencyReport report;
  report.k = k;
  std::size_t consistent = 0;
  for (const std::string& id : universe) {
    bool ok = true;
    std::optional<ClassLabel> label;
    for (const auto& run : first) {
      const auto it = run.predictions.find(id);
      if (it == run.predictions.end() || (label && *label != it->second)) {
        ok = false;
        break;
      }
      label = it->second;
    }
    report.per_id_consistent[id] = ok;
    consistent += ok;
  }
  report.consistent_fraction = ratio(consistent, report.per_id_consistent.size());
  return report;
}

std::vector<std::pair<std::size_t, double>> consistency_curve(
    std::span<const llm::PredictionRun> runs, const std::vector<std::string>* ids) {
  std::vector<std::pair<std::size_t, double>> out;
  for (std::size_t k = 2; k <= runs.size(); ++k) {
    out.emplace_back(k, consistency_at_k(runs, k, ids).consistent_fraction);
  }
  return out;
}

MetricSummary summarize(std::span<const double> values) {
  if (values.empty()) throw DataError("cannot summarize zero trials");
  MetricSummary s;
  const double n = static_cast<double>(values.size());
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / (n - 1.0));
  }
  return s;
}

AggregateReport aggregate(std::span<const MetricsReport> trials,
                          std::span<const double> consistency) {
  if (trials.empty()) throw DataError("cannot aggregate zero trials");
  if (!consistency.empty() && consistency.size() != trials.size()) {
    throw UsageError("need one consistency value per trial");
  }
  std::vector<double> acc, prec, rec, f1;
  for (const MetricsReport& t : trials) {
    acc.push_back(t.accuracy);
    prec.push_back(t.precision);
    rec.push_back(t.recall);
    f1.push_back(t.f1);
  }
  AggregateReport r;
  r.accuracy = summarize(acc);
  r.precision = summarize(prec);
  r.recall = summarize(rec);
  r.f1 = summarize(f1);
  if (!consistency.empty()) r.consistency = summarize(consistency);
  r.n_trials = trials.size();
  return r;
}

std::string format_cell(const MetricSummary& s) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3f ± %.3f", s.mean, s.std);
  return buf;
}

nlohmann::json to_json(const MetricsReport& m) {
  return {{"accuracy", m.accuracy}, {"precision", m.precision}, {"recall", m.recall},
          {"f1", m.f1}};
}

nlohmann::json to_json(const AggregateReport& r) {
  nlohmann::json j = {
      {"accuracy", to_json(r.accuracy)},
      {"precision", to_json(r.precision)},
      {"recall", to_json(r.recall)},
      {"f1", to_json(r.f1)},
      {"n_trials", r.n_trials},
  };
  if (r.consistency) j["consistency"] = to_json(*r.consistency);
  return j;
}

std::string table_csv(std::span<const TableRow> rows, std::string_view setting_header) {
  auto line = [](const std::vector<std::string>& cells) {
    std::string out;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += text::csv_field(cells[i]);
    }
    return out + '\n';
  };
  std::string out = line(table_header(setting_header));
  for (const TableRow& row : rows) out += line(table_cells(row));
  return out;
}

std::string table_markdown(std::span<const TableRow> rows, std::string_view setting_header) {
  auto line = [](const std::vector<std::string>& cells) {
    std::string out = "|";
    for (const std::string& c : cells) out += ' ' + c + " |";
    return out + '\n';
  };
  const auto header = table_header(setting_header);
  std::string out = line(header);
  out += "|";
  for (std::size_t i = 0; i < header.size(); ++i) out += i < 2 ? " --- |" : " ---: |";
  out += '\n';
  for (const TableRow& row : rows) out += line(table_cells(row));
  return out;
}

}  // namespace cwp::eval
