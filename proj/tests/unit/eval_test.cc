#include <algorithm>
#include <random>

#include "cwp/error.h"
#include "cwp/eval.h"
#include "doctest.h"

using namespace cwp;
using corpus::ClassLabel;
using eval::LabelMap;

namespace {
constexpr auto Y = ClassLabel::kYes;
constexpr auto N = ClassLabel::kNo;

llm::PredictionRun run(int index, std::map<std::string, ClassLabel> p,
                       std::map<std::string, std::string> f = {}) {
  return {index, std::move(p), std::move(f)};
}
}  // namespace

TEST_SUITE("eval") {

TEST_CASE("confusion counts") {
  const LabelMap gold{{"1", Y}, {"2", Y}, {"3", N}, {"4", N}};
  CHECK(eval::confusion(gold, gold) == eval::ConfusionCounts{2, 0, 0, 2});
  const LabelMap flipped{{"1", N}, {"2", N}, {"3", Y}, {"4", Y}};
  CHECK(eval::confusion(flipped, gold) == eval::ConfusionCounts{0, 2, 2, 0});
  try {
    eval::confusion({{"1", Y}, {"9", N}}, gold);
    FAIL("expected IdListError");
  } catch (const IdListError& e) {
    CHECK(e.ids() == std::vector<std::string>{"2", "3", "4", "9"});
  }
}

TEST_CASE("worked metric examples") {
  const auto m = eval::metrics_from_confusion({3, 1, 2, 4});
  CHECK(m.accuracy == doctest::Approx(0.7));
  CHECK(m.precision == doctest::Approx(0.75));
  CHECK(m.recall == doctest::Approx(0.6));
  CHECK(std::abs(m.f1 - 0.666667) < 1e-6);

  const auto z = eval::metrics_from_confusion({0, 0, 0, 5});
  CHECK(z.accuracy == 1.0);
  CHECK(z.precision == 0.0);
  CHECK(z.recall == 0.0);
  CHECK(z.f1 == 0.0);

  const auto p = eval::metrics_from_confusion({7, 0, 0, 0});
  CHECK(p.accuracy == 1.0);
  CHECK(p.f1 == 1.0);
  CHECK_THROWS_AS(eval::metrics_from_confusion({}), DataError);
}

TEST_CASE("metrics agree with a brute-force rational tally") {
  std::mt19937_64 rng(123);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 60);
    LabelMap pred, gold;
    long tp = 0, fp = 0, fn = 0, tn = 0;
    for (int i = 0; i < n; ++i) {
      const std::string id = std::to_string(i);
      const bool g = rng() % 3 == 0, p = rng() % 2 == 0;
      gold[id] = g ? Y : N;
      pred[id] = p ? Y : N;
      tp += g && p;
      fp += !g && p;
      fn += g && !p;
      tn += !g && !p;
    }
    const auto m = eval::metrics_from_confusion(eval::confusion(pred, gold));
    CHECK(m.accuracy == doctest::Approx(double(tp + tn) / n).epsilon(1e-12));
    const double prec = tp + fp ? double(tp) / (tp + fp) : 0.0;
    const double rec = tp + fn ? double(tp) / (tp + fn) : 0.0;
    // F1 as 2tp / (2tp + fp + fn), an algebraically equal form.
    const double f1 = tp ? 2.0 * tp / (2.0 * tp + fp + fn) : 0.0;
    CHECK(std::abs(m.precision - prec) < 1e-12);
    CHECK(std::abs(m.recall - rec) < 1e-12);
    CHECK(std::abs(m.f1 - f1) < 1e-12);
  }
}

TEST_CASE("consistency examples") {
  // Per-id predictions across two runs: a=[Y,Y], b=[Y,N], c=[N,N].
  const std::vector<llm::PredictionRun> runs{run(1, {{"a", Y}, {"b", Y}, {"c", N}}),
                                             run(2, {{"a", Y}, {"b", N}, {"c", N}})};
  const auto r = eval::consistency_at_k(runs, 2);
  CHECK(r.consistent_fraction == doctest::Approx(2.0 / 3.0));
  CHECK(r.per_id_consistent.at("b") == false);

  const std::vector<std::string> universe{"a", "b", "c", "d"};
  CHECK(eval::consistency_at_k(runs, 2, &universe).consistent_fraction == doctest::Approx(0.5));

  const std::vector<llm::PredictionRun> with_failure{run(1, {{"a", Y}}), run(2, {}, {{"a", "?"}})};
  CHECK(eval::consistency_at_k(with_failure, 2).consistent_fraction == 0.0);

  CHECK_THROWS_AS(eval::consistency_at_k(runs, 1), UsageError);
  CHECK_THROWS_AS(eval::consistency_at_k(runs, 3), UsageError);
}

TEST_CASE("consistency agrees with brute force and is non-increasing in k") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    const int ids = 40;
    std::vector<llm::PredictionRun> runs;
    for (int k = 1; k <= 25; ++k) {
      llm::PredictionRun r;
      r.run_index = k;
      for (int i = 0; i < ids; ++i) {
        const std::string id = std::to_string(i);
        const auto roll = rng() % 100;
        // Most ids are stable; a few flip or fail now and then.
        if (roll < 2) {
          r.failures[id] = "?";
        } else {
          r.predictions[id] = (i % 3 == 0) != (roll < 5) ? Y : N;
        }
      }
      runs.push_back(r);
    }
    std::vector<std::string> universe;
    for (int i = 0; i < ids; ++i) universe.push_back(std::to_string(i));
    double prev = 1.0;
    for (std::size_t k = 2; k <= 25; ++k) {
      std::size_t consistent = 0;
      for (const auto& id : universe) {
        bool ok = true;
        for (std::size_t j = 0; j < k && ok; ++j) {
          ok = runs[j].predictions.contains(id) &&
               runs[j].predictions.at(id) == runs[0].predictions.at(id);
        }
        consistent += ok;
      }
      const double got = eval::consistency_at_k(runs, k, &universe).consistent_fraction;
      CHECK(got == doctest::Approx(double(consistent) / ids).epsilon(1e-12));
      CHECK(got <= prev);
      prev = got;
    }
    const auto curve = eval::consistency_curve(runs, &universe);
    CHECK(curve.size() == 24);
    CHECK(curve.front().first == 2);
  }
}

TEST_CASE("unanimous runs vote to the single-run F1") {
  const LabelMap gold{{"1", Y}, {"2", N}, {"3", Y}, {"4", N}, {"5", N}};
  const LabelMap pred{{"1", Y}, {"2", Y}, {"3", N}, {"4", N}, {"5", N}};
  const std::vector<llm::PredictionRun> runs(5, run(1, pred));
  const auto single = eval::metrics_from_confusion(eval::confusion(pred, gold));
  const auto voted = eval::metrics_from_confusion(eval::confusion(llm::majority_vote(runs), gold));
  CHECK(voted.f1 == single.f1);
}

TEST_CASE("aggregation") {
  eval::MetricsReport a{0.80, 0.5, 0.5, 0.5}, b{0.82, 0.5, 0.5, 0.5}, c{0.84, 0.5, 0.5, 0.5};
  const std::vector<eval::MetricsReport> trials{a, b, c};
  const auto r = eval::aggregate(trials);
  CHECK(r.accuracy.mean == doctest::Approx(0.82));
  CHECK(r.accuracy.std == doctest::Approx(0.02));
  CHECK(r.precision.std == 0.0);
  CHECK(r.n_trials == 3);
  CHECK_FALSE(r.consistency.has_value());
  CHECK(eval::format_cell(r.accuracy) == "0.820 ± 0.020");

  const std::vector<eval::MetricsReport> shuffled{c, a, b};
  CHECK(eval::aggregate(shuffled).accuracy.mean == doctest::Approx(r.accuracy.mean));
  CHECK(eval::aggregate(shuffled).accuracy.std == doctest::Approx(r.accuracy.std));

  const std::vector<eval::MetricsReport> one{a};
  CHECK(eval::aggregate(one).accuracy.std == 0.0);
  CHECK_THROWS_AS(eval::aggregate({}), DataError);
  const std::vector<double> cons{0.9};
  CHECK_THROWS_AS(eval::aggregate(trials, cons), UsageError);
}

TEST_CASE("result tables") {
  eval::AggregateReport r;
  r.accuracy = {0.905, 0.01};
  r.precision = {0.8, 0.0};
  r.recall = {0.75, 0.02};
  r.f1 = {0.774, 0.011};
  const std::vector<eval::TableRow> rows{{"test", "Llama2-7b", r}};
  CHECK(eval::table_csv(rows, "Model") ==
        "Partition,Model,Accuracy,Precision,Recall,F1-Score,Consistency\n"
        "test,Llama2-7b,0.905 ± 0.010,0.800 ± 0.000,0.750 ± 0.020,0.774 ± 0.011,-\n");
  r.consistency = eval::MetricSummary{0.68, 0.0};
  const std::vector<eval::TableRow> with{{"test", "P1", r}};
  const std::string md = eval::table_markdown(with, "Prompt");
  CHECK(md.starts_with("| Partition | Prompt | Accuracy | Precision | Recall | F1-Score | "
                       "Consistency |\n| --- | --- | ---: |"));
  CHECK(md.find("| 0.680 ± 0.000 |") != std::string::npos);
}

}  // TEST_SUITE
