#include "cwp/prune.h"

#include <algorithm>
#include <cstdio>

#include "cwp/error.h"
#include "cwp/rng.h"

namespace cwp::prune {
namespace {

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

std::string fixed6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

std::string_view criterion_name(Criterion c) {
  switch (c) {
    case Criterion::kLabelYes: return "label_yes";
    case Criterion::kHasEntity: return "has_entity";
    case Criterion::kHasInformativeVerb: return "has_informative_verb";
    case Criterion::kLength: return "length";
  }
  return "";
}

std::string CriteriaSet::str() const {
  std::string out;
  for (Criterion c : kAllCriteria) {
    if (!has(c)) continue;
    if (!out.empty()) out += ',';
    out += criterion_name(c);
  }
  return out;
}

std::string_view mode_name(PruneMode mode) {
  switch (mode) {
    case PruneMode::kStep1Only: return "step1_only";
    case PruneMode::kStep2Only: return "step2_only";
    case PruneMode::kBoth: return "both";
  }
  return "";
}

void validate(const PruneConfig& config) {
  if (config.min_length < 1) throw UsageError("min_length must be >= 1");
  if (config.cnn_max_passes < 1) throw UsageError("cnn_max_passes must be >= 1");
}

CriterionVerdict is_informative(const Sentence& sentence, const AnnotationRecord& annotation,
                                const VerbCatalog& catalog, const PruneConfig& config,
                                std::size_t* missing_verbs) {
  if (annotation.sentence_id != sentence.id) {
    throw DataError("annotation '" + annotation.sentence_id + "' applied to sentence '" +
                    sentence.id + "'");
  }
  CriterionVerdict v;
  v.sentence_id = sentence.id;
  if (sentence.label == ClassLabel::kYes) v.fired.add(Criterion::kLabelYes);
  if (!annotation.entity_types.empty()) v.fired.add(Criterion::kHasEntity);
  for (const std::string& verb : annotation.verbs) {
    const auto category = catalog.category(verb);
    if (!category && missing_verbs) ++*missing_verbs;
    if (verbtax::is_informative(category.value_or(verbtax::VerbCategory::kNone))) {
      v.fired.add(Criterion::kHasInformativeVerb);
    }
  }
  if (annotation.content_token_count >= config.min_length) v.fired.add(Criterion::kLength);
  v.kept = !(v.fired & config.criteria_enabled).empty();
  return v;
}

Step1Result step1_filter(const DatasetPartition& partition,
                         std::span<const AnnotationRecord> annotations,
                         const VerbCatalog& catalog, const PruneConfig& config) {
  validate(config);
  std::unordered_map<std::string_view, const AnnotationRecord*> by_id;
  by_id.reserve(annotations.size());
  for (const AnnotationRecord& a : annotations) by_id.emplace(a.sentence_id, &a);

  std::vector<std::string> missing;
  for (const Sentence& s : partition.sentences) {
    if (!by_id.contains(s.id)) missing.push_back(s.id);
  }
  if (!missing.empty()) throw IdListError("sentences without annotations", std::move(missing));

  Step1Result out;
  out.kept.name = partition.name;
  out.kept.has_label_column = partition.has_label_column;
  out.verdicts.reserve(partition.size());
  for (const Sentence& s : partition.sentences) {
    CriterionVerdict v =
        is_informative(s, *by_id.at(s.id), catalog, config, &out.missing_verb_lookups);
    if (v.kept) out.kept.sentences.push_back(s);
    out.verdicts.push_back(std::move(v));
  }
  return out;
}

std::set<std::string> CnnResult::retained_ids(const EmbeddingMatrix& matrix) const {
  std::set<std::string> out;
  for (std::size_t r : retained_rows) out.insert(matrix.ids()[r]);
  return out;
}

std::vector<std::size_t> cnn_majority_order(std::span<const std::size_t> majority_rows,
                                            std::uint64_t seed) {
  std::vector<std::size_t> order(majority_rows.begin(), majority_rows.end());
  std::sort(order.begin(), order.end());
  seeded_shuffle(std::span<std::size_t>(order), seed);
  return order;
}

CnnResult cnn_undersample(const EmbeddingMatrix& matrix,
                          const std::unordered_map<std::string, ClassLabel>& labels,
                          const CnnOptions& options) {
  if (options.max_passes < 1) throw UsageError("cnn max_passes must be >= 1");
  if (matrix.dim() == 0) throw DataError("condensed nearest neighbour needs dim > 0");
  const std::size_t n = matrix.rows();

  std::vector<ClassLabel> row_label(n);
  std::vector<std::string> unlabeled;
  std::size_t n_yes = 0;
  for (std::size_t r = 0; r < n; ++r) {
    const auto it = labels.find(matrix.ids()[r]);
    if (it == labels.end()) {
      unlabeled.push_back(matrix.ids()[r]);
      continue;
    }
    row_label[r] = it->second;
    if (it->second == ClassLabel::kYes) ++n_yes;
  }
  if (!unlabeled.empty()) throw IdListError("embedding rows without labels", std::move(unlabeled));
  const std::size_t n_no = n - n_yes;
  if (n_yes == 0 || n_no == 0) {
    throw DataError("condensed nearest neighbour needs both classes (Yes=" +
                    std::to_string(n_yes) + ", No=" + std::to_string(n_no) + ")");
  }
  const ClassLabel minority = options.minority_override.value_or(ClassLabel::kYes);
  if (!options.minority_override && n_yes > n_no) {
    throw DataError("Yes is the majority class (Yes=" + std::to_string(n_yes) + ", No=" +
                    std::to_string(n_no) + "); set a minority override to proceed");
  }

  std::vector<std::size_t> store;
  std::vector<std::size_t> majority_rows;
  for (std::size_t r = 0; r < n; ++r) {
    (row_label[r] == minority ? store : majority_rows).push_back(r);
  }
  const std::vector<std::size_t> order = cnn_majority_order(majority_rows, options.seed);
  std::vector<char> in_store(n, 0);
  for (std::size_t r : store) in_store[r] = 1;
  store.push_back(order.front());
  in_store[order.front()] = 1;

  const nn::DenseRows rows{matrix.data(), n, matrix.dim()};
  const std::span<const std::size_t> pending(order.data() + 1, order.size() - 1);

  // best[i] is the nearest store member to pending[i] among the first
  // checked[i] store entries; the store only grows, so later scans only need
  // the entries appended since.
  std::vector<nn::Neighbor> best(pending.size());
  std::vector<std::size_t> checked(pending.size(), store.size());
  nn::nearest_batch(options.backend, rows, pending, store, best);

  CnnResult result;
  result.minority = minority;
  while (result.passes < options.max_passes) {
    bool added = false;
    for (std::size_t i = 0; i < pending.size(); ++i) {
      const std::size_t r = pending[i];
      if (in_store[r]) continue;
      if (checked[i] < store.size()) {
        const std::span<const std::size_t> fresh(store.data() + checked[i],
                                                 store.size() - checked[i]);
        const nn::Neighbor candidate = nn::nearest(options.backend, rows, rows.row(r), fresh);
        if (candidate < best[i]) best[i] = candidate;
        checked[i] = store.size();
      }
      if (row_label[best[i].row] != row_label[r]) {
        store.push_back(r);
        in_store[r] = 1;
        added = true;
      }
    }
    ++result.passes;
    if (!added) {
      result.converged = true;
      break;
    }
  }

  result.retained_rows = std::move(store);
  std::sort(result.retained_rows.begin(), result.retained_rows.end());
  return result;
}

nlohmann::json to_json(const PruneReport& r) {
  return {
      {"mode", mode_name(r.mode)},
      {"min_length", r.min_length},
      {"seed", r.seed},
      {"input_size", r.input_size},
      {"after_step1", r.after_step1},
      {"after_step2", r.after_step2},
      {"retained_fraction", r.retained_fraction},
      {"positive_fraction_after", r.positive_fraction_after},
      {"criterion_fires",
       {{"label_yes", r.fires_label_yes},
        {"has_entity", r.fires_has_entity},
        {"has_informative_verb", r.fires_has_informative_verb},
        {"length", r.fires_length}}},
      {"cnn_passes_run", r.cnn_passes_run},
      {"cnn_converged", r.cnn_converged},
      {"missing_verb_lookups", r.missing_verb_lookups},
  };
}

PruneOutput two_step_prune(const DatasetPartition& partition,
                           std::span<const AnnotationRecord> annotations,
                           const VerbCatalog& catalog, const EmbeddingMatrix* matrix,
                           const PruneConfig& config) {
  validate(config);
  PruneOutput out;
  PruneReport& report = out.report;
  report.mode = config.mode;
  report.min_length = config.min_length;
  report.seed = config.cnn_seed;
  report.input_size = partition.size();

  DatasetPartition survivors;
  if (config.mode == PruneMode::kStep2Only) {
    survivors = partition;
  } else {
    Step1Result step1 = step1_filter(partition, annotations, catalog, config);
    for (const CriterionVerdict& v : step1.verdicts) {
      report.fires_label_yes += v.fired.has(Criterion::kLabelYes);
      report.fires_has_entity += v.fired.has(Criterion::kHasEntity);
      report.fires_has_informative_verb += v.fired.has(Criterion::kHasInformativeVerb);
      report.fires_length += v.fired.has(Criterion::kLength);
    }
    report.missing_verb_lookups = step1.missing_verb_lookups;
    survivors = std::move(step1.kept);
    out.verdicts = std::move(step1.verdicts);
  }
  report.after_step1 = survivors.size();
  for (const Sentence& s : survivors.sentences) out.step1_ids.insert(s.id);

  if (config.mode == PruneMode::kStep1Only) {
    out.pruned = std::move(survivors);
  } else {
    if (!matrix) throw UsageError("step 2 needs an embedding matrix");
    std::vector<std::size_t> rows;
    std::vector<std::string> missing;
    std::vector<std::string> unlabeled;
    std::unordered_map<std::string, ClassLabel> labels;
    rows.reserve(survivors.size());
    for (const Sentence& s : survivors.sentences) {
      if (auto r = matrix->find(s.id)) {
        rows.push_back(*r);
      } else {
        missing.push_back(s.id);
      }
      if (s.label) {
        labels.emplace(s.id, *s.label);
      } else {
        unlabeled.push_back(s.id);
      }
    }
    if (!missing.empty()) throw IdListError("sentences without embeddings", std::move(missing));
    if (!unlabeled.empty()) {
      throw IdListError("step 2 needs labeled sentences", std::move(unlabeled));
    }
    const EmbeddingMatrix sub = matrix->select(rows);
    CnnOptions cnn;
    cnn.seed = config.cnn_seed;
    cnn.max_passes = config.cnn_max_passes;
    cnn.minority_override = config.minority_override;
    cnn.backend = config.backend;
    const CnnResult result = cnn_undersample(sub, labels, cnn);
    report.cnn_passes_run = result.passes;
    report.cnn_converged = result.converged;

    std::vector<char> keep(sub.rows(), 0);
    for (std::size_t r : result.retained_rows) keep[r] = 1;
    out.pruned.name = survivors.name;
    out.pruned.has_label_column = survivors.has_label_column;
    for (std::size_t i = 0; i < survivors.size(); ++i) {
      if (keep[i]) out.pruned.sentences.push_back(survivors.sentences[i]);
    }
  }

  report.after_step2 = out.pruned.size();
  const auto positives = static_cast<std::size_t>(std::count_if(
      out.pruned.sentences.begin(), out.pruned.sentences.end(),
      [](const Sentence& s) { return s.label == ClassLabel::kYes; }));
  report.retained_fraction = ratio(report.after_step2, report.input_size);
  report.positive_fraction_after = ratio(positives, report.after_step2);
  return out;
}

std::vector<std::pair<std::size_t, PruneReport>> sweep_min_length(
    const DatasetPartition& partition, std::span<const AnnotationRecord> annotations,
    const VerbCatalog& catalog, const EmbeddingMatrix* matrix,
    std::span<const std::size_t> lengths, const PruneConfig& base) {
  if (lengths.empty()) throw UsageError("min-length sweep needs at least one length");
  for (std::size_t i = 1; i < lengths.size(); ++i) {
    if (lengths[i] <= lengths[i - 1]) throw UsageError("sweep lengths must be ascending");
  }
  std::vector<std::pair<std::size_t, PruneReport>> out;
  out.reserve(lengths.size());
  for (std::size_t length : lengths) {
    PruneConfig config = base;
    config.min_length = length;
    out.emplace_back(length, two_step_prune(partition, annotations, catalog, matrix, config).report);
  }
  return out;
}

std::string sweep_csv(std::span<const std::pair<std::size_t, PruneReport>> rows) {
  std::string out = "min_length,after_step1,after_step2,positive_fraction\n";
  for (const auto& [length, report] : rows) {
    out += std::to_string(length) + ',' + std::to_string(report.after_step1) + ',' +
           std::to_string(report.after_step2) + ',' +
           fixed6(report.positive_fraction_after) + '\n';
  }
  return out;
}

std::string verdicts_tsv(std::span<const CriterionVerdict> verdicts) {
  std::string out = "sentence_id\tkept\tfired\n";
  for (const CriterionVerdict& v : verdicts) {
    out += v.sentence_id;
    out += v.kept ? "\t1\t" : "\t0\t";
    out += v.fired.str();
    out += '\n';
  }
  return out;
}

}  // namespace cwp::prune
