#include "cwp/cli.h"

#include <cstdio>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cwp/annotate.h"
#include "cwp/chat.h"
#include "cwp/corpus.h"
#include "cwp/embed.h"
#include "cwp/error.h"
#include "cwp/eval.h"
#include "cwp/io.h"
#include "cwp/llm.h"
#include "cwp/prune.h"
#include "cwp/run_config.h"
#include "cwp/text.h"
#include "cwp/verbtax.h"

namespace cwp::cli {
namespace {

using corpus::ClassLabel;
using corpus::DatasetPartition;

struct GlobalFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
};

// Loads the config, applies global flags, checks inputs and logs the
// effective config into the output directory.
RunConfig prepare(const GlobalFlags& flags) {
  RunConfig config = flags.config.empty() ? RunConfig{} : load_run_config(flags.config);
  if (flags.seed) {
    config.seed = *flags.seed;
    config.prune.cnn_seed = *flags.seed;
  }
  if (!flags.out.empty()) config.out_dir = flags.out;
  check_inputs_exist(config);
  fs::create_directories(config.out_dir);
  io::write_file(config.out_dir / "run_config.json", to_json(config).dump(2) + "\n");
  return config;
}

void emit(const RunConfig& config, const std::string& name, std::string_view bytes) {
  io::write_file(config.out_dir / name, bytes);
  std::cerr << "wrote " << (config.out_dir / name).string() << "\n";
}

DatasetPartition load_partition(const RunConfig& config, const std::string& name) {
  const fs::path& path = config.partition_path(name);
  const std::string bytes = io::read_file(path);
  try {
    return corpus::parse_tsv(bytes, config.schema, corpus::PartitionName::parse(name));
  } catch (const ParseError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

annotate::AnnotationSource annotation_source(const RunConfig& config) {
  if (!config.annotations) return annotate::AnnotationSource::builtin();
  try {
    return annotate::AnnotationSource::external_file(io::read_file(*config.annotations),
                                                     config.annotations->string());
  } catch (const ParseError& e) {
    throw DataError(config.annotations->string() + ": " + e.what());
  }
}

std::vector<annotate::AnnotationRecord> annotations_for(const RunConfig& config,
                                                        const DatasetPartition& partition) {
  return annotate::annotate_dataset(partition, annotation_source(config),
                                    annotate::default_stopwords());
}

verbtax::VerbCatalog load_catalog(const RunConfig& config, bool required) {
  const fs::path path = config.catalog_path();
  verbtax::VerbCatalog catalog;
  if (fs::exists(path)) {
    try {
      catalog = verbtax::parse_catalog(io::read_file(path));
    } catch (const ParseError& e) {
      throw DataError(path.string() + ": " + e.what());
    }
  } else if (required) {
    throw UsageError("verb catalog not found: " + path.string() +
                     " (run classify-verbs first or set paths.verb_catalog)");
  }
  if (config.verb_overrides) {
    try {
      verbtax::apply_overrides(catalog, io::read_file(*config.verb_overrides));
    } catch (const ParseError& e) {
      throw DataError(config.verb_overrides->string() + ": " + e.what());
    }
  }
  return catalog;
}

embed::EmbeddingMatrix load_matrix(const RunConfig& config, const DatasetPartition& partition) {
  if (!config.embeddings) {
    return embed::embed_partition(partition, config.embed_dim, config.seed);
  }
  return embed::load_embeddings(io::read_file(*config.embeddings),
                                io::read_file(*config.embedding_ids));
}

llm::HttpChatClient make_client(const RunConfig& config) {
  llm::Endpoint endpoint;
  endpoint.base_url = config.llm.base_url;
  endpoint.api_key = llm::resolve_api_key(config.llm.api_key_file);
  return llm::HttpChatClient(endpoint, config.llm.retry);
}

std::vector<std::string> ids_of(const DatasetPartition& partition) {
  std::vector<std::string> ids;
  ids.reserve(partition.size());
  for (const auto& s : partition.sentences) ids.push_back(s.id);
  return ids;
}

std::map<std::string, ClassLabel> gold_labels(const DatasetPartition& partition) {
  std::map<std::string, ClassLabel> gold;
  std::vector<std::string> unlabeled;
  for (const auto& s : partition.sentences) {
    if (s.label) {
      gold.emplace(s.id, *s.label);
    } else {
      unlabeled.push_back(s.id);
    }
  }
  if (!unlabeled.empty()) throw IdListError("gold partition has unlabeled rows", unlabeled);
  return gold;
}

// ---- subcommands ----

void cmd_stats(const RunConfig& config, std::vector<std::string> names) {
  if (names.empty()) {
    for (const auto& [name, _] : config.partitions) names.push_back(name);
  }
  if (names.empty()) throw UsageError("stats: no partitions configured");
  nlohmann::json doc = nlohmann::json::object();
  std::string csv = "partition,length,raw_count,content_count\n";
  for (const std::string& name : names) {
    const DatasetPartition partition = load_partition(config, name);
    const corpus::DatasetStats stats =
        corpus::compute_stats(partition, annotate::default_stopwords());
    doc[name] = corpus::to_json(stats);
    std::set<std::size_t> lengths;
    for (const auto& [l, _] : stats.length_histogram) lengths.insert(l);
    for (const auto& [l, _] : stats.content_length_histogram) lengths.insert(l);
    for (std::size_t l : lengths) {
      auto count = [l](const std::map<std::size_t, std::size_t>& h) {
        const auto it = h.find(l);
        return it == h.end() ? std::size_t{0} : it->second;
      };
      csv += text::csv_field(name) + ',' + std::to_string(l) + ',' +
             std::to_string(count(stats.length_histogram)) + ',' +
             std::to_string(count(stats.content_length_histogram)) + '\n';
    }
    std::cout << name << ": yes=" << stats.n_yes << " no=" << stats.n_no
              << " total=" << stats.n_total << "\n";
  }
  emit(config, "stats.json", doc.dump(2) + "\n");
  emit(config, "length_histogram.csv", csv);
}

void cmd_annotate(const RunConfig& config, const std::string& name) {
  const DatasetPartition partition = load_partition(config, name);
  const auto records = annotations_for(config, partition);
  emit(config, "annotations.tsv", annotate::write_annotation_file(records));
}

void cmd_embed(const RunConfig& config, const std::string& name) {
  const DatasetPartition partition = load_partition(config, name);
  const auto matrix = embed::embed_partition(partition, config.embed_dim, config.seed);
  emit(config, "embeddings.cwem", embed::save_matrix(matrix));
  emit(config, "embeddings.ids.txt", embed::save_ids(matrix));
}

void cmd_classify_verbs(const RunConfig& config, const std::string& name) {
  const DatasetPartition partition = load_partition(config, name);
  const auto records = annotations_for(config, partition);
  std::set<std::string> verbs;
  for (const auto& r : records) verbs.insert(r.verbs.begin(), r.verbs.end());

  const fs::path catalog_path = config.catalog_path();
  verbtax::VerbCatalog catalog = load_catalog(config, false);
  llm::HttpChatClient client = make_client(config);
  verbtax::ClassifyOptions options;
  options.model = config.llm.model;
  options.in_flight = config.llm.in_flight;
  options.persist = [&catalog_path](const verbtax::VerbCatalog& c) {
    io::write_file(catalog_path, verbtax::write_catalog(c));
  };
  verbtax::ClassifyStats stats;
  catalog = verbtax::classify_verbs(verbs, client, std::move(catalog), options, &stats);
  io::write_file(catalog_path, verbtax::write_catalog(catalog));
  std::cerr << "verbs: " << verbs.size() << " requested=" << stats.requested
            << " cached=" << stats.cached << " failed=" << stats.failed << "\n";

  const std::string csv =
      verbtax::distribution_csv(verbtax::category_distribution(catalog, records));
  emit(config, "verb_distribution.csv", csv);
  std::cout << csv;
}

struct PruneFlags {
  std::string partition = "train";
  bool step1_only = false;
  bool step2_only = false;
  bool both = false;
  std::optional<std::size_t> min_length;
  bool single_pass = false;
  std::string backend = "parallel";
  std::string minority;
};

prune::PruneConfig prune_config(const RunConfig& config, const PruneFlags& flags) {
  prune::PruneConfig pc = config.prune;
  pc.cnn_seed = config.seed;
  if (flags.step1_only + flags.step2_only + flags.both > 1) {
    throw UsageError("choose one of --step1-only, --step2-only, --both");
  }
  if (flags.step1_only) pc.mode = prune::PruneMode::kStep1Only;
  if (flags.step2_only) pc.mode = prune::PruneMode::kStep2Only;
  if (flags.both) pc.mode = prune::PruneMode::kBoth;
  if (flags.min_length) pc.min_length = *flags.min_length;
  if (flags.single_pass) pc.cnn_max_passes = 1;
  pc.backend = flags.backend == "serial" ? nn::Backend::kSerial : nn::Backend::kParallel;
  if (!flags.minority.empty()) {
    pc.minority_override = corpus::parse_label(flags.minority, true);
  }
  prune::validate(pc);
  return pc;
}

void cmd_prune(const RunConfig& config, const PruneFlags& flags) {
  const prune::PruneConfig pc = prune_config(config, flags);
  const DatasetPartition partition = load_partition(config, flags.partition);
  std::vector<annotate::AnnotationRecord> records;
  verbtax::VerbCatalog catalog;
  if (pc.mode != prune::PruneMode::kStep2Only) {
    records = annotations_for(config, partition);
    catalog = load_catalog(config, true);
  }
  std::optional<embed::EmbeddingMatrix> matrix;
  if (pc.mode != prune::PruneMode::kStep1Only) matrix = load_matrix(config, partition);

  const prune::PruneOutput out =
      prune::two_step_prune(partition, records, catalog, matrix ? &*matrix : nullptr, pc);
  emit(config, "pruned.tsv", corpus::write_tsv(out.pruned, config.schema));
  emit(config, "prune_report.json", prune::to_json(out.report).dump(2) + "\n");
  if (!out.verdicts.empty()) emit(config, "verdicts.tsv", prune::verdicts_tsv(out.verdicts));
  std::cout << "input=" << out.report.input_size << " after_step1=" << out.report.after_step1
            << " after_step2=" << out.report.after_step2 << "\n";
  if (!out.report.cnn_converged) {
    std::cerr << "warning: CNN stopped after " << out.report.cnn_passes_run
              << " passes without converging\n";
  }
}

std::vector<std::size_t> parse_lengths(const std::string& arg) {
  std::vector<std::size_t> out;
  for (std::string_view piece : text::split(arg, ',')) {
    piece = text::trim(piece);
    const std::size_t dash = piece.find('-');
    auto number = [](std::string_view s) -> std::size_t {
      s = text::trim(s);
      if (s.empty() || s.find_first_not_of("0123456789") != std::string_view::npos ||
          s.size() > 6) {
        throw UsageError("bad length '" + std::string(s) + "' in --lengths");
      }
      return std::stoul(std::string(s));
    };
    if (dash == std::string_view::npos) {
      out.push_back(number(piece));
    } else {
      const std::size_t lo = number(piece.substr(0, dash));
      const std::size_t hi = number(piece.substr(dash + 1));
      if (lo > hi) throw UsageError("bad range '" + std::string(piece) + "' in --lengths");
      for (std::size_t l = lo; l <= hi; ++l) out.push_back(l);
    }
  }
  return out;
}

void cmd_sweep(const RunConfig& config, const PruneFlags& flags, const std::string& lengths) {
  const prune::PruneConfig pc = prune_config(config, flags);
  const std::vector<std::size_t> ls = parse_lengths(lengths);
  const DatasetPartition partition = load_partition(config, flags.partition);
  const auto records = annotations_for(config, partition);
  const auto catalog = load_catalog(config, true);
  std::optional<embed::EmbeddingMatrix> matrix;
  if (pc.mode != prune::PruneMode::kStep1Only) matrix = load_matrix(config, partition);
  const auto rows = prune::sweep_min_length(partition, records, catalog,
                                            matrix ? &*matrix : nullptr, ls, pc);
  const std::string csv = prune::sweep_csv(rows);
  emit(config, "sweep.csv", csv);
  std::cout << csv;
}

struct PredictFlags {
  std::string partition = "test";
  std::string variant = "refined";
  int k = llm::kDefaultRuns;
};

void cmd_predict(const RunConfig& config, const PredictFlags& flags) {
  const auto variant = llm::parse_variant(flags.variant);
  if (!variant) throw UsageError("unknown prompt variant '" + flags.variant + "'");
  if (flags.k < 1) throw UsageError("--k must be >= 1");
  const DatasetPartition partition = load_partition(config, flags.partition);
  llm::HttpChatClient client = make_client(config);
  llm::PredictOptions options;
  options.model = config.llm.model;
  options.temperature = config.llm.temperature;
  options.max_tokens = config.llm.max_tokens;
  options.in_flight = config.llm.in_flight;
  const auto runs = llm::predict_dataset(partition, *variant, client, flags.k, options);
  const auto ids = ids_of(partition);
  emit(config, "predictions.tsv", llm::write_predictions(runs, ids));
  emit(config, "failures.tsv", llm::write_failures(runs, ids));
  std::size_t failures = 0;
  for (const auto& run : runs) failures += run.failures.size();
  if (failures) std::cerr << "unparseable responses: " << failures << "\n";
  const auto votes = llm::majority_vote(runs);
  emit(config, "votes.tsv", llm::write_votes(votes, ids));
}

struct EvalFlags {
  std::string partition = "test";
  std::vector<std::string> predictions;
  std::vector<std::string> failures;
  std::optional<std::size_t> k;
  std::string setting = "run";
  std::string setting_header = "Setting";
};

void cmd_eval(const RunConfig& config, EvalFlags flags) {
  if (flags.predictions.empty()) {
    flags.predictions.push_back((config.out_dir / "predictions.tsv").string());
  }
  if (!flags.failures.empty() && flags.failures.size() != flags.predictions.size()) {
    throw UsageError("give one --failures file per --predictions file, or none");
  }
  const std::size_t k = flags.k.value_or(config.eval_k);
  if (k < 2) throw UsageError("--k must be >= 2");
  const DatasetPartition partition = load_partition(config, flags.partition);
  const auto gold = gold_labels(partition);
  const auto ids = ids_of(partition);

  std::vector<eval::MetricsReport> trials;
  std::vector<double> consistency;
  nlohmann::json trial_docs = nlohmann::json::array();
  std::string curve = "trial,k,consistency\n";
  for (std::size_t t = 0; t < flags.predictions.size(); ++t) {
    const fs::path pred_path = flags.predictions[t];
    std::string failure_bytes;
    if (!flags.failures.empty()) {
      failure_bytes = io::read_file(flags.failures[t]);
    } else if (const fs::path sibling = pred_path.parent_path() / "failures.tsv";
               fs::exists(sibling)) {
      failure_bytes = io::read_file(sibling);
    }
    std::vector<llm::PredictionRun> runs;
    try {
      runs = llm::parse_predictions(io::read_file(pred_path), failure_bytes);
    } catch (const ParseError& e) {
      throw DataError(pred_path.string() + ": " + e.what());
    }
    const auto votes = llm::majority_vote(runs);
    const auto counts = eval::confusion(votes, gold);
    const auto metrics = eval::metrics_from_confusion(counts);
    trials.push_back(metrics);

    nlohmann::json doc = {
        {"trial", t + 1},
        {"runs", runs.size()},
        {"confusion",
         {{"tp", counts.tp}, {"fp", counts.fp}, {"fn", counts.fn}, {"tn", counts.tn}}},
        {"metrics", eval::to_json(metrics)},
    };
    if (runs.size() >= k) {
      const double c = eval::consistency_at_k(runs, k, &ids).consistent_fraction;
      consistency.push_back(c);
      doc["consistency"] = c;
    }
    for (const auto& [kk, frac] : eval::consistency_curve(runs, &ids)) {
      curve += std::to_string(t + 1) + ',' + std::to_string(kk) + ',' +
               text::format_number(frac) + '\n';
    }
    trial_docs.push_back(std::move(doc));
  }
  if (!consistency.empty() && consistency.size() != trials.size()) {
    std::cerr << "warning: some trials have fewer than " << k
              << " runs; consistency omitted from the aggregate\n";
    consistency.clear();
  }
  const eval::AggregateReport agg = eval::aggregate(trials, consistency);
  const nlohmann::json metrics_doc = {
      {"partition", flags.partition},
      {"setting", flags.setting},
      {"consistency_k", k},
      {"trials", trial_docs},
      {"aggregate", eval::to_json(agg)},
  };
  emit(config, "metrics.json", metrics_doc.dump(2) + "\n");
  const std::vector<eval::TableRow> rows{{flags.partition, flags.setting, agg}};
  emit(config, "table.csv", eval::table_csv(rows, flags.setting_header));
  const std::string md = eval::table_markdown(rows, flags.setting_header);
  emit(config, "table.md", md);
  emit(config, "consistency_curve.csv", curve);
  std::cout << md;
}

void cmd_project2d(const RunConfig& config, const PruneFlags& flags, bool stages) {
  const DatasetPartition partition = load_partition(config, flags.partition);
  const embed::EmbeddingMatrix matrix = load_matrix(config, partition);
  std::vector<std::size_t> rows;
  std::vector<std::string> missing;
  for (const auto& s : partition.sentences) {
    if (auto r = matrix.find(s.id)) {
      rows.push_back(*r);
    } else {
      missing.push_back(s.id);
    }
  }
  if (!missing.empty()) throw IdListError("sentences without embeddings", missing);
  const embed::EmbeddingMatrix sub = matrix.select(rows);
  const auto points = embed::project_2d(sub);

  std::unordered_map<std::string, ClassLabel> labels;
  for (const auto& s : partition.sentences) {
    if (s.label) labels.emplace(s.id, *s.label);
  }
  std::unordered_map<std::string, std::string> tags;
  if (stages) {
    prune::PruneConfig pc = prune_config(config, flags);
    pc.mode = prune::PruneMode::kBoth;
    const auto records = annotations_for(config, partition);
    const auto catalog = load_catalog(config, true);
    const auto out = prune::two_step_prune(partition, records, catalog, &sub, pc);
    std::set<std::string> retained;
    for (const auto& s : out.pruned.sentences) retained.insert(s.id);
    for (const auto& s : partition.sentences) {
      tags[s.id] = retained.contains(s.id)      ? "retained_step2"
                   : !out.step1_ids.contains(s.id) ? "filtered_step1"
                                                   : "original";
    }
  }
  emit(config, "projection.csv",
       embed::projection_csv(points, labels, stages ? &tags : nullptr));
}

void cmd_finetune_config(const RunConfig& config, const std::string& model) {
  const std::string doc = llm::emit_finetune_config(model);
  emit(config, "finetune_config.json", doc);
  std::cout << doc;
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kUsage: return kExitUsage;
    case ErrorKind::kData: return kExitData;
    case ErrorKind::kEndpoint: return kExitEndpoint;
  }
  return kExitData;
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"Training-data pruning and LLM evaluation toolkit for check-worthiness detection",
               "cwp"};
  app.require_subcommand(1);
  GlobalFlags global;
  app.add_option("--config", global.config, "Run configuration (JSON)");
  app.add_option("--seed", global.seed, "Seed for every random choice");
  app.add_option("--out", global.out, "Output directory (default: out)");

  std::vector<std::string> stats_partitions;
  auto* stats = app.add_subcommand("stats", "Label counts and length histograms");
  stats->add_option("--partition", stats_partitions, "Partition name (repeatable)");

  std::string partition = "train";
  auto* annotate = app.add_subcommand("annotate", "Entity and verb annotations");
  annotate->add_option("--partition", partition, "Partition name");
  auto* embed_cmd = app.add_subcommand("embed", "Hashed bag-of-words embeddings");
  embed_cmd->add_option("--partition", partition, "Partition name");
  auto* classify = app.add_subcommand("classify-verbs", "Classify verbs via the chat endpoint");
  classify->add_option("--partition", partition, "Partition name");

  PruneFlags prune_flags;
  auto add_prune_flags = [&prune_flags](CLI::App* sub) {
    sub->add_option("--partition", prune_flags.partition, "Partition name");
    sub->add_flag("--step1-only", prune_flags.step1_only, "Informative-sentence filter only");
    sub->add_flag("--step2-only", prune_flags.step2_only, "CNN undersampling only");
    sub->add_flag("--both", prune_flags.both, "Both steps (default)");
    sub->add_option("--min-length", prune_flags.min_length, "Minimum content tokens")
        ->check(CLI::PositiveNumber);
    sub->add_flag("--cnn-single-pass", prune_flags.single_pass, "Stop CNN after one pass");
    sub->add_option("--backend", prune_flags.backend, "Nearest-neighbour backend")
        ->check(CLI::IsMember({"serial", "parallel"}));
    sub->add_option("--minority", prune_flags.minority, "Force the minority class (Yes|No)")
        ->check(CLI::IsMember({"Yes", "No", "yes", "no"}));
  };
  auto* prune_cmd = app.add_subcommand("prune", "Two-step training-data pruning");
  add_prune_flags(prune_cmd);
  std::string lengths = "3-10";
  auto* sweep = app.add_subcommand("sweep", "Pruning sizes across minimum lengths");
  add_prune_flags(sweep);
  sweep->add_option("--lengths", lengths, "Comma list or ranges, e.g. 3-10 or 4,8");

  PredictFlags predict_flags;
  auto* predict = app.add_subcommand("predict", "K-run prediction with majority vote");
  predict->add_option("--partition", predict_flags.partition, "Partition name");
  predict->add_option("--variant", predict_flags.variant,
                      "refined|compressed|expanded|no-instruction");
  predict->add_option("--k", predict_flags.k, "Number of runs")->check(CLI::PositiveNumber);

  EvalFlags eval_flags;
  auto* eval_cmd = app.add_subcommand("eval", "Metrics, consistency and result tables");
  eval_cmd->add_option("--partition", eval_flags.partition, "Gold partition name");
  eval_cmd->add_option("--predictions", eval_flags.predictions,
                       "Predictions file, one per trial (repeatable)");
  eval_cmd->add_option("--failures", eval_flags.failures,
                       "Failures file matching each --predictions");
  eval_cmd->add_option("--k", eval_flags.k, "Consistency window");
  eval_cmd->add_option("--label", eval_flags.setting, "Row label (model, prompt, technique)");
  eval_cmd->add_option("--label-header", eval_flags.setting_header, "Header of the row label");

  bool no_stages = false;
  auto* project = app.add_subcommand("project2d", "2D principal-component projection");
  add_prune_flags(project);
  project->add_flag("--no-stages", no_stages, "Omit pruning-stage tags");

  std::string model;
  auto* finetune = app.add_subcommand("finetune-config", "Fine-tuning hyper-parameters");
  finetune->add_option("--model", model, "Model name")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    const RunConfig config = prepare(global);
    if (stats->parsed()) cmd_stats(config, stats_partitions);
    else if (annotate->parsed()) cmd_annotate(config, partition);
    else if (embed_cmd->parsed()) cmd_embed(config, partition);
    else if (classify->parsed()) cmd_classify_verbs(config, partition);
    else if (prune_cmd->parsed()) cmd_prune(config, prune_flags);
    else if (sweep->parsed()) cmd_sweep(config, prune_flags, lengths);
    else if (predict->parsed()) cmd_predict(config, predict_flags);
    else if (eval_cmd->parsed()) cmd_eval(config, eval_flags);
    else if (project->parsed()) cmd_project2d(config, prune_flags, !no_stages);
    else if (finetune->parsed()) cmd_finetune_config(config, model);
  } catch (const Error& e) {
    std::cerr << "cwp: error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const fs::filesystem_error& e) {
    std::cerr << "cwp: error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "cwp: internal error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitOk;
}

}  // namespace cwp::cli
