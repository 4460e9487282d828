#ifndef CWP_RUN_CONFIG_H_
#define CWP_RUN_CONFIG_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "cwp/chat.h"
#include "cwp/corpus.h"
#include "cwp/prune.h"
#include "json.hpp"

namespace cwp::cli {

namespace fs = std::filesystem;

struct LlmSettings {
  std::string base_url = "http://127.0.0.1:8000";
  std::string model = "default";
  double temperature = llm::kDefaultTemperature;
  int max_tokens = llm::kDefaultMaxTokens;
  std::size_t in_flight = 1;
  llm::RetryPolicy retry;
  std::optional<fs::path> api_key_file;
};

// Everything a subcommand needs. Relative paths in a config file resolve
// against the file's directory.
struct RunConfig {
  std::map<std::string, fs::path> partitions;  // train, dev, dev_test, test, ...
  std::optional<fs::path> annotations;         // external annotation TSV
  std::optional<fs::path> embeddings;          // .cwem matrix
  std::optional<fs::path> embedding_ids;
  std::optional<fs::path> verb_catalog;        // default: <out>/verb_catalog.tsv
  std::optional<fs::path> verb_overrides;
  // Free text describing how the embedding file was produced (encoder,
  // pooling, input text). Echoed into run_config.json, never interpreted.
  std::string embedding_provenance;
  corpus::TsvSchema schema;
  LlmSettings llm;
  prune::PruneConfig prune;
  std::size_t embed_dim = 768;
  std::size_t eval_k = 5;
  std::uint64_t seed = 0;
  fs::path out_dir = "out";

  const fs::path& partition_path(const std::string& name) const;
  fs::path catalog_path() const;
};

// Throws UsageError for unknown keys, wrong types, or bad values.
RunConfig parse_run_config(const nlohmann::json& doc, const fs::path& base_dir);
RunConfig load_run_config(const fs::path& path);

// The effective configuration without the output directory or any secret,
// so identical runs into different directories log identical bytes.
nlohmann::json to_json(const RunConfig& config);

// Throws UsageError naming the first configured input path that is missing.
// The verb catalog is exempt: classify-verbs creates it.
void check_inputs_exist(const RunConfig& config);

}  // namespace cwp::cli

#endif  // CWP_RUN_CONFIG_H_
