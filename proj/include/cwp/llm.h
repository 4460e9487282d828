#ifndef CWP_LLM_H_
#define CWP_LLM_H_

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cwp/chat.h"
#include "cwp/corpus.h"
#include "json.hpp"

namespace cwp::llm {

using corpus::ClassLabel;
using corpus::DatasetPartition;
using corpus::Sentence;

enum class PromptVariant { kRefined, kCompressed, kExpanded, kNoInstruction };

// refined, compressed, expanded, no-instruction. parse_variant also takes
// p1, p2, p3, none.
std::string_view variant_name(PromptVariant variant);
std::optional<PromptVariant> parse_variant(std::string_view name);

// The raw template; the sentence slot is the literal "<input sentence>".
std::string_view prompt_template(PromptVariant variant);

// Template with the sentence substituted, ending at "### Response:".
std::string render_prompt(PromptVariant variant, const Sentence& sentence);

// Only the text after the last "### Response:" is considered; the first
// standalone yes/no token (case-insensitive) decides. Throws
// UnparseableResponse otherwise.
ClassLabel parse_yes_no(std::string_view text);

struct PredictionRun {
  int run_index = 1;  // 1..K
  std::map<std::string, ClassLabel> predictions;
  std::map<std::string, std::string> failures;  // id -> raw response

  bool operator==(const PredictionRun&) const = default;
};

inline constexpr int kDefaultRuns = 5;

struct PredictOptions {
  std::string model;
  double temperature = kDefaultTemperature;
  int max_tokens = kDefaultMaxTokens;
  std::size_t in_flight = 1;
};

// K sequential passes over the partition. Unparseable answers land in
// failures; endpoint errors propagate.
std::vector<PredictionRun> predict_dataset(const DatasetPartition& partition,
                                           PromptVariant variant,
                                           ChatClient& client, int k,
                                           const PredictOptions& options = {});

// Label with strictly more votes among each id's successful runs. Throws
// IdListError listing every tied id (including ids with no successful run).
std::map<std::string, ClassLabel> majority_vote(std::span<const PredictionRun> runs);

// sentence_id<TAB>run_index<TAB>label, header included; rows ordered by
// run, then by the given id order.
std::string write_predictions(std::span<const PredictionRun> runs,
                              std::span<const std::string> id_order);
// sentence_id<TAB>run_index<TAB>raw, raw escaped (\\, \t, \n, \r).
std::string write_failures(std::span<const PredictionRun> runs,
                           std::span<const std::string> id_order);
// sentence_id<TAB>label, header included.
std::string write_votes(const std::map<std::string, ClassLabel>& votes,
                        std::span<const std::string> id_order);

// Rebuilds runs from a predictions file and an optional failures file. Run
// indices must cover 1..K.
std::vector<PredictionRun> parse_predictions(std::string_view predictions,
                                             std::string_view failures = {});

struct FinetuneConfig {
  std::string model_name;
  int epochs = 3;
  int train_batch_size = 2;
  int gradient_accumulation_steps = 2;
  std::string optimizer = "paged_adamw_32bit";
  double learning_rate = 2e-4;
  double weight_decay = 0.001;
  double max_grad_norm = 0.3;
  double warmup_ratio = 0.03;
  double temperature = 0.03;
  int lora_alpha = 16;
  double lora_dropout = 0.1;
  int lora_rank = 64;
};

// Shared LoRA settings; models whose name contains "mixtral" (any case) get
// batch size 1 with 4 accumulation steps.
FinetuneConfig finetune_config_for(std::string_view model_name);
nlohmann::json to_json(const FinetuneConfig& config);
// Sorted keys, two-space indent, trailing newline.
std::string emit_finetune_config(std::string_view model_name);

}  // namespace cwp::llm

#endif  // CWP_LLM_H_
