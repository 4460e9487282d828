#include "cwp/llm.h"

#include <algorithm>
#include <cctype>
#include <set>

#include "cwp/assets.h"
#include "cwp/error.h"
#include "cwp/text.h"
#include "cwp/workers.h"

namespace cwp::llm {
namespace {

constexpr std::string_view kSentenceSlot = "<input sentence>";
constexpr std::string_view kResponseMarker = "### Response:";

std::string escape_raw(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  for (char c : raw) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      default: out += c;
    }
  }
  return out;
}

std::string unescape_raw(std::string_view s, std::size_t line) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '\\') {
      out += s[i];
      continue;
    }
    if (++i == s.size()) throw ParseError(line, "dangling escape");
    switch (s[i]) {
      case '\\': out += '\\'; break;
      case 't': out += '\t'; break;
      case 'n': out += '\n'; break;
      case 'r': out += '\r'; break;
      default: throw ParseError(line, std::string("unknown escape \\") + s[i]);
    }
  }
  return out;
}

int parse_run_index(std::string_view s, std::size_t line) {
  int value = 0;
  if (s.empty() || s.size() > 6) throw ParseError(line, "bad run index");
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) throw ParseError(line, "bad run index");
    value = value * 10 + (c - '0');
  }
  if (value < 1) throw ParseError(line, "run index must be >= 1");
  return value;
}

// Rows of a three-column TSV with the given header, as (line, fields).
std::vector<std::pair<std::size_t, std::vector<std::string_view>>> tsv_rows(
    std::string_view bytes, std::string_view header) {
  std::vector<std::pair<std::size_t, std::vector<std::string_view>>> rows;
  const auto all = text::lines(bytes);
  if (all.empty()) throw ParseError(1, "missing header");
  auto strip_cr = [](std::string_view l) {
    return !l.empty() && l.back() == '\r' ? l.substr(0, l.size() - 1) : l;
  };
  if (strip_cr(all[0]) != header) {
    throw ParseError(1, "expected header '" + std::string(header) + "'");
  }
  for (std::size_t i = 1; i < all.size(); ++i) {
    const std::string_view l = strip_cr(all[i]);
    if (l.empty()) continue;
    auto fields = text::split(l, '\t');
    if (fields.size() != 3) throw ParseError(i + 1, "expected 3 fields");
    if (fields[0].empty()) throw ParseError(i + 1, "empty sentence id");
    rows.emplace_back(i + 1, std::move(fields));
  }
  return rows;
}

// id_order first, then any remaining ids of the map in key order.
template <typename Map>
std::vector<std::string> ordered_ids(const Map& m, std::span<const std::string> id_order) {
  std::vector<std::string> out;
  std::set<std::string_view> seen;
  for (const std::string& id : id_order) {
    if (m.contains(id) && seen.insert(id).second) out.push_back(id);
  }
  for (const auto& [id, _] : m) {
    if (!seen.contains(id)) out.push_back(id);
  }
  return out;
}

}  // namespace

std::string_view variant_name(PromptVariant variant) {
  switch (variant) {
    case PromptVariant::kRefined: return "refined";
    case PromptVariant::kCompressed: return "compressed";
    case PromptVariant::kExpanded: return "expanded";
    case PromptVariant::kNoInstruction: return "no-instruction";
  }
  return "";
}

std::optional<PromptVariant> parse_variant(std::string_view name) {
  const std::string n = text::fold(name);
  if (n == "refined" || n == "p1") return PromptVariant::kRefined;
  if (n == "compressed" || n == "p2") return PromptVariant::kCompressed;
  if (n == "expanded" || n == "p3") return PromptVariant::kExpanded;
  if (n == "no-instruction" || n == "no_instruction" || n == "none") {
    return PromptVariant::kNoInstruction;
  }
  return std::nullopt;
}

std::string_view prompt_template(PromptVariant variant) {
  switch (variant) {
    case PromptVariant::kRefined: return assets::prompt_refined();
    case PromptVariant::kCompressed: return assets::prompt_compressed();
    case PromptVariant::kExpanded: return assets::prompt_expanded();
    case PromptVariant::kNoInstruction: return assets::prompt_no_instruction();
  }
  return {};
}

std::string render_prompt(PromptVariant variant, const Sentence& sentence) {
  std::string out(prompt_template(variant));
  const std::size_t at = out.find(kSentenceSlot);
  out.replace(at, kSentenceSlot.size(), sentence.text);
  return out;
}

ClassLabel parse_yes_no(std::string_view response) {
  std::string_view tail = response;
  if (const std::size_t at = response.rfind(kResponseMarker); at != std::string_view::npos) {
    tail = response.substr(at + kResponseMarker.size());
  }
  const std::string lower = text::fold(tail);
  for (std::size_t i = 0; i < lower.size();) {
    if (!std::isalnum(static_cast<unsigned char>(lower[i]))) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < lower.size() && std::isalnum(static_cast<unsigned char>(lower[j]))) ++j;
    const std::string_view word(lower.data() + i, j - i);
    if (word == "yes") return ClassLabel::kYes;
    if (word == "no") return ClassLabel::kNo;
    i = j;
  }
  throw UnparseableResponse("no Yes/No answer in response", std::string(response));
}

std::vector<PredictionRun> predict_dataset(const DatasetPartition& partition,
                                           PromptVariant variant, ChatClient& client, int k,
                                           const PredictOptions& options) {
  if (k < 1) throw UsageError("number of runs must be >= 1");
  std::vector<PredictionRun> runs;
  runs.reserve(static_cast<std::size_t>(k));
  const std::size_t n = partition.size();
  for (int run = 1; run <= k; ++run) {
    std::vector<std::optional<ClassLabel>> labels(n);
    std::vector<std::string> raw(n);
    bounded_for(n, options.in_flight, [&](std::size_t i) {
      ChatRequest request;
      request.model = options.model;
      request.content = render_prompt(variant, partition.sentences[i]);
      request.temperature = options.temperature;
      request.max_tokens = options.max_tokens;
      raw[i] = client.complete(request);
      try {
        labels[i] = parse_yes_no(raw[i]);
      } catch (const UnparseableResponse&) {
      }
    });
    PredictionRun out;
    out.run_index = run;
    for (std::size_t i = 0; i < n; ++i) {
      const std::string& id = partition.sentences[i].id;
      if (labels[i]) {
        out.predictions.emplace(id, *labels[i]);
      } else {
        out.failures.emplace(id, std::move(raw[i]));
      }
    }
    runs.push_back(std::move(out));
  }
  return runs;
}

std::map<std::string, ClassLabel> majority_vote(std::span<const PredictionRun> runs) {
  if (runs.empty()) throw UsageError("majority vote needs at least one run");
  std::map<std::string, std::pair<int, int>> tally;  // yes, no
  for (const PredictionRun& run : runs) {
    for (const auto& [id, label] : run.predictions) {
      auto& t = tally[id];
      (label == ClassLabel::kYes ? t.first : t.second)++;
    }
    for (const auto& [id, _] : run.failures) tally.try_emplace(id, 0, 0);
  }
  std::map<std::string, ClassLabel> votes;
  std::vector<std::string> ties;
  for (const auto& [id, t] : tally) {
    if (t.first == t.second) {
      ties.push_back(id);
    } else {
      votes.emplace(id, t.first > t.second ? ClassLabel::kYes : ClassLabel::kNo);
    }
  }
  if (!ties.empty()) throw IdListError("majority vote is tied", std::move(ties));
  return votes;
}

std::string write_predictions(std::span<const PredictionRun> runs,
                              std::span<const std::string> id_order) {
  std::string out = "sentence_id\trun_index\tlabel\n";
  for (const PredictionRun& run : runs) {
    for (const std::string& id : ordered_ids(run.predictions, id_order)) {
      out += id + '\t' + std::to_string(run.run_index) + '\t' +
             std::string(corpus::to_string(run.predictions.at(id))) + '\n';
    }
  }
  return out;
}

std::string write_failures(std::span<const PredictionRun> runs,
                           std::span<const std::string> id_order) {
  std::string out = "sentence_id\trun_index\traw\n";
  for (const PredictionRun& run : runs) {
    for (const std::string& id : ordered_ids(run.failures, id_order)) {
      out += id + '\t' + std::to_string(run.run_index) + '\t' +
             escape_raw(run.failures.at(id)) + '\n';
    }
  }
  return out;
}

std::string write_votes(const std::map<std::string, ClassLabel>& votes,
                        std::span<const std::string> id_order) {
  std::string out = "sentence_id\tlabel\n";
  for (const std::string& id : ordered_ids(votes, id_order)) {
    out += id + '\t' + std::string(corpus::to_string(votes.at(id))) + '\n';
  }
  return out;
}

std::vector<PredictionRun> parse_predictions(std::string_view predictions,
                                             std::string_view failures) {
  std::map<int, PredictionRun> by_index;
  for (const auto& [line, f] : tsv_rows(predictions, "sentence_id\trun_index\tlabel")) {
    const int index = parse_run_index(f[1], line);
    const auto label = corpus::parse_label(f[2]);
    if (!label) throw ParseError(line, "label must be Yes or No");
    PredictionRun& run = by_index[index];
    run.run_index = index;
    if (!run.predictions.emplace(std::string(f[0]), *label).second) {
      throw ParseError(line, "duplicate prediction for '" + std::string(f[0]) + "'");
    }
  }
  if (!failures.empty()) {
    for (const auto& [line, f] : tsv_rows(failures, "sentence_id\trun_index\traw")) {
      const int index = parse_run_index(f[1], line);
      PredictionRun& run = by_index[index];
      run.run_index = index;
      const std::string id(f[0]);
      if (run.predictions.contains(id) ||
          !run.failures.emplace(id, unescape_raw(f[2], line)).second) {
        throw ParseError(line, "duplicate entry for '" + id + "' in run " +
                                   std::to_string(index));
      }
    }
  }
  if (by_index.empty()) throw DataError("predictions file has no rows");
  std::vector<PredictionRun> runs;
  int expected = 1;
  for (auto& [index, run] : by_index) {
    if (index != expected) {
      throw DataError("run indices must cover 1.." + std::to_string(by_index.rbegin()->first) +
                      "; run " + std::to_string(expected) + " is missing");
    }
    ++expected;
    runs.push_back(std::move(run));
  }
  return runs;
}

FinetuneConfig finetune_config_for(std::string_view model_name) {
  FinetuneConfig config;
  config.model_name = std::string(model_name);
  if (text::fold(model_name).find("mixtral") != std::string::npos) {
    config.train_batch_size = 1;
    config.gradient_accumulation_steps = 4;
  }
  return config;
}

nlohmann::json to_json(const FinetuneConfig& c) {
  return {
      {"model_name", c.model_name},
      {"epochs", c.epochs},
      {"train_batch_size", c.train_batch_size},
      {"gradient_accumulation_steps", c.gradient_accumulation_steps},
      {"optimizer", c.optimizer},
      {"learning_rate", c.learning_rate},
      {"weight_decay", c.weight_decay},
      {"max_grad_norm", c.max_grad_norm},
      {"warmup_ratio", c.warmup_ratio},
      {"temperature", c.temperature},
      {"lora_alpha", c.lora_alpha},
      {"lora_dropout", c.lora_dropout},
      {"lora_rank", c.lora_rank},
  };
}

std::string emit_finetune_config(std::string_view model_name) {
  if (text::trim(model_name).empty()) throw UsageError("model name must not be empty");
  return to_json(finetune_config_for(model_name)).dump(2) + "\n";
}

}  // namespace cwp::llm
