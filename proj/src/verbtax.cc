#include "cwp/verbtax.h"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <vector>

#include "cwp/assets.h"
#include "cwp/error.h"
#include "cwp/text.h"
#include "cwp/workers.h"

namespace cwp::verbtax {
namespace {

constexpr std::string_view kVerbSlot = "<verb>";

struct Alias {
  std::string_view text;  // lowercase
  VerbCategory category;
};

// Prompt labels first, then the taxonomy's own wording and common variants.
constexpr Alias kAliases[] = {
    {"physical action", VerbCategory::kPhysicalAction},
    {"mental action", VerbCategory::kMentalAction},
    {"change in state", VerbCategory::kChangeOfState},
    {"changes in state", VerbCategory::kChangeOfState},
    {"change of state", VerbCategory::kChangeOfState},
    {"changes of state", VerbCategory::kChangeOfState},
    {"state change", VerbCategory::kChangeOfState},
    {"creation or destruction", VerbCategory::kCreationOrDestruction},
    {"creation", VerbCategory::kCreationOrDestruction},
    {"destruction", VerbCategory::kCreationOrDestruction},
    {"communication", VerbCategory::kCommunication},
    {"movement", VerbCategory::kMovement},
    {"emotion", VerbCategory::kEmotion},
    {"perception", VerbCategory::kPerception},
    {"linking", VerbCategory::kLinking},
    {"none", VerbCategory::kNone},
};

bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

}  // namespace

int ordinal(VerbCategory category) { return static_cast<int>(category); }

std::optional<VerbCategory> from_ordinal(int value) {
  if (value < 1 || value > 10) return std::nullopt;
  return static_cast<VerbCategory>(value);
}

std::string_view display_name(VerbCategory category) {
  switch (category) {
    case VerbCategory::kPhysicalAction: return "Physical Action";
    case VerbCategory::kMentalAction: return "Mental Action";
    case VerbCategory::kChangeOfState: return "Change in State";
    case VerbCategory::kCreationOrDestruction: return "Creation or Destruction";
    case VerbCategory::kCommunication: return "Communication";
    case VerbCategory::kMovement: return "Movement";
    case VerbCategory::kEmotion: return "Emotion";
    case VerbCategory::kPerception: return "Perception";
    case VerbCategory::kLinking: return "Linking Verb";
    case VerbCategory::kNone: return "None";
  }
  return "None";
}

const std::set<VerbCategory>& informative_categories() {
  static const std::set<VerbCategory> kInformative = {
      VerbCategory::kPhysicalAction, VerbCategory::kChangeOfState,
      VerbCategory::kCreationOrDestruction, VerbCategory::kCommunication,
      VerbCategory::kMovement};
  return kInformative;
}

bool is_informative(VerbCategory category) {
  return informative_categories().contains(category);
}

std::optional<VerbCategory> VerbCatalog::category(std::string_view verb) const {
  const auto it = entries_.find(verb);
  if (it == entries_.end()) return std::nullopt;
  return it->second.category;
}

bool VerbCatalog::contains(std::string_view verb) const {
  return entries_.find(verb) != entries_.end();
}

void VerbCatalog::set(VerbClassification entry) {
  if (entry.verb.empty()) throw DataError("verb catalog entry with empty verb");
  const auto it = entries_.find(entry.verb);
  if (it != entries_.end()) {
    if (it->second.source == ClassificationSource::kManualOverride &&
        entry.source != ClassificationSource::kManualOverride) {
      return;
    }
    it->second = std::move(entry);
    return;
  }
  std::string key = entry.verb;
  entries_.emplace(std::move(key), std::move(entry));
}

VerbCatalog parse_catalog(std::string_view bytes, ClassificationSource source) {
  VerbCatalog catalog;
  const auto rows = text::lines(bytes);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].empty()) continue;
    const auto f = text::split(rows[r], '\t');
    if (f.size() != 2) throw ParseError(r + 1, "expected verb<TAB>category_ordinal");
    const std::string verb = text::fold(text::trim(f[0]));
    if (verb.empty() || text::split_whitespace(verb).size() != 1) {
      throw ParseError(r + 1, "invalid verb '" + std::string(f[0]) + "'");
    }
    int value = 0;
    const std::string digits(text::trim(f[1]));
    if (digits.empty() || !std::all_of(digits.begin(), digits.end(), ::isdigit) ||
        digits.size() > 2) {
      throw ParseError(r + 1, "invalid category ordinal '" + digits + "'");
    }
    value = std::stoi(digits);
    const auto category = from_ordinal(value);
    if (!category) throw ParseError(r + 1, "category ordinal out of range: " + digits);
    if (catalog.contains(verb)) throw ParseError(r + 1, "duplicate verb '" + verb + "'");
    catalog.set({verb, *category, source});
  }
  return catalog;
}

std::string write_catalog(const VerbCatalog& catalog) {
  std::string out;
  for (const auto& [verb, entry] : catalog.entries()) {
    out += verb;
    out += '\t';
    out += std::to_string(ordinal(entry.category));
    out += '\n';
  }
  return out;
}

void apply_overrides(VerbCatalog& catalog, std::string_view override_bytes) {
  const VerbCatalog overrides =
      parse_catalog(override_bytes, ClassificationSource::kManualOverride);
  for (const auto& [verb, entry] : overrides.entries()) catalog.set(entry);
}

std::string render_verb_prompt(std::string_view verb) {
  if (verb.empty()) throw DataError("cannot render a verb prompt for an empty verb");
  std::string out(assets::prompt_verb_classification());
  const std::size_t at = out.find(kVerbSlot);
  out.replace(at, kVerbSlot.size(), verb);
  return out;
}

VerbCategory parse_verb_response(std::string_view response) {
  const std::string lower = text::fold(response);
  std::size_t best_pos = std::string::npos;
  std::optional<VerbCategory> best;

  for (std::size_t i = 0; i < lower.size();) {
    if (!std::isdigit(static_cast<unsigned char>(lower[i]))) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < lower.size() && std::isdigit(static_cast<unsigned char>(lower[j]))) ++j;
    const bool standalone = (i == 0 || !is_alnum(lower[i - 1])) &&
                            (j == lower.size() || !is_alnum(lower[j]));
    if (standalone && j - i <= 2) {
      if (auto c = from_ordinal(std::stoi(lower.substr(i, j - i)))) {
        best_pos = i;
        best = c;
        break;
      }
    }
    i = j;
  }

  for (const Alias& alias : kAliases) {
    std::size_t from = 0;
    while (true) {
      const std::size_t at = lower.find(alias.text, from);
      if (at == std::string::npos || at >= best_pos) break;
      if (at == 0 || !is_alnum(lower[at - 1])) {
        best_pos = at;
        best = alias.category;
        break;
      }
      from = at + 1;
    }
  }

  if (!best) {
    throw UnparseableResponse("no verb category in response", std::string(response));
  }
  return *best;
}

VerbCatalog classify_verbs(const std::set<std::string>& verbs, llm::ChatClient& client,
                           VerbCatalog catalog, const ClassifyOptions& options,
                           ClassifyStats* stats) {
  ClassifyStats local;
  std::vector<std::string> pending;
  for (const std::string& verb : verbs) {
    if (catalog.contains(verb)) {
      ++local.cached;
    } else {
      pending.push_back(verb);
    }
  }
  const std::size_t batch = std::max<std::size_t>(options.batch_size, 1);
  for (std::size_t start = 0; start < pending.size(); start += batch) {
    const std::size_t end = std::min(pending.size(), start + batch);
    std::vector<VerbCategory> results(end - start, VerbCategory::kNone);
    std::vector<char> failed(end - start, 0);
    bounded_for(end - start, options.in_flight, [&](std::size_t i) {
      llm::ChatRequest request;
      request.model = options.model;
      request.content = render_verb_prompt(pending[start + i]);
      request.temperature = 0.0;
      request.max_tokens = options.max_tokens;
      try {
        results[i] = parse_verb_response(client.complete(request));
      } catch (const EndpointError&) {
        failed[i] = 1;
      } catch (const UnparseableResponse&) {
        failed[i] = 1;
      }
    });
    for (std::size_t i = 0; i < results.size(); ++i) {
      catalog.set({pending[start + i], results[i], ClassificationSource::kLlm});
      if (failed[i]) {
        ++local.failed;
        std::fprintf(stderr, "warning: could not classify verb '%s'; recorded as None\n",
                     pending[start + i].c_str());
      }
    }
    local.requested += results.size();
    if (options.persist) options.persist(catalog);
  }
  if (stats) *stats = local;
  return catalog;
}

CategoryDistribution category_distribution(
    const VerbCatalog& catalog, std::span<const annotate::AnnotationRecord> annotations) {
  CategoryDistribution out;
  for (VerbCategory c : kAllCategories) out.counts[c] = 0;
  for (const auto& record : annotations) {
    for (const std::string& verb : record.verbs) {
      const auto category = catalog.category(verb);
      if (!category) ++out.missing;
      ++out.counts[category.value_or(VerbCategory::kNone)];
    }
  }
  return out;
}

std::string distribution_csv(const CategoryDistribution& distribution) {
  std::string out = "category_ordinal,category,count,informative\n";
  for (const auto& [category, count] : distribution.counts) {
    out += std::to_string(ordinal(category));
    out += ',';
    out += display_name(category);
    out += ',';
    out += std::to_string(count);
    out += is_informative(category) ? ",1\n" : ",0\n";
  }
  return out;
}

}  // namespace cwp::verbtax
