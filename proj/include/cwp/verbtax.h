#ifndef CWP_VERBTAX_H_
#define CWP_VERBTAX_H_

#include <array>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>

#include "cwp/annotate.h"
#include "cwp/chat.h"

namespace cwp::verbtax {

// Ordinals 1..10 follow the order of the verb classification prompt.
enum class VerbCategory {
  kPhysicalAction = 1,
  kMentalAction,
  kChangeOfState,
  kCreationOrDestruction,
  kCommunication,
  kMovement,
  kEmotion,
  kPerception,
  kLinking,
  kNone,
};

inline constexpr std::array<VerbCategory, 10> kAllCategories = {
    VerbCategory::kPhysicalAction, VerbCategory::kMentalAction,
    VerbCategory::kChangeOfState,  VerbCategory::kCreationOrDestruction,
    VerbCategory::kCommunication,  VerbCategory::kMovement,
    VerbCategory::kEmotion,        VerbCategory::kPerception,
    VerbCategory::kLinking,        VerbCategory::kNone,
};

int ordinal(VerbCategory category);
std::optional<VerbCategory> from_ordinal(int ordinal);
// Label used in the prompt, e.g. "Creation or Destruction".
std::string_view display_name(VerbCategory category);

// Physical Action, Change of State, Creation or Destruction, Communication,
// Movement.
const std::set<VerbCategory>& informative_categories();
bool is_informative(VerbCategory category);

enum class ClassificationSource { kLlm, kCache, kManualOverride };

struct VerbClassification {
  std::string verb;
  VerbCategory category = VerbCategory::kNone;
  ClassificationSource source = ClassificationSource::kCache;

  bool operator==(const VerbClassification&) const = default;
};

class VerbCatalog {
 public:
  std::optional<VerbCategory> category(std::string_view verb) const;
  bool contains(std::string_view verb) const;

  // Manual overrides are never replaced by non-override entries.
  void set(VerbClassification entry);

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const std::map<std::string, VerbClassification, std::less<>>& entries() const {
    return entries_;
  }

  bool operator==(const VerbCatalog&) const = default;

 private:
  std::map<std::string, VerbClassification, std::less<>> entries_;
};

// TSV verb<TAB>ordinal, no header. Entries take the given source.
VerbCatalog parse_catalog(std::string_view bytes,
                          ClassificationSource source = ClassificationSource::kCache);
// Sorted by verb.
std::string write_catalog(const VerbCatalog& catalog);
// Applies an override file on top of catalog.
void apply_overrides(VerbCatalog& catalog, std::string_view override_bytes);

std::string render_verb_prompt(std::string_view verb);

// Earliest match wins: a standalone ordinal 1-10 or a case-insensitive
// category name (a few spelling variants are accepted). Throws
// UnparseableResponse if nothing matches.
VerbCategory parse_verb_response(std::string_view text);

struct ClassifyOptions {
  std::string model;
  int max_tokens = 16;  // requests always use temperature 0
  std::size_t in_flight = 4;
  std::size_t batch_size = 64;
  // Called with the full catalog after each batch.
  std::function<void(const VerbCatalog&)> persist;
};

struct ClassifyStats {
  std::size_t requested = 0;  // verbs sent to the endpoint
  std::size_t cached = 0;
  std::size_t failed = 0;  // recorded as None after exhausting retries
};

// Cache-first classification: verbs already in the catalog are not queried.
VerbCatalog classify_verbs(const std::set<std::string>& verbs,
                           llm::ChatClient& client, VerbCatalog catalog,
                           const ClassifyOptions& options = {},
                           ClassifyStats* stats = nullptr);

struct CategoryDistribution {
  std::map<VerbCategory, std::size_t> counts;  // all ten categories present
  std::size_t missing = 0;  // incidences absent from the catalog (counted as None)
};

// Per sentence-verb incidence.
CategoryDistribution category_distribution(
    const VerbCatalog& catalog,
    std::span<const annotate::AnnotationRecord> annotations);

// category_ordinal,category,count,informative
std::string distribution_csv(const CategoryDistribution& distribution);

}  // namespace cwp::verbtax

#endif  // CWP_VERBTAX_H_
