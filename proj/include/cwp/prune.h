#ifndef CWP_PRUNE_H_
#define CWP_PRUNE_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "cwp/annotate.h"
#include "cwp/corpus.h"
#include "cwp/embed.h"
#include "cwp/nn_kernels.h"
#include "cwp/verbtax.h"
#include "json.hpp"

namespace cwp::prune {

using annotate::AnnotationRecord;
using corpus::ClassLabel;
using corpus::DatasetPartition;
using corpus::Sentence;
using embed::EmbeddingMatrix;
using verbtax::VerbCatalog;

// The four OR-criteria of the informative-sentence filter.
enum class Criterion : unsigned {
  kLabelYes = 1u << 0,
  kHasEntity = 1u << 1,
  kHasInformativeVerb = 1u << 2,
  kLength = 1u << 3,
};

inline constexpr Criterion kAllCriteria[] = {
    Criterion::kLabelYes, Criterion::kHasEntity, Criterion::kHasInformativeVerb,
    Criterion::kLength};

std::string_view criterion_name(Criterion c);  // label_yes, has_entity, ...

class CriteriaSet {
 public:
  constexpr CriteriaSet() = default;
  static constexpr CriteriaSet all() { return CriteriaSet(0xFu); }

  constexpr bool has(Criterion c) const { return bits_ & static_cast<unsigned>(c); }
  constexpr void add(Criterion c) { bits_ |= static_cast<unsigned>(c); }
  constexpr void remove(Criterion c) { bits_ &= ~static_cast<unsigned>(c); }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr CriteriaSet operator&(CriteriaSet o) const { return CriteriaSet(bits_ & o.bits_); }
  constexpr bool operator==(const CriteriaSet&) const = default;

  // Comma-separated names in criterion order; "" when empty.
  std::string str() const;

 private:
  constexpr explicit CriteriaSet(unsigned bits) : bits_(bits) {}
  unsigned bits_ = 0;
};

enum class PruneMode { kStep1Only, kStep2Only, kBoth };
std::string_view mode_name(PruneMode mode);

inline constexpr std::size_t kDefaultMinLength = 8;
inline constexpr std::size_t kDefaultCnnMaxPasses = 100;

struct PruneConfig {
  std::size_t min_length = kDefaultMinLength;  // content tokens
  CriteriaSet criteria_enabled = CriteriaSet::all();
  std::uint64_t cnn_seed = 0;
  std::size_t cnn_max_passes = kDefaultCnnMaxPasses;
  PruneMode mode = PruneMode::kBoth;
  // Lets the majority class be Yes; by default that is an error.
  std::optional<ClassLabel> minority_override;
  nn::Backend backend = nn::Backend::kParallel;
};

// Throws UsageError when min_length or cnn_max_passes is zero.
void validate(const PruneConfig& config);

struct CriterionVerdict {
  std::string sentence_id;
  bool kept = false;
  CriteriaSet fired;  // criteria that hold, enabled or not

  bool operator==(const CriterionVerdict&) const = default;
};

// Verbs absent from the catalog count as None and bump *missing_verbs.
CriterionVerdict is_informative(const Sentence& sentence,
                                const AnnotationRecord& annotation,
                                const VerbCatalog& catalog,
                                const PruneConfig& config,
                                std::size_t* missing_verbs = nullptr);

struct Step1Result {
  DatasetPartition kept;
  std::vector<CriterionVerdict> verdicts;  // partition order
  std::size_t missing_verb_lookups = 0;
};

// Throws IdListError naming sentences without an annotation.
Step1Result step1_filter(const DatasetPartition& partition,
                         std::span<const AnnotationRecord> annotations,
                         const VerbCatalog& catalog, const PruneConfig& config);

struct CnnOptions {
  std::uint64_t seed = 0;
  std::size_t max_passes = kDefaultCnnMaxPasses;
  std::optional<ClassLabel> minority_override;
  nn::Backend backend = nn::Backend::kParallel;
};

struct CnnResult {
  std::vector<std::size_t> retained_rows;  // ascending
  std::size_t passes = 0;
  bool converged = false;
  ClassLabel minority = ClassLabel::kYes;

  std::set<std::string> retained_ids(const EmbeddingMatrix& matrix) const;
};

// The majority-class visiting order: majority rows (ascending) after a
// seeded shuffle. Element 0 seeds the store.
std::vector<std::size_t> cnn_majority_order(std::span<const std::size_t> majority_rows,
                                            std::uint64_t seed);

// Hart's condensed nearest neighbour, iterated to a fixpoint (or max_passes).
// The store starts as every minority row plus the first majority row of the
// seeded order; each pass visits the remaining majority rows in that order
// and moves any row whose 1-NN in the store is a minority row into the store.
CnnResult cnn_undersample(const EmbeddingMatrix& matrix,
                          const std::unordered_map<std::string, ClassLabel>& labels,
                          const CnnOptions& options = {});

struct PruneReport {
  PruneMode mode = PruneMode::kBoth;
  std::size_t min_length = kDefaultMinLength;
  std::uint64_t seed = 0;
  std::size_t input_size = 0;
  std::size_t after_step1 = 0;
  std::size_t after_step2 = 0;
  double retained_fraction = 0.0;
  double positive_fraction_after = 0.0;
  std::size_t fires_label_yes = 0;
  std::size_t fires_has_entity = 0;
  std::size_t fires_has_informative_verb = 0;
  std::size_t fires_length = 0;
  std::size_t cnn_passes_run = 0;
  bool cnn_converged = true;
  std::size_t missing_verb_lookups = 0;
};

nlohmann::json to_json(const PruneReport& report);

struct PruneOutput {
  DatasetPartition pruned;
  PruneReport report;
  std::vector<CriterionVerdict> verdicts;  // empty in step-2-only mode
  std::set<std::string> step1_ids;         // survivors of step 1
};

// Step 1 then CNN over the survivors, per config.mode. The matrix may cover
// more ids than needed; it is required unless mode is kStep1Only.
PruneOutput two_step_prune(const DatasetPartition& partition,
                           std::span<const AnnotationRecord> annotations,
                           const VerbCatalog& catalog,
                           const EmbeddingMatrix* matrix,
                           const PruneConfig& config);

// lengths must be nonempty and strictly ascending.
std::vector<std::pair<std::size_t, PruneReport>> sweep_min_length(
    const DatasetPartition& partition,
    std::span<const AnnotationRecord> annotations, const VerbCatalog& catalog,
    const EmbeddingMatrix* matrix, std::span<const std::size_t> lengths,
    const PruneConfig& base);

// min_length,after_step1,after_step2,positive_fraction
std::string sweep_csv(std::span<const std::pair<std::size_t, PruneReport>> rows);

// sentence_id,kept,fired (TSV with header).
std::string verdicts_tsv(std::span<const CriterionVerdict> verdicts);

}  // namespace cwp::prune

#endif  // CWP_PRUNE_H_
