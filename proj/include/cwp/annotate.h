#ifndef CWP_ANNOTATE_H_
#define CWP_ANNOTATE_H_

#include <cstddef>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cwp/corpus.h"

namespace cwp::annotate {

using corpus::DatasetPartition;
using corpus::Sentence;
using corpus::WordSet;

enum class EntityType { kPerson, kOrganization, kLocation, kMisc };

// PER, ORG, LOC, MISC.
std::string_view entity_code(EntityType type);
std::optional<EntityType> parse_entity_code(std::string_view code);

using EntitySet = std::set<EntityType>;
using VerbSet = std::set<std::string>;

struct AnnotationRecord {
  std::string sentence_id;
  std::vector<std::string> tokens;
  std::size_t content_token_count = 0;
  EntitySet entity_types;
  VerbSet verbs;

  bool operator==(const AnnotationRecord&) const = default;
};

// One word per line, lowercased on load; blank lines and '#' comments skipped.
WordSet parse_word_list(std::string_view bytes);
// The shipped 179-entry English list.
const WordSet& default_stopwords();

// Whitespace split, then leading/trailing punctuation stripped per token.
// Case is preserved; tokens that end up empty are dropped.
std::vector<std::string> tokenize(std::string_view text);

std::size_t content_token_count(std::span<const std::string> tokens,
                                const WordSet& stopwords);

// Verb lexicon and gazetteer backing the builtin heuristic.
class Lexicon {
 public:
  Lexicon(std::string_view verbs, std::string_view irregular,
          std::string_view gazetteer);

  static const Lexicon& builtin();

  // Base form of a lowercase word if it is a known verb form, else nullopt.
  // Irregular table first, then the word itself, then suffix rules
  // (-ies/-ied, -ing, -ed, -es, -s) in that order.
  std::optional<std::string> lemmatize(std::string_view word) const;

  // Longest gazetteer phrase starting at tokens[pos]; returns its type and
  // token length.
  std::optional<std::pair<EntityType, std::size_t>> match_entity(
      std::span<const std::string> tokens, std::size_t pos) const;

 private:
  WordSet verbs_;
  std::unordered_map<std::string, std::string> irregular_;
  std::unordered_map<std::string, EntityType> gazetteer_;  // folded, space-joined
  std::size_t max_phrase_tokens_ = 1;
};

// Entities and verbs recorded by an external tagger for one sentence.
struct ExternalAnnotation {
  EntitySet entities;
  VerbSet verbs;
};

using ExternalTable = std::unordered_map<std::string, ExternalAnnotation>;

// Parses the external annotation TSV (header: sentence_id, entities, verbs).
ExternalTable parse_annotation_file(std::string_view bytes);

class AnnotationSource {
 public:
  enum class Kind { kBuiltinHeuristic, kExternalFile };

  static AnnotationSource builtin();
  static AnnotationSource external(ExternalTable table, std::string provenance);
  static AnnotationSource external_file(std::string_view bytes,
                                        std::string provenance);

  Kind kind() const { return kind_; }
  const std::string& provenance() const { return provenance_; }
  // nullptr for the builtin source.
  const ExternalAnnotation* lookup(std::string_view id) const;

 private:
  AnnotationSource(Kind kind, std::string provenance,
                   std::shared_ptr<const ExternalTable> table);

  Kind kind_;
  std::string provenance_;
  std::shared_ptr<const ExternalTable> table_;
};

// Builtin: gazetteer hits (any position, capitalized first token) map to
// their type; other capitalized, non-initial, non-stopword tokens count as
// Misc. External: the recorded set. Throws IdListError for unknown ids.
EntitySet detect_entities(const Sentence& sentence, const AnnotationSource& source);

// Builtin: lexicon lookup after suffix-rule lemmatization. External: the
// recorded lemmas, lowercased.
VerbSet extract_verbs(const Sentence& sentence, const AnnotationSource& source);

// One record per sentence, in partition order.
std::vector<AnnotationRecord> annotate_dataset(const DatasetPartition& partition,
                                               const AnnotationSource& source,
                                               const WordSet& stopwords);

// Writes records in the external annotation format. Entity codes follow
// PER, ORG, LOC, MISC order; verbs are sorted.
std::string write_annotation_file(std::span<const AnnotationRecord> records);

}  // namespace cwp::annotate

#endif  // CWP_ANNOTATE_H_
