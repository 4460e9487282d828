#ifndef CWP_CORPUS_H_
#define CWP_CORPUS_H_

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "json.hpp"

namespace cwp::corpus {

// Binary check-worthiness label; Yes is the positive class everywhere.
enum class ClassLabel { kYes, kNo };

std::string_view to_string(ClassLabel label);
// Exact "Yes"/"No" unless case_insensitive is set.
std::optional<ClassLabel> parse_label(std::string_view s,
                                      bool case_insensitive = false);

struct Sentence {
  std::string id;
  std::string text;
  std::optional<ClassLabel> label;

  bool operator==(const Sentence&) const = default;
};

class PartitionName {
 public:
  enum class Kind { kTrain, kDev, kDevTest, kTest, kCustom };

  PartitionName() : kind_(Kind::kCustom) {}
  explicit PartitionName(Kind kind) : kind_(kind) {}
  // "train", "dev", "dev_test" (or "dev-test"), "test"; anything else is custom.
  static PartitionName parse(std::string_view name);

  Kind kind() const { return kind_; }
  std::string str() const;

  bool operator==(const PartitionName&) const = default;

 private:
  Kind kind_;
  std::string custom_;
};

struct DatasetPartition {
  PartitionName name;
  std::vector<Sentence> sentences;
  // Whether the source carried a label column; controls write_tsv output.
  bool has_label_column = true;

  std::size_t size() const { return sentences.size(); }
  bool empty() const { return sentences.empty(); }

  // id -> position. Built on each call; callers cache it when needed.
  std::unordered_map<std::string, std::size_t> index() const;

  bool operator==(const DatasetPartition&) const = default;
};

// Column names. Defaults follow the CheckThat! release.
struct TsvSchema {
  std::string id_column = "Sentence_id";
  std::string text_column = "Text";
  std::string label_column = "class_label";
  bool case_insensitive_labels = false;
};

// Parses a tab-separated partition. Throws ParseError (with a 1-based line
// number) on malformed rows, duplicate ids, missing columns, bad labels, or
// empty ids/texts. A trailing '\r' on each line is tolerated. An empty
// label cell leaves the label unset.
DatasetPartition parse_tsv(std::string_view bytes, const TsvSchema& schema = {},
                           PartitionName name = {});

// Inverse of parse_tsv for the configured columns. Throws DataError if a
// field holds a tab, CR or LF.
std::string write_tsv(const DatasetPartition& partition,
                      const TsvSchema& schema = {});

using WordSet = std::unordered_set<std::string>;

struct DatasetStats {
  std::size_t n_yes = 0;
  std::size_t n_no = 0;
  std::size_t n_total = 0;
  // Raw whitespace word count -> sentences.
  std::map<std::size_t, std::size_t> length_histogram;
  // Same, with stopwords removed (the unit of the pruning length criterion).
  std::map<std::size_t, std::size_t> content_length_histogram;
  double median_length = 0.0;
  // Sentences with fewer than 10 raw words.
  double short_fraction = 0.0;
};

inline constexpr std::size_t kShortSentenceWords = 10;

DatasetStats compute_stats(const DatasetPartition& partition,
                           const WordSet& stopwords);

nlohmann::json to_json(const DatasetStats& stats);

}  // namespace cwp::corpus

#endif  // CWP_CORPUS_H_
