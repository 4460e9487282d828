#include "cwp/corpus.h"

#include <algorithm>

#include "cwp/error.h"
#include "cwp/text.h"

namespace cwp::corpus {
namespace {

bool equals_ignore_case(std::string_view a, std::string_view b) {
  return a.size() == b.size() && text::fold(a) == text::fold(b);
}

std::string_view strip_cr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

void check_field(std::string_view field, std::string_view what,
                 std::string_view id) {
  if (field.find_first_of("\t\r\n") != std::string_view::npos) {
    throw DataError(std::string(what) + " of sentence '" + std::string(id) +
                    "' contains a tab or line break");
  }
}

}  // namespace

std::string_view to_string(ClassLabel label) {
  return label == ClassLabel::kYes ? "Yes" : "No";
}

std::optional<ClassLabel> parse_label(std::string_view s, bool case_insensitive) {
  if (s == "Yes" || (case_insensitive && equals_ignore_case(s, "yes"))) {
    return ClassLabel::kYes;
  }
  if (s == "No" || (case_insensitive && equals_ignore_case(s, "no"))) {
    return ClassLabel::kNo;
  }
  return std::nullopt;
}

PartitionName PartitionName::parse(std::string_view name) {
  if (name == "train") return PartitionName(Kind::kTrain);
  if (name == "dev") return PartitionName(Kind::kDev);
  if (name == "dev_test" || name == "dev-test") return PartitionName(Kind::kDevTest);
  if (name == "test") return PartitionName(Kind::kTest);
  PartitionName out;
  out.custom_ = std::string(name);
  return out;
}

std::string PartitionName::str() const {
  switch (kind_) {
    case Kind::kTrain: return "train";
    case Kind::kDev: return "dev";
    case Kind::kDevTest: return "dev_test";
    case Kind::kTest: return "test";
    case Kind::kCustom: break;
  }
  return custom_;
}

std::unordered_map<std::string, std::size_t> DatasetPartition::index() const {
  std::unordered_map<std::string, std::size_t> out;
  out.reserve(sentences.size());
  for (std::size_t i = 0; i < sentences.size(); ++i) out.emplace(sentences[i].id, i);
  return out;
}

DatasetPartition parse_tsv(std::string_view bytes, const TsvSchema& schema,
                           PartitionName name) {
  std::vector<std::string_view> rows = text::lines(bytes);
  while (!rows.empty() && strip_cr(rows.back()).empty()) rows.pop_back();
  if (rows.empty()) throw ParseError(1, "missing header line");

  const auto header = text::split(strip_cr(rows[0]), '\t');
  std::optional<std::size_t> id_col, text_col, label_col;
  for (std::size_t c = 0; c < header.size(); ++c) {
    for (std::size_t d = 0; d < c; ++d) {
      if (header[d] == header[c]) {
        throw ParseError(1, "duplicate column '" + std::string(header[c]) + "'");
      }
    }
    if (header[c] == schema.id_column) id_col = c;
    if (header[c] == schema.text_column) text_col = c;
    if (!schema.label_column.empty() && header[c] == schema.label_column) label_col = c;
  }
  if (!id_col) throw ParseError(1, "missing column '" + schema.id_column + "'");
  if (!text_col) throw ParseError(1, "missing column '" + schema.text_column + "'");

  DatasetPartition out;
  out.name = std::move(name);
  out.has_label_column = label_col.has_value();
  out.sentences.reserve(rows.size() - 1);
  std::unordered_map<std::string_view, std::size_t> seen;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const std::size_t line = r + 1;
    const auto fields = text::split(strip_cr(rows[r]), '\t');
    if (fields.size() != header.size()) {
      throw ParseError(line, "expected " + std::to_string(header.size()) +
                                 " fields, got " + std::to_string(fields.size()));
    }
    Sentence s;
    s.id = std::string(fields[*id_col]);
    if (s.id.empty()) throw ParseError(line, "empty sentence id");
    if (auto [it, inserted] = seen.emplace(fields[*id_col], line); !inserted) {
      throw ParseError(line, "duplicate id '" + s.id + "' (first seen on line " +
                                 std::to_string(it->second) + ")");
    }
    s.text = std::string(fields[*text_col]);
    if (text::trim(s.text).empty()) {
      throw ParseError(line, "empty text for id '" + s.id + "'");
    }
    if (label_col && !fields[*label_col].empty()) {
      s.label = parse_label(fields[*label_col], schema.case_insensitive_labels);
      if (!s.label) {
        throw ParseError(line, "invalid label '" + std::string(fields[*label_col]) +
                                   "' (expected Yes or No)");
      }
    }
    out.sentences.push_back(std::move(s));
  }
  return out;
}

std::string write_tsv(const DatasetPartition& partition, const TsvSchema& schema) {
  const bool with_label = partition.has_label_column && !schema.label_column.empty();
  std::string out = schema.id_column + '\t' + schema.text_column;
  if (with_label) out += '\t' + schema.label_column;
  out += '\n';
  for (const Sentence& s : partition.sentences) {
    check_field(s.id, "id", s.id);
    check_field(s.text, "text", s.id);
    out += s.id;
    out += '\t';
    out += s.text;
    if (with_label) {
      out += '\t';
      if (s.label) out += to_string(*s.label);
    }
    out += '\n';
  }
  return out;
}

DatasetStats compute_stats(const DatasetPartition& partition,
                           const WordSet& stopwords) {
  DatasetStats stats;
  stats.n_total = partition.size();
  std::vector<std::size_t> lengths;
  lengths.reserve(partition.size());
  std::size_t short_count = 0;
  for (const Sentence& s : partition.sentences) {
    if (s.label == ClassLabel::kYes) ++stats.n_yes;
    if (s.label == ClassLabel::kNo) ++stats.n_no;

    const std::size_t words = text::split_whitespace(s.text).size();
    lengths.push_back(words);
    ++stats.length_histogram[words];
    if (words < kShortSentenceWords) ++short_count;

    std::size_t content = 0;
    for (const std::string& token : text::tokenize_words(s.text)) {
      if (!stopwords.contains(text::fold(token))) ++content;
    }
    ++stats.content_length_histogram[content];
  }
  if (!lengths.empty()) {
    std::sort(lengths.begin(), lengths.end());
    const std::size_t n = lengths.size();
    stats.median_length = n % 2 ? static_cast<double>(lengths[n / 2])
                                : (lengths[n / 2 - 1] + lengths[n / 2]) / 2.0;
    stats.short_fraction = static_cast<double>(short_count) / static_cast<double>(n);
  }
  return stats;
}

nlohmann::json to_json(const DatasetStats& stats) {
  auto histogram = [](const std::map<std::size_t, std::size_t>& h) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& [length, count] : h) arr.push_back({length, count});
    return arr;
  };
  return {
      {"n_yes", stats.n_yes},
      {"n_no", stats.n_no},
      {"n_total", stats.n_total},
      {"median_length", stats.median_length},
      {"short_fraction", stats.short_fraction},
      {"length_histogram", histogram(stats.length_histogram)},
      {"content_length_histogram", histogram(stats.content_length_histogram)},
  };
}

}  // namespace cwp::corpus
