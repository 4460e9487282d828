#include "cwp/annotate.h"

#include <algorithm>
#include <exception>

#include "cwp/assets.h"
#include "cwp/error.h"
#include "cwp/text.h"

namespace cwp::annotate {
namespace {

// "Obama's" -> "Obama", "I'm" -> "I".
std::string_view entity_key(std::string_view token) {
  const std::size_t ascii = token.find('\'');
  const std::size_t curly = token.find("\xE2\x80\x99");
  const std::size_t cut = std::min(ascii, curly);
  return cut == std::string_view::npos ? token : token.substr(0, cut);
}

std::string join_folded(std::span<const std::string> tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += text::fold(tokens[i]);
  }
  return out;
}

bool has_letter(std::string_view token) {
  return std::any_of(token.begin(), token.end(), [](char c) {
    const auto u = static_cast<unsigned char>(c);
    return (u >= 'a' && u <= 'z') || (u >= 'A' && u <= 'Z') || u >= 0x80;
  });
}

const ExternalAnnotation& require(const AnnotationSource& source, std::string_view id) {
  const ExternalAnnotation* found = source.lookup(id);
  if (!found) {
    throw IdListError("sentence missing from external annotations (" +
                          source.provenance() + ")",
                      {std::string(id)});
  }
  return *found;
}

}  // namespace

std::string_view entity_code(EntityType type) {
  switch (type) {
    case EntityType::kPerson: return "PER";
    case EntityType::kOrganization: return "ORG";
    case EntityType::kLocation: return "LOC";
    case EntityType::kMisc: return "MISC";
  }
  return "MISC";
}

std::optional<EntityType> parse_entity_code(std::string_view code) {
  if (code == "PER") return EntityType::kPerson;
  if (code == "ORG") return EntityType::kOrganization;
  if (code == "LOC") return EntityType::kLocation;
  if (code == "MISC") return EntityType::kMisc;
  return std::nullopt;
}

WordSet parse_word_list(std::string_view bytes) {
  WordSet out;
  for (std::string_view line : text::lines(bytes)) {
    line = text::trim(line);
    if (line.empty() || line.front() == '#') continue;
    out.insert(text::fold(line));
  }
  return out;
}

const WordSet& default_stopwords() {
  static const WordSet kStopwords = parse_word_list(assets::stopwords_en());
  return kStopwords;
}

std::vector<std::string> tokenize(std::string_view text) {
  return text::tokenize_words(text);
}

std::size_t content_token_count(std::span<const std::string> tokens,
                                const WordSet& stopwords) {
  return static_cast<std::size_t>(
      std::count_if(tokens.begin(), tokens.end(), [&](const std::string& t) {
        return !stopwords.contains(text::fold(t));
      }));
}

Lexicon::Lexicon(std::string_view verbs, std::string_view irregular,
                 std::string_view gazetteer)
    : verbs_(parse_word_list(verbs)) {
  for (std::string_view line : text::lines(irregular)) {
    if (line.empty() || line.front() == '#') continue;
    const auto f = text::split(line, '\t');
    if (f.size() != 2) throw DataError("bad irregular verb row: " + std::string(line));
    irregular_.emplace(text::fold(f[0]), text::fold(f[1]));
  }
  for (std::string_view line : text::lines(gazetteer)) {
    if (line.empty() || line.front() == '#') continue;
    const auto f = text::split(line, '\t');
    const auto type = f.size() == 2 ? parse_entity_code(f[1]) : std::nullopt;
    if (!type) throw DataError("bad gazetteer row: " + std::string(line));
    const std::vector<std::string> words = text::tokenize_words(f[0]);
    if (words.empty()) continue;
    max_phrase_tokens_ = std::max(max_phrase_tokens_, words.size());
    gazetteer_.emplace(join_folded(words), *type);
  }
}

const Lexicon& Lexicon::builtin() {
  static const Lexicon kLexicon(assets::verbs_en(), assets::verbs_irregular(),
                                assets::gazetteer());
  return kLexicon;
}

std::optional<std::string> Lexicon::lemmatize(std::string_view word) const {
  if (word.empty()) return std::nullopt;
  const std::string w(word);
  if (auto it = irregular_.find(w); it != irregular_.end()) return it->second;
  if (verbs_.contains(w)) return w;

  auto ends_with = [&](std::string_view suffix) {
    return w.size() > suffix.size() + 1 && w.ends_with(suffix);
  };
  auto undouble = [](const std::string& stem) -> std::optional<std::string> {
    const std::size_t n = stem.size();
    if (n >= 3 && stem[n - 1] == stem[n - 2] &&
        std::string_view("aeiou").find(stem[n - 1]) == std::string_view::npos) {
      return stem.substr(0, n - 1);
    }
    return std::nullopt;
  };

  std::vector<std::string> candidates;
  if (ends_with("ies") || ends_with("ied")) {
    candidates.push_back(w.substr(0, w.size() - 3) + "y");
  }
  if (ends_with("ing")) {
    const std::string stem = w.substr(0, w.size() - 3);
    candidates.push_back(stem);
    candidates.push_back(stem + "e");
    if (auto u = undouble(stem)) candidates.push_back(*u);
  }
  if (ends_with("ed")) {
    const std::string stem = w.substr(0, w.size() - 2);
    candidates.push_back(stem);
    candidates.push_back(stem + "e");
    if (auto u = undouble(stem)) candidates.push_back(*u);
  }
  if (ends_with("es")) candidates.push_back(w.substr(0, w.size() - 2));
  if (ends_with("s") && !w.ends_with("ss")) candidates.push_back(w.substr(0, w.size() - 1));

  for (const std::string& c : candidates) {
    if (verbs_.contains(c)) return c;
  }
  return std::nullopt;
}

std::optional<std::pair<EntityType, std::size_t>> Lexicon::match_entity(
    std::span<const std::string> tokens, std::size_t pos) const {
  if (pos >= tokens.size() || !text::starts_with_upper(tokens[pos])) return std::nullopt;
  const std::size_t longest = std::min(max_phrase_tokens_, tokens.size() - pos);
  for (std::size_t len = longest; len >= 1; --len) {
    std::vector<std::string> words(tokens.begin() + pos, tokens.begin() + pos + len);
    words.back() = std::string(entity_key(words.back()));
    if (auto it = gazetteer_.find(join_folded(words)); it != gazetteer_.end()) {
      return std::make_pair(it->second, len);
    }
  }
  return std::nullopt;
}

ExternalTable parse_annotation_file(std::string_view bytes) {
  std::vector<std::string_view> rows = text::lines(bytes);
  if (rows.empty()) throw ParseError(1, "missing header line");
  const auto header = text::split(rows[0], '\t');
  if (header.size() != 3 || header[0] != "sentence_id" || header[1] != "entities" ||
      header[2] != "verbs") {
    throw ParseError(1, "expected header sentence_id<TAB>entities<TAB>verbs");
  }
  ExternalTable table;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const std::size_t line = r + 1;
    const auto f = text::split(rows[r], '\t');
    if (f.size() != 3) {
      throw ParseError(line, "expected 3 fields, got " + std::to_string(f.size()));
    }
    if (f[0].empty()) throw ParseError(line, "empty sentence id");
    ExternalAnnotation a;
    if (!f[1].empty()) {
      for (std::string_view code : text::split(f[1], ',')) {
        const auto type = parse_entity_code(text::trim(code));
        if (!type) throw ParseError(line, "unknown entity type '" + std::string(code) + "'");
        a.entities.insert(*type);
      }
    }
    if (!f[2].empty()) {
      for (std::string_view verb : text::split(f[2], ',')) {
        const std::string v = text::fold(text::trim(verb));
        if (v.empty() || text::split_whitespace(v).size() != 1) {
          throw ParseError(line, "invalid verb '" + std::string(verb) + "'");
        }
        a.verbs.insert(v);
      }
    }
    if (!table.emplace(std::string(f[0]), std::move(a)).second) {
      throw ParseError(line, "duplicate id '" + std::string(f[0]) + "'");
    }
  }
  return table;
}

AnnotationSource::AnnotationSource(Kind kind, std::string provenance,
                                   std::shared_ptr<const ExternalTable> table)
    : kind_(kind), provenance_(std::move(provenance)), table_(std::move(table)) {}

AnnotationSource AnnotationSource::builtin() {
  return AnnotationSource(Kind::kBuiltinHeuristic,
                          "builtin heuristic (gazetteer + suffix-rule verb lexicon)",
                          nullptr);
}

AnnotationSource AnnotationSource::external(ExternalTable table, std::string provenance) {
  return AnnotationSource(Kind::kExternalFile, std::move(provenance),
                          std::make_shared<const ExternalTable>(std::move(table)));
}

AnnotationSource AnnotationSource::external_file(std::string_view bytes,
                                                 std::string provenance) {
  return external(parse_annotation_file(bytes), std::move(provenance));
}

const ExternalAnnotation* AnnotationSource::lookup(std::string_view id) const {
  if (!table_) return nullptr;
  const auto it = table_->find(std::string(id));
  return it == table_->end() ? nullptr : &it->second;
}

EntitySet detect_entities(const Sentence& sentence, const AnnotationSource& source) {
  if (source.kind() == AnnotationSource::Kind::kExternalFile) {
    return require(source, sentence.id).entities;
  }
  const Lexicon& lexicon = Lexicon::builtin();
  const WordSet& stopwords = default_stopwords();
  const std::vector<std::string> tokens = tokenize(sentence.text);
  EntitySet out;
  for (std::size_t i = 0; i < tokens.size();) {
    if (auto hit = lexicon.match_entity(tokens, i)) {
      out.insert(hit->first);
      i += hit->second;
      continue;
    }
    const std::string_view key = entity_key(tokens[i]);
    if (i > 0 && text::starts_with_upper(key) && has_letter(key) &&
        !stopwords.contains(text::fold(key))) {
      out.insert(EntityType::kMisc);
    }
    ++i;
  }
  return out;
}

VerbSet extract_verbs(const Sentence& sentence, const AnnotationSource& source) {
  if (source.kind() == AnnotationSource::Kind::kExternalFile) {
    return require(source, sentence.id).verbs;
  }
  const Lexicon& lexicon = Lexicon::builtin();
  VerbSet out;
  for (const std::string& token : tokenize(sentence.text)) {
    if (auto lemma = lexicon.lemmatize(text::fold(token))) out.insert(std::move(*lemma));
  }
  return out;
}

std::vector<AnnotationRecord> annotate_dataset(const DatasetPartition& partition,
                                               const AnnotationSource& source,
                                               const WordSet& stopwords) {
  const std::size_t n = partition.size();
  std::vector<AnnotationRecord> records(n);
  std::vector<std::exception_ptr> errors(n);
  // Warm the shared tables before the parallel region.
  if (source.kind() == AnnotationSource::Kind::kBuiltinHeuristic) {
    Lexicon::builtin();
    default_stopwords();
  }
#pragma omp parallel for schedule(dynamic, 64)
  for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    const Sentence& s = partition.sentences[i];
    try {
      AnnotationRecord& r = records[i];
      r.sentence_id = s.id;
      r.tokens = tokenize(s.text);
      r.content_token_count = content_token_count(r.tokens, stopwords);
      r.entity_types = detect_entities(s, source);
      r.verbs = extract_verbs(s, source);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  // Report missing external ids together; otherwise the first failure.
  std::vector<std::string> missing;
  for (std::size_t i = 0; i < n; ++i) {
    if (!errors[i]) continue;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const IdListError& e) {
      missing.insert(missing.end(), e.ids().begin(), e.ids().end());
    }
  }
  if (!missing.empty()) {
    throw IdListError("sentences missing from external annotations (" +
                          source.provenance() + ")",
                      std::move(missing));
  }
  return records;
}

std::string write_annotation_file(std::span<const AnnotationRecord> records) {
  std::string out = "sentence_id\tentities\tverbs\n";
  for (const AnnotationRecord& r : records) {
    out += r.sentence_id;
    out += '\t';
    bool first = true;
    for (EntityType t : r.entity_types) {
      if (!first) out += ',';
      out += entity_code(t);
      first = false;
    }
    out += '\t';
    first = true;
    for (const std::string& v : r.verbs) {
      if (!first) out += ',';
      out += v;
      first = false;
    }
    out += '\n';
  }
  return out;
}

}  // namespace cwp::annotate
