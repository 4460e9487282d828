#include "cwp/annotate.h"
#include "cwp/corpus.h"
#include "cwp/error.h"
#include "doctest.h"

using namespace cwp;
using annotate::EntityType;

namespace {
corpus::Sentence sent(std::string id, std::string text) {
  return {std::move(id), std::move(text), corpus::ClassLabel::kNo};
}
}  // namespace

TEST_SUITE("annotate") {

TEST_CASE("stopword list is the 179-word English list") {
  const auto& sw = annotate::default_stopwords();
  CHECK(sw.size() == 179);
  for (const char* w : {"i", "me", "the", "over", "don't", "wouldn't", "mightn"}) {
    CHECK_MESSAGE(sw.contains(w), w);
  }
  CHECK_FALSE(sw.contains("think"));
  CHECK_FALSE(sw.contains("tax"));
}

TEST_CASE("tokenize strips surrounding punctuation") {
  const auto t = annotate::tokenize("\"Well, we cut taxes -- by 5%!\" he said.");
  const std::vector<std::string> want{"Well", "we", "cut", "taxes", "by", "5", "he", "said"};
  CHECK(t == want);
}

TEST_CASE("content token count folds case and curly apostrophes") {
  const auto t = annotate::tokenize("I don\xe2\x80\x99t THINK it matters");
  // i, don't, it are stopwords; THINK and matters are not.
  CHECK(annotate::content_token_count(t, annotate::default_stopwords()) == 2);
}

TEST_CASE("lemmatizer handles inflections and irregular forms") {
  const auto& lex = annotate::Lexicon::builtin();
  struct Case {
    const char* word;
    const char* lemma;
  };
  for (const Case c : {Case{"built", "build"}, Case{"running", "run"}, Case{"studies", "study"},
                       Case{"studied", "study"}, Case{"voted", "vote"}, Case{"discussed", "discuss"},
                       Case{"makes", "make"}, Case{"passes", "pass"}, Case{"was", "be"},
                       Case{"has", "have"}, Case{"said", "say"}, Case{"went", "go"},
                       Case{"grows", "grow"}, Case{"hoping", "hope"}, Case{"stopped", "stop"}}) {
    const auto lemma = lex.lemmatize(c.word);
    REQUIRE_MESSAGE(lemma.has_value(), c.word);
    CHECK_MESSAGE(*lemma == c.lemma, c.word);
  }
  CHECK_FALSE(lex.lemmatize("table").has_value());
  CHECK_FALSE(lex.lemmatize("obama").has_value());
}

TEST_CASE("builtin entity detection") {
  const auto src = annotate::AnnotationSource::builtin();
  CHECK(annotate::detect_entities(sent("1", "I met Barack Obama in Ohio."), src) ==
        annotate::EntitySet{EntityType::kPerson, EntityType::kLocation});
  CHECK(annotate::detect_entities(sent("2", "Obama's plan failed."), src) ==
        annotate::EntitySet{EntityType::kPerson});
  // A capitalized sentence-initial word alone is not an entity.
  CHECK(annotate::detect_entities(sent("3", "Thank you very much."), src).empty());
  CHECK(annotate::detect_entities(sent("4", "We talked to Zorblat yesterday."), src) ==
        annotate::EntitySet{EntityType::kMisc});
  // Lowercase gazetteer words are not matched.
  CHECK(annotate::detect_entities(sent("5", "the texas way"), src).empty());
}

TEST_CASE("builtin verb extraction") {
  const auto src = annotate::AnnotationSource::builtin();
  const auto verbs = annotate::extract_verbs(sent("1", "We built roads and discussed taxes."), src);
  CHECK(verbs.contains("build"));
  CHECK(verbs.contains("discuss"));
  CHECK_FALSE(verbs.contains("roads"));
}

TEST_CASE("external annotation file") {
  const std::string bytes =
      "sentence_id\tentities\tverbs\n"
      "a\tPER,LOC\tSay,build\n"
      "b\t\t\n";
  const auto src = annotate::AnnotationSource::external_file(bytes, "fixture");
  CHECK(annotate::detect_entities(sent("a", "whatever"), src) ==
        annotate::EntitySet{EntityType::kPerson, EntityType::kLocation});
  CHECK(annotate::extract_verbs(sent("a", "whatever"), src) == annotate::VerbSet{"build", "say"});
  CHECK(annotate::extract_verbs(sent("b", "x"), src).empty());
  CHECK_THROWS_AS(annotate::detect_entities(sent("zzz", "x"), src), IdListError);

  corpus::DatasetPartition p;
  p.sentences = {sent("a", "x"), sent("c", "y"), sent("d", "z")};
  try {
    annotate::annotate_dataset(p, src, annotate::default_stopwords());
    FAIL("expected IdListError");
  } catch (const IdListError& e) {
    CHECK(e.ids() == std::vector<std::string>{"c", "d"});
  }
}

TEST_CASE("external annotation parse errors") {
  CHECK_THROWS_AS(annotate::parse_annotation_file("id\tentities\tverbs\n"), ParseError);
  CHECK_THROWS_AS(annotate::parse_annotation_file("sentence_id\tentities\tverbs\na\tXYZ\t\n"),
                  ParseError);
  CHECK_THROWS_AS(
      annotate::parse_annotation_file("sentence_id\tentities\tverbs\na\t\t\na\t\t\n"),
      ParseError);
}

TEST_CASE("annotation file round trip") {
  corpus::DatasetPartition p;
  p.sentences = {sent("1", "Obama said we built 40 schools in Texas."),
                 sent("2", "Thank you."), sent("3", "Congress passed it.")};
  const auto builtin = annotate::annotate_dataset(p, annotate::AnnotationSource::builtin(),
                                                  annotate::default_stopwords());
  const std::string file = annotate::write_annotation_file(builtin);
  const auto external = annotate::annotate_dataset(
      p, annotate::AnnotationSource::external_file(file, "roundtrip"),
      annotate::default_stopwords());
  CHECK(external == builtin);
}

TEST_CASE("entity codes") {
  for (auto t : {EntityType::kPerson, EntityType::kOrganization, EntityType::kLocation,
                 EntityType::kMisc}) {
    CHECK(annotate::parse_entity_code(annotate::entity_code(t)) == t);
  }
  CHECK_FALSE(annotate::parse_entity_code("GPE").has_value());
}

}  // TEST_SUITE
