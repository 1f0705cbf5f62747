#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "textimpact/corpus.hpp"
#include "textimpact/error.hpp"
#include "textimpact/random.hpp"

using namespace textimpact;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("textimpact_corpus_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                                        "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  void write(const std::string& name, const std::string& content) const { std::ofstream(path / name) << content; }
};

const Lexicon& demo_lexicon() {
  static const Lexicon lex = Lexicon::load(TEXTIMPACT_DATA_DIR "/lexicon.tsv");
  return lex;
}

std::vector<std::string> surfaces(const std::vector<Token>& tokens) {
  std::vector<std::string> out;
  for (const auto& t : tokens) out.push_back(t.surface);
  return out;
}

// Random text built from pieces that exercise every cleaning rule.
std::string fuzz_text(Rng& rng) {
  static const std::vector<std::string> pieces = {
      "The virus spread quickly.", " (Smith, 2019)", " [3]", " [4, 5]", "\nFigure 2: Caption text here\n",
      " caf\xc3\xa9", " e.g. masks", " Cases rose by 3.5 percent.", "  ", "Does it work?", " Yes!",
      " See Fig. 2 for details.", "\n\n", " et al. reported", " J. Smith", "(see Jones et al., 2020; Lee 2021)",
      " Table 1. Results\n", "it", " 12%", " COVID-19 ", "!", "."};
  std::string text;
  const std::size_t n = 1 + rng.uniform_index(25);
  for (std::size_t i = 0; i < n; ++i) text += pieces[rng.uniform_index(pieces.size())];
  return text;
}

}  // namespace

TEST(LoadCorpus, ReadsManifestInOrder) {
  TempDir dir;
  dir.write("a.txt", "Alpha text.");
  dir.write("b.txt", "Beta text.");
  dir.write("manifest.csv", "path,label\r\na.txt,HIGH\r\nb.txt,moderate\r\n");
  const auto docs = load_corpus(dir.path / "manifest.csv");
  ASSERT_EQ(docs.size(), 2u);
  EXPECT_EQ(docs[0].id, "0_a");
  EXPECT_EQ(docs[0].label, Label::High);
  EXPECT_EQ(docs[0].text, "Alpha text.");
  EXPECT_EQ(docs[1].id, "1_b");
  EXPECT_EQ(docs[1].label, Label::Moderate);
}

TEST(LoadCorpus, EmptyManifestIsEmptyCorpus) {
  TempDir dir;
  dir.write("manifest.csv", "path,label\n");
  EXPECT_TRUE(load_corpus(dir.path / "manifest.csv").empty());
}

TEST(LoadCorpus, BadLabelNamesRow) {
  TempDir dir;
  dir.write("a.txt", "x");
  dir.write("b.txt", "y");
  dir.write("manifest.csv", "path,label\na.txt,HIGH\nb.txt,medium\n");
  try {
    load_corpus(dir.path / "manifest.csv");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "BadLabel");
    EXPECT_NE(std::string(e.what()).find("row 3"), std::string::npos);
  }
}

TEST(LoadCorpus, MissingFileAndDuplicates) {
  TempDir dir;
  dir.write("a.txt", "x");
  dir.write("m1.csv", "path,label\nnope.txt,HIGH\n");
  dir.write("m2.csv", "path,label\na.txt,HIGH\n./a.txt,MODERATE\n");
  try {
    load_corpus(dir.path / "m1.csv");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "MissingFile");
  }
  try {
    load_corpus(dir.path / "m2.csv");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "DuplicateId");
  }
}

TEST(Clean, RemovesParentheticalCitation) {
  const auto rules = CleanRuleSet::defaults();
  EXPECT_EQ(clean("Prior work (Smith, 2019) shows X.", rules), "Prior work shows X.");
  EXPECT_EQ(clean("", rules), "");
  EXPECT_EQ(clean("Nothing   to\nremove here.", rules), "Nothing to remove here.");
}

TEST(Clean, OtherDefaultRules) {
  const auto rules = CleanRuleSet::defaults();
  EXPECT_EQ(clean("Masks help [3]. They work [4, 5].", rules), "Masks help. They work.");
  EXPECT_EQ(clean("Intro text.\nFigure 2: Caption of the figure\nBody text.", rules), "Intro text. Body text.");
  EXPECT_EQ(clean("Table 2 shows the result.", rules), "Table 2 shows the result.");
  EXPECT_EQ(clean("na\xc3\xafve", rules), "na ve");
  // Numbers and names used grammatically are kept.
  EXPECT_EQ(clean("Smith reported 12 cases in 2019.", rules), "Smith reported 12 cases in 2019.");
}

TEST(Clean, IsIdempotentOnFuzzedText) {
  const auto rules = CleanRuleSet::defaults();
  Rng rng(11);
  for (int i = 0; i < 500; ++i) {
    const auto text = fuzz_text(rng);
    const auto once = clean(text, rules);
    EXPECT_EQ(clean(once, rules), once) << text;
    for (const auto& s : segment(once)) EXPECT_FALSE(s.empty());
  }
}

TEST(Clean, RuleSetJsonRoundTrip) {
  const auto rules = CleanRuleSet::defaults();
  const auto reloaded = CleanRuleSet::from_json_text(rules.to_json_text());
  ASSERT_EQ(reloaded.rules().size(), rules.rules().size());
  EXPECT_EQ(clean("Prior work (Smith, 2019) shows X [2].", reloaded), "Prior work shows X.");
  EXPECT_THROW(CleanRuleSet::from_json_text(R"([{"id":"bad","pattern":"("}])"), Error);
}

TEST(Segment, SplitsOnTerminalPunctuation) {
  EXPECT_EQ(segment("It works. Does it? Yes!"), (std::vector<std::string>{"It works.", "Does it?", "Yes!"}));
  EXPECT_EQ(segment("Cases rose by 3.5 percent.").size(), 1u);
  EXPECT_EQ(segment("See Fig. 2 for details.").size(), 1u);
  EXPECT_EQ(segment("Smith et al. Reported it. Next one.").size(), 2u);
  EXPECT_EQ(segment("We used masks, e.g. Cloth masks. They help.").size(), 2u);
  EXPECT_EQ(segment("J. Smith wrote it. It sold.").size(), 2u);
  EXPECT_EQ(segment("A no-split case. lowercase follows."), std::vector<std::string>{"A no-split case. lowercase follows."});
  EXPECT_TRUE(segment("").empty());
  EXPECT_TRUE(segment("   ").empty());
}

TEST(Tokenize, WordsNumbersAndPunctuation) {
  const auto tokens = tokenize("COVID-19 cases rose.");
  ASSERT_EQ(surfaces(tokens), (std::vector<std::string>{"COVID-19", "cases", "rose", "."}));
  EXPECT_EQ(tokens[0].kind, TokenKind::Word);
  EXPECT_EQ(tokens[3].kind, TokenKind::Punct);

  const auto pct = tokenize("3.5%");
  ASSERT_EQ(pct.size(), 1u);
  EXPECT_EQ(pct[0].kind, TokenKind::Number);
  EXPECT_TRUE(tokenize("").empty());

  const auto mixed = tokenize("In 2019, 1,200 people (12%) didn't.");
  EXPECT_EQ(surfaces(mixed), (std::vector<std::string>{"In", "2019", ",", "1,200", "people", "(", "12%", ")", "didn't", "."}));
  EXPECT_EQ(mixed[1].kind, TokenKind::Number);
  EXPECT_EQ(mixed[3].kind, TokenKind::Number);
  EXPECT_EQ(mixed[8].kind, TokenKind::Word);
  EXPECT_EQ(tokenize("19th")[0].kind, TokenKind::Word);
}

TEST(Tokenize, SurfacesAndGapsReconstructSentence) {
  const auto rules = CleanRuleSet::defaults();
  Rng rng(12);
  for (int i = 0; i < 300; ++i) {
    for (const auto& sentence : segment(clean(fuzz_text(rng), rules))) {
      const auto tokens = tokenize(sentence);
      std::string rebuilt;
      std::size_t pos = 0;
      for (const auto& t : tokens) {
        ASSERT_GE(t.start, pos);
        rebuilt += sentence.substr(pos, t.start - pos);
        rebuilt += t.surface;
        EXPECT_EQ(sentence.substr(t.start, t.end - t.start), t.surface);
        pos = t.end;
        if (t.kind == TokenKind::Word) {
          EXPECT_FALSE(t.lower.empty());
          EXPECT_FALSE(t.stem.empty());
        }
        EXPECT_EQ(t.kind == TokenKind::Number, is_numeric(t.surface)) << t.surface;
      }
      rebuilt += sentence.substr(pos);
      EXPECT_EQ(rebuilt, sentence);
      for (std::size_t k = 1; k < tokens.size(); ++k) EXPECT_LT(tokens[k - 1].start, tokens[k].start);
    }
  }
}

TEST(Stem, RuleTable) {
  EXPECT_EQ(stem("studies"), "study");
  EXPECT_EQ(stem("running"), "run");
  EXPECT_EQ(stem("is"), "is");
  EXPECT_EQ(stem("boxes"), "box");
  EXPECT_EQ(stem("classes"), "class");
  EXPECT_EQ(stem("churches"), "church");
  EXPECT_EQ(stem("viruses"), "virus");
  EXPECT_EQ(stem("cases"), "case");
  EXPECT_EQ(stem("masks"), "mask");
  EXPECT_EQ(stem("class"), "class");
  EXPECT_EQ(stem("virus"), "virus");
  EXPECT_EQ(stem("analysis"), "analysis");
  EXPECT_EQ(stem("reported"), "report");
  EXPECT_EQ(stem("stopped"), "stop");
  EXPECT_EQ(stem("falling"), "fall");
  EXPECT_EQ(stem("missing"), "miss");
  EXPECT_EQ(stem("thing"), "thing");
  EXPECT_EQ(stem("used"), "used");
  EXPECT_EQ(stem("dies"), "dies");
  EXPECT_EQ(stem(""), "");
}

TEST(Stem, DeterministicAndTotal) {
  Rng rng(13);
  for (int i = 0; i < 2000; ++i) {
    std::string w;
    const std::size_t n = rng.uniform_index(9);
    for (std::size_t k = 0; k < n; ++k) w.push_back("abcdeginsy"[rng.uniform_index(10)]);
    const auto s = stem(w);
    EXPECT_EQ(stem(w), s);
    if (!w.empty()) {
      EXPECT_FALSE(s.empty());
    }
  }
}

TEST(Annotate, ContentAndNounCandidates) {
  auto doc = annotate(prepare_sentences("d", Label::High, {"the virus spread"}), demo_lexicon());
  const auto& t = doc.sentences[0].tokens;
  ASSERT_EQ(t.size(), 3u);
  EXPECT_FALSE(t[0].is_content);
  EXPECT_TRUE(t[1].is_content);
  EXPECT_TRUE(t[2].is_content);
  EXPECT_TRUE(t[1].is_noun_candidate);
  EXPECT_FALSE(t[2].is_noun_candidate);
}

TEST(Annotate, ClosedClassLookup) {
  auto doc = annotate(prepare_sentences("d", Label::High, {"They arrived."}), demo_lexicon());
  const auto& t = doc.sentences[0].tokens;
  EXPECT_TRUE(t[0].has_category("pronoun.third_plural"));
  EXPECT_FALSE(t[0].is_content);
  EXPECT_FALSE(t[2].is_content);  // punctuation
}

TEST(Annotate, NounHeuristics) {
  auto doc = annotate(prepare_sentences("d", Label::High, {"Results from Boston show strong improvement."}), demo_lexicon());
  const auto& t = doc.sentences[0].tokens;
  EXPECT_FALSE(t[0].is_noun_candidate);  // sentence-initial capital does not count
  EXPECT_TRUE(t[2].is_noun_candidate);   // capitalized mid-sentence
  EXPECT_TRUE(t[5].is_noun_candidate);   // -ment suffix
}

TEST(Annotate, PunctuationOnlyAndNumbers) {
  auto doc = annotate(prepare_sentences("d", Label::High, {"?!", "We saw 12 cases."}), demo_lexicon());
  for (const auto& tok : doc.sentences[0].tokens) EXPECT_FALSE(tok.is_content);
  const auto& t = doc.sentences[1].tokens;
  EXPECT_EQ(t[2].kind, TokenKind::Number);
  EXPECT_TRUE(t[2].has_category("number"));
  EXPECT_FALSE(t[2].is_content);
}

TEST(Annotate, EveryWordIsContentXorFunction) {
  Rng rng(14);
  const auto rules = CleanRuleSet::defaults();
  for (int i = 0; i < 100; ++i) {
    auto doc = annotate(prepare({"x", Label::High, fuzz_text(rng), ""}, rules), demo_lexicon());
    for (const auto& s : doc.sentences) {
      for (const auto& tok : s.tokens) {
        if (tok.kind != TokenKind::Word) {
          EXPECT_FALSE(tok.is_content);
          continue;
        }
        const bool function_word = std::any_of(tok.categories.begin(), tok.categories.end(),
                                               [](const std::string& c) { return is_function_category(c); });
        EXPECT_NE(tok.is_content, function_word) << tok.surface;
      }
    }
  }
}

TEST(Annotate, MissingClosedClassIsAnError) {
  Lexicon partial;
  partial.add_category("article", "Articles");
  try {
    annotate(prepare_sentences("d", Label::High, {"the virus"}), partial);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "LexiconMissing");
  }
}
