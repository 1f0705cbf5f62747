#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "textimpact/error.hpp"
#include "textimpact/lexicon.hpp"

using namespace textimpact;

namespace {

Lexicon parse(const std::string& text) {
  std::istringstream in(text);
  return Lexicon::parse(in);
}

std::string error_code(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return "";
}

}  // namespace

TEST(Lexicon, ParsesLiteralPattern) {
  const auto lex = parse("%\nemotion.positive\tPositive emotion\n%\neffective\temotion.positive\n");
  EXPECT_EQ(lex.pattern_count(), 1u);
  EXPECT_EQ(lex.match("effective"), std::vector<std::string>{"emotion.positive"});
  EXPECT_TRUE(lex.match("effect").empty());
}

TEST(Lexicon, PrefixPatternMatchesExtensions) {
  const auto lex = parse("%\nhealth\tHealth\n%\nimmun*\thealth\n");
  EXPECT_EQ(lex.match("immunity"), std::vector<std::string>{"health"});
  EXPECT_EQ(lex.match("immune"), std::vector<std::string>{"health"});
  EXPECT_EQ(lex.match("immun"), std::vector<std::string>{"health"});
  EXPECT_TRUE(lex.match("imm").empty());
}

TEST(Lexicon, LongestPrefixWinsWithinFamily) {
  const auto lex = parse("%\nbio.a\tA\nbio.b\tB\n%\nimmun*\tbio.a\nimmunit*\tbio.b\n");
  EXPECT_EQ(lex.match("immunity"), std::vector<std::string>{"bio.b"});
  EXPECT_EQ(lex.match("immune"), std::vector<std::string>{"bio.a"});
}

TEST(Lexicon, LiteralBeatsPrefixWithinFamilyOnly) {
  const auto lex = parse(
      "%\nbio.a\tA\nbio.b\tB\nfocus.past\tPast\n%\n"
      "treat*\tbio.a,focus.past\ntreated\tbio.b\n");
  // bio: literal wins; focus: only the prefix pattern speaks.
  EXPECT_EQ(lex.match("treated"), (std::vector<std::string>{"bio.b", "focus.past"}));
}

TEST(Lexicon, NoMatchIsEmpty) {
  const auto lex = Lexicon::load(TEXTIMPACT_DATA_DIR "/lexicon.tsv");
  EXPECT_TRUE(lex.match("zzzz").empty());
  EXPECT_EQ(lex.match("they"), std::vector<std::string>{"pronoun.third_plural"});
}

TEST(Lexicon, AddingUnrelatedPatternDoesNotChangeOtherWords) {
  auto lex = Lexicon::load(TEXTIMPACT_DATA_DIR "/lexicon.tsv");
  const std::vector<std::string> words = {"they", "immunity", "showed", "because", "will", "zzzz", "the"};
  std::vector<std::vector<std::string>> before;
  for (const auto& w : words) before.push_back(lex.match(w));
  lex.add_pattern("qqq*", {"health"});
  lex.add_pattern("xylophone", {"emotion.positive"});
  for (std::size_t i = 0; i < words.size(); ++i) EXPECT_EQ(lex.match(words[i]), before[i]) << words[i];
}

TEST(Lexicon, Errors) {
  EXPECT_EQ(error_code([] { parse("%\nhealth\tHealth\n%\nvirus\tunknown.cat\n"); }), "UnknownCategory");
  EXPECT_EQ(error_code([] { parse("%\nhealth\tHealth\nbio\tBio\n%\nvirus\thealth\nvirus\tbio\n"); }), "DuplicatePattern");
  EXPECT_EQ(error_code([] { parse("%\nhealth\tHealth\n%\nvirus health\n"); }), "Malformed");
  EXPECT_EQ(error_code([] { parse("%\nHealth\tHealth\n%\n"); }), "Malformed");
  // Same pattern with identical categories is de-duplicated silently.
  EXPECT_EQ(error_code([] { parse("%\nhealth\tHealth\n%\nvirus\thealth\nvirus\thealth\n"); }), "");
}

TEST(Lexicon, ErrorMessageNamesLine) {
  try {
    parse("%\nhealth\tHealth\n%\n\nvirus\tnope\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find(":5:"), std::string::npos) << e.what();
  }
}

TEST(Norms, BoundsAreEnforced) {
  std::istringstream ok("word,concreteness,imageability\nvirus,4.4,5.1\nidea,,2.0\n");
  const auto norms = NormsTable::parse(ok, 1.0, 7.0);
  ASSERT_NE(norms.find("virus"), nullptr);
  EXPECT_DOUBLE_EQ(norms.find("virus")->imageability, 5.1);
  EXPECT_TRUE(std::isnan(norms.find("idea")->concreteness));

  std::istringstream bad("word,concreteness,imageability\nhope,9.9,3.0\n");
  EXPECT_EQ(error_code([&] { NormsTable::parse(bad, 1.0, 7.0); }), "OutOfBounds");
  std::istringstream garbage("word,concreteness,imageability\nhope,abc,3.0\n");
  EXPECT_EQ(error_code([&] { NormsTable::parse(garbage, 1.0, 7.0); }), "Malformed");
}

TEST(Frequencies, LogLookupAndValidation) {
  std::istringstream in("word,freq_per_million\nthe,61000\nrare,0.5\n");
  const auto freqs = FrequencyTable::parse(in);
  EXPECT_NEAR(*freqs.log10_frequency("the"), 4.785329835010767, 1e-12);  // log10(61000)
  EXPECT_FALSE(freqs.log10_frequency("missing").has_value());

  std::istringstream zero("word,freq_per_million\nthe,0\n");
  EXPECT_EQ(error_code([&] { FrequencyTable::parse(zero); }), "OutOfBounds");
  std::istringstream shape("word,freq_per_million\nthe\n");
  EXPECT_EQ(error_code([&] { FrequencyTable::parse(shape); }), "Malformed");
}

TEST(DemoResources, LoadCleanly) {
  const auto lex = Lexicon::load(TEXTIMPACT_DATA_DIR "/lexicon.tsv");
  const auto norms = load_norms(TEXTIMPACT_DATA_DIR "/norms.csv");
  const auto freqs = load_frequencies(TEXTIMPACT_DATA_DIR "/frequencies.csv");
  EXPECT_GT(lex.pattern_count(), 300u);
  EXPECT_GT(norms.size(), 200u);
  EXPECT_GT(freqs.size(), 400u);
}
