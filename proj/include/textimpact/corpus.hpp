#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

#include "textimpact/label.hpp"
#include "textimpact/lexicon.hpp"

namespace textimpact {

struct RawDocument {
  std::string id;
  Label label;
  std::string text;
  std::string source_path;
};

// Manifest: CSV with header `path,label`. Relative paths resolve against the
// manifest's directory. Document ids are `<row index>_<file stem>`.
std::vector<RawDocument> load_corpus(const std::filesystem::path& manifest);

struct CleanRule {
  std::string id;
  std::string pattern;  // ECMAScript regular expression
  std::string replacement;
};

class CleanRuleSet {
 public:
  explicit CleanRuleSet(std::vector<CleanRule> rules);

  // Citations in parentheses containing a year, bracketed numeric
  // citations, figure/table caption lines, and non-ASCII runs.
  static CleanRuleSet defaults();
  // JSON array of {id, pattern, replacement}.
  static CleanRuleSet load(const std::filesystem::path& path);
  static CleanRuleSet from_json_text(std::string_view json_text);

  const std::vector<CleanRule>& rules() const noexcept { return rules_; }
  std::string to_json_text() const;

  // One pass of every rule in order, followed by whitespace collapse.
  std::string apply_once(std::string_view text) const;

 private:
  std::vector<CleanRule> rules_;
  std::vector<std::regex> compiled_;
};

// Applies the rule set until the text stops changing, so the result is a
// fixed point: clean(clean(t)) == clean(t).
std::string clean(std::string_view text, const CleanRuleSet& rules);

// Sentence boundaries: '.', '?' or '!' (optionally followed by closing
// quotes or brackets) then whitespace and an uppercase letter, or the end of
// text. Known abbreviations never end a sentence.
std::vector<std::string> segment(std::string_view text);
const std::vector<std::string>& sentence_abbreviations();

enum class TokenKind { Word, Number, Punct };

struct Token {
  std::string surface;
  std::string lower;
  std::string stem;
  std::size_t start = 0;
  std::size_t end = 0;
  TokenKind kind = TokenKind::Punct;
  bool is_content = false;
  bool is_noun_candidate = false;
  std::vector<std::string> categories;  // sorted

  bool has_category(std::string_view id) const;
  // True if any category starts with `family` followed by '.' (or equals it).
  bool has_category_family(std::string_view family) const;
};

struct Sentence {
  std::string text;
  std::vector<Token> tokens;
};

struct PreparedDocument {
  std::string id;
  Label label;
  std::vector<Sentence> sentences;
};

// Numeric pattern: digits with optional internal '.'/',' groups and an
// optional trailing '%'.
bool is_numeric(std::string_view surface);

std::vector<Token> tokenize(std::string_view sentence);

// Lightweight suffix stripper for overlap matching (see corpus.cpp for the
// rule table).
std::string stem(std::string_view lower);

// Closed-class categories annotate() needs to tell function words apart.
const std::vector<std::string>& required_closed_classes();
bool is_function_category(std::string_view id);
bool is_determiner_like(const Token& token);
bool is_pronoun(const Token& token);
bool is_third_person_pronoun(const Token& token);

// clean + segment + tokenize. No lexicon information yet.
PreparedDocument prepare(const RawDocument& doc, const CleanRuleSet& rules);
// Builds a document from already segmented sentence strings.
PreparedDocument prepare_sentences(std::string id, Label label, const std::vector<std::string>& sentences);

// Attaches lexicon categories, the content/function distinction, and the
// noun-candidate heuristic. Throws LexiconMissing if a required closed class
// is not declared in the lexicon.
PreparedDocument annotate(PreparedDocument doc, const Lexicon& lexicon);

}  // namespace textimpact
