#include "textimpact/corpus.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <set>

#include "json.hpp"

#include "textimpact/error.hpp"
#include "textimpact/textio.hpp"

namespace textimpact {

namespace {

bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }
// Non-ASCII bytes are kept inside words so UTF-8 sequences are never split.
bool is_word_char(char c) {
  const auto u = static_cast<unsigned char>(c);
  return std::isalnum(u) != 0 || u >= 0x80;
}

std::string ascii_lower(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool ends_with(std::string_view text, std::string_view suffix) {
  return text.size() >= suffix.size() && text.substr(text.size() - suffix.size()) == suffix;
}

std::string collapse_whitespace(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (char c : text) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

}  // namespace

std::string_view label_name(Label label) noexcept { return label == Label::High ? "HIGH" : "MODERATE"; }

std::optional<Label> parse_label(std::string_view text) {
  const std::string lower = ascii_lower(textio::trim(text));
  if (lower == "high") return Label::High;
  if (lower == "moderate") return Label::Moderate;
  return std::nullopt;
}

std::vector<RawDocument> load_corpus(const std::filesystem::path& manifest) {
  const std::string content = textio::read_file(manifest);
  const auto lines = textio::split_lines(content);
  const auto base = manifest.parent_path();

  std::vector<RawDocument> docs;
  std::set<std::string> seen_ids;
  std::set<std::string> seen_paths;
  bool header_seen = false;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t row = i + 1;
    if (textio::trim(lines[i]).empty()) continue;
    const auto fields = textio::split_csv_line(lines[i]);
    if (!header_seen) {
      header_seen = true;
      if (fields.size() < 2 || ascii_lower(textio::trim(fields[0])) != "path" ||
          ascii_lower(textio::trim(fields[1])) != "label") {
        throw data_error("Malformed", manifest.string() + ": header must be 'path,label'");
      }
      continue;
    }
    if (fields.size() != 2) {
      throw data_error("Malformed", manifest.string() + ": row " + std::to_string(row) + " must have 2 fields");
    }
    const auto label = parse_label(fields[1]);
    if (!label) {
      throw data_error("BadLabel", manifest.string() + ": row " + std::to_string(row) + " has label '" +
                                    std::string(textio::trim(fields[1])) + "'");
    }
    std::filesystem::path path(std::string(textio::trim(fields[0])));
    if (path.is_relative()) path = base / path;
    const std::string normalized = path.lexically_normal().string();
    if (!std::filesystem::exists(path)) throw data_error("MissingFile", "document not found: " + normalized);
    if (!seen_paths.insert(normalized).second) {
      throw data_error("DuplicateId", manifest.string() + ": row " + std::to_string(row) + " repeats " + normalized);
    }

    RawDocument doc;
    doc.id = std::to_string(docs.size()) + "_" + path.stem().string();
    if (!seen_ids.insert(doc.id).second) throw data_error("DuplicateId", "duplicate document id " + doc.id);
    doc.label = *label;
    doc.text = textio::read_file(path);
    doc.source_path = normalized;
    docs.push_back(std::move(doc));
  }
  return docs;
}

CleanRuleSet::CleanRuleSet(std::vector<CleanRule> rules) : rules_(std::move(rules)) {
  compiled_.reserve(rules_.size());
  for (const auto& rule : rules_) {
    try {
      compiled_.emplace_back(rule.pattern, std::regex::ECMAScript);
    } catch (const std::regex_error& e) {
      throw config_error("ConfigInvalid", "clean rule '" + rule.id + "' has an invalid pattern: " + e.what());
    }
  }
}

CleanRuleSet CleanRuleSet::defaults() {
  return CleanRuleSet({
      {"non_ascii", R"([^\x00-\x7f]+)", " "},
      {"paren_citation", R"(\s*\([^()]*\b(1[5-9]|20)\d{2}[a-z]?\b[^()]*\))", ""},
      {"bracket_citation", R"(\s*\[\d+(\s*[,;\-]\s*\d+)*\])", ""},
      {"caption_line", R"((^|\n)[ \t]*(Figure|Fig\.|Table|Tab\.)[ \t]*\d+[.:][^\n]*)", "$1"},
  });
}

CleanRuleSet CleanRuleSet::from_json_text(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw config_error("ConfigInvalid", std::string("clean rules: ") + e.what());
  }
  if (!doc.is_array()) throw config_error("ConfigInvalid", "clean rules must be a JSON array");
  std::vector<CleanRule> rules;
  for (const auto& item : doc) {
    if (!item.is_object() || !item.contains("id") || !item.contains("pattern")) {
      throw config_error("ConfigInvalid", "clean rule entries need 'id' and 'pattern'");
    }
    rules.push_back({item.at("id").get<std::string>(), item.at("pattern").get<std::string>(),
                     item.value("replacement", std::string())});
  }
  return CleanRuleSet(std::move(rules));
}

CleanRuleSet CleanRuleSet::load(const std::filesystem::path& path) { return from_json_text(textio::read_file(path)); }

std::string CleanRuleSet::to_json_text() const {
  nlohmann::json doc = nlohmann::json::array();
  for (const auto& rule : rules_) {
    doc.push_back({{"id", rule.id}, {"pattern", rule.pattern}, {"replacement", rule.replacement}});
  }
  return doc.dump(2);
}

std::string CleanRuleSet::apply_once(std::string_view text) const {
  std::string current(text);
  for (const auto& re : compiled_) {
    const std::size_t idx = static_cast<std::size_t>(&re - compiled_.data());
    current = std::regex_replace(current, re, rules_[idx].replacement);
  }
  return collapse_whitespace(current);
}

std::string clean(std::string_view text, const CleanRuleSet& rules) {
  std::string current = rules.apply_once(text);
  for (int pass = 0; pass < 32; ++pass) {
    std::string next = rules.apply_once(current);
    if (next == current) break;
    current = std::move(next);
  }
  return current;
}

const std::vector<std::string>& sentence_abbreviations() {
  static const std::vector<std::string> list = {
      "e.g.", "i.e.", "al.",  "fig.", "figs.", "vs.",   "etc.", "cf.",  "eq.",  "eqs.", "no.",
      "nos.", "dr.",  "mr.",  "mrs.", "ms.",   "prof.", "approx.", "ca.", "vol.", "pp.",  "p.",
      "sec.", "ref.", "refs.", "tab.", "resp.", "viz.", "st.",  "jr.", "sr.",  "ed.",  "eds."};
  return list;
}

std::vector<std::string> segment(std::string_view text) {
  std::vector<std::string> sentences;
  const auto& abbreviations = sentence_abbreviations();
  const auto push = [&](std::size_t from, std::size_t to) {
    const std::string_view piece = textio::trim(text.substr(from, to - from));
    if (!piece.empty()) sentences.emplace_back(piece);
  };

  std::size_t start = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c != '.' && c != '?' && c != '!') continue;
    std::size_t j = i + 1;
    while (j < text.size() && (text[j] == '"' || text[j] == '\'' || text[j] == ')' || text[j] == ']')) ++j;
    bool boundary = false;
    if (j == text.size()) {
      boundary = true;
    } else if (is_space(text[j])) {
      std::size_t k = j;
      while (k < text.size() && is_space(text[k])) ++k;
      boundary = (k == text.size()) || is_upper(text[k]);
    }
    if (boundary && c == '.') {
      std::size_t w = i;
      while (w > start && !is_space(text[w - 1])) --w;
      std::string_view chunk = text.substr(w, i + 1 - w);
      while (!chunk.empty() && (chunk.front() == '(' || chunk.front() == '"' || chunk.front() == '\'' || chunk.front() == '[')) {
        chunk.remove_prefix(1);
      }
      const std::string lower = ascii_lower(chunk);
      if (std::find(abbreviations.begin(), abbreviations.end(), lower) != abbreviations.end()) boundary = false;
      // Single-letter initials ("J. Smith").
      if (chunk.size() == 2 && is_upper(chunk[0])) boundary = false;
    }
    if (boundary) {
      push(start, j);
      start = j;
      i = j - 1;
    }
  }
  if (start < text.size()) push(start, text.size());
  return sentences;
}

bool is_numeric(std::string_view s) {
  std::size_t i = 0;
  const auto digits = [&]() {
    const std::size_t from = i;
    while (i < s.size() && is_digit(s[i])) ++i;
    return i > from;
  };
  if (!digits()) return false;
  while (i < s.size() && (s[i] == '.' || s[i] == ',')) {
    ++i;
    if (!digits()) return false;
  }
  if (i < s.size() && s[i] == '%') ++i;
  return i == s.size();
}

std::vector<Token> tokenize(std::string_view sentence) {
  std::vector<Token> tokens;
  const std::size_t n = sentence.size();
  std::size_t i = 0;
  const auto make = [&](std::size_t from, std::size_t to, TokenKind kind) {
    Token t;
    t.surface = std::string(sentence.substr(from, to - from));
    t.start = from;
    t.end = to;
    t.kind = kind;
    if (kind == TokenKind::Word) {
      t.lower = ascii_lower(t.surface);
      t.stem = stem(t.lower);
    } else if (kind == TokenKind::Number) {
      t.lower = t.surface;
      t.stem = t.surface;
    } else {
      t.lower = t.surface;
    }
    tokens.push_back(std::move(t));
  };

  while (i < n) {
    const char c = sentence[i];
    if (is_space(c)) {
      ++i;
      continue;
    }
    if (!is_word_char(c)) {
      make(i, i + 1, TokenKind::Punct);
      ++i;
      continue;
    }
    // Numeric literal first; it only stands if not glued to a word.
    if (is_digit(c)) {
      std::size_t j = i;
      while (j < n && is_digit(sentence[j])) ++j;
      while (j + 1 < n && (sentence[j] == '.' || sentence[j] == ',') && is_digit(sentence[j + 1])) {
        ++j;
        while (j < n && is_digit(sentence[j])) ++j;
      }
      if (j < n && sentence[j] == '%') ++j;
      const bool glued = j < n && (is_word_char(sentence[j]) ||
                                   ((sentence[j] == '-' || sentence[j] == '\'') && j + 1 < n && is_word_char(sentence[j + 1])));
      if (!glued) {
        make(i, j, TokenKind::Number);
        i = j;
        continue;
      }
    }
    std::size_t j = i;
    while (j < n) {
      if (is_word_char(sentence[j])) {
        ++j;
      } else if ((sentence[j] == '-' || sentence[j] == '\'') && j + 1 < n && is_word_char(sentence[j + 1]) && j > i) {
        ++j;
      } else {
        break;
      }
    }
    const std::string_view surface = sentence.substr(i, j - i);
    make(i, j, is_numeric(surface) ? TokenKind::Number : TokenKind::Word);
    i = j;
  }
  return tokens;
}

namespace {

bool is_vowel(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u'; }

// "runn" -> "run", but "fall", "miss", "buzz" keep their doubles.
std::string undouble(std::string base) {
  const std::size_t n = base.size();
  if (n >= 2 && base[n - 1] == base[n - 2] && std::isalpha(static_cast<unsigned char>(base[n - 1])) &&
      !is_vowel(base[n - 1]) && base[n - 1] != 'l' && base[n - 1] != 's' && base[n - 1] != 'z') {
    base.pop_back();
  }
  return base;
}

}  // namespace

// Rules, first match wins; a candidate shorter than 3 characters leaves the
// word unchanged:
//   -ies -> -y
//   -es  -> drop, when what remains ends in ss, us, x, z, ch or sh
//   -ing -> drop, then undouble a final consonant pair
//   -ed  -> drop, then undouble
//   -s   -> drop, unless the word ends in ss, us or is
std::string stem(std::string_view lower) {
  const std::string word(lower);
  constexpr std::size_t kMin = 3;
  std::string candidate;
  if (ends_with(word, "ies")) {
    candidate = word.substr(0, word.size() - 3) + "y";
  } else if (ends_with(word, "es") &&
             [&] {
               const std::string_view base = std::string_view(word).substr(0, word.size() - 2);
               return ends_with(base, "ss") || ends_with(base, "us") || ends_with(base, "x") ||
                      ends_with(base, "z") || ends_with(base, "ch") || ends_with(base, "sh");
             }()) {
    candidate = word.substr(0, word.size() - 2);
  } else if (ends_with(word, "ing")) {
    candidate = undouble(word.substr(0, word.size() - 3));
  } else if (ends_with(word, "ed")) {
    candidate = undouble(word.substr(0, word.size() - 2));
  } else if (ends_with(word, "s") && !ends_with(word, "ss") && !ends_with(word, "us") && !ends_with(word, "is")) {
    candidate = word.substr(0, word.size() - 1);
  } else {
    return word;
  }
  return candidate.size() >= kMin ? candidate : word;
}

bool Token::has_category(std::string_view id) const {
  return std::binary_search(categories.begin(), categories.end(), id,
                            [](const auto& a, const auto& b) { return std::string_view(a) < std::string_view(b); });
}

bool Token::has_category_family(std::string_view family) const {
  for (const auto& c : categories) {
    if (c == family) return true;
    if (c.size() > family.size() && c.compare(0, family.size(), family) == 0 && c[family.size()] == '.') return true;
  }
  return false;
}

const std::vector<std::string>& required_closed_classes() {
  static const std::vector<std::string> list = {
      "article",          "preposition",      "conjunction",         "verb.aux",
      "pronoun.first_singular", "pronoun.first_plural", "pronoun.second", "pronoun.third_singular",
      "pronoun.third_plural"};
  return list;
}

bool is_function_category(std::string_view id) {
  static constexpr std::array<std::string_view, 8> families = {
      "article", "pronoun", "preposition", "conjunction", "determiner", "negation", "quantifier", "function"};
  const std::string_view family = category_family(id);
  if (std::find(families.begin(), families.end(), family) != families.end()) return true;
  return id == "verb.aux" || id == "verb.modal";
}

bool is_determiner_like(const Token& token) {
  return token.kind == TokenKind::Word && (token.has_category_family("article") || token.has_category_family("determiner"));
}

bool is_pronoun(const Token& token) { return token.kind == TokenKind::Word && token.has_category_family("pronoun"); }

bool is_third_person_pronoun(const Token& token) {
  return token.has_category("pronoun.third_singular") || token.has_category("pronoun.third_plural");
}

PreparedDocument prepare_sentences(std::string id, Label label, const std::vector<std::string>& sentences) {
  PreparedDocument doc{std::move(id), label, {}};
  doc.sentences.reserve(sentences.size());
  for (const auto& s : sentences) doc.sentences.push_back({s, tokenize(s)});
  return doc;
}

PreparedDocument prepare(const RawDocument& raw, const CleanRuleSet& rules) {
  return prepare_sentences(raw.id, raw.label, segment(clean(raw.text, rules)));
}

PreparedDocument annotate(PreparedDocument doc, const Lexicon& lexicon) {
  for (const auto& required : required_closed_classes()) {
    if (!lexicon.has_category(required)) {
      throw data_error("LexiconMissing", "lexicon does not declare required category '" + required + "'");
    }
  }
  static constexpr std::array<std::string_view, 8> noun_suffixes = {"tion", "ment", "ity", "ness",
                                                                      "ism",  "ance", "ence", "ology"};
  for (auto& sentence : doc.sentences) {
    bool first_word_seen = false;
    for (std::size_t i = 0; i < sentence.tokens.size(); ++i) {
      Token& tok = sentence.tokens[i];
      tok.categories.clear();
      tok.is_content = false;
      tok.is_noun_candidate = false;
      if (tok.kind == TokenKind::Number) {
        tok.categories = {"number"};
        first_word_seen = true;
        continue;
      }
      if (tok.kind != TokenKind::Word) continue;
      tok.categories = lexicon.match(tok.lower);
      tok.is_content = std::none_of(tok.categories.begin(), tok.categories.end(),
                                    [](const std::string& c) { return is_function_category(c); });
      if (tok.is_content) {
        const bool after_determiner = i > 0 && is_determiner_like(sentence.tokens[i - 1]);
        const bool capitalized_mid = first_word_seen && is_upper(tok.surface.front());
        const bool suffixed = std::any_of(noun_suffixes.begin(), noun_suffixes.end(), [&](std::string_view suf) {
          return ends_with(tok.lower, suf) || ends_with(tok.stem, suf) ||
                 (ends_with(tok.lower, "s") && ends_with(std::string_view(tok.lower).substr(0, tok.lower.size() - 1), suf));
        });
        tok.is_noun_candidate = after_determiner || capitalized_mid || suffixed;
      }
      first_word_seen = true;
    }
  }
  return doc;
}

}  // namespace textimpact
