#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace textimpact {

// Category identifiers are lowercase dot-separated names such as
// "pronoun.third_plural" or "focus.past". The first component is the
// category family; pattern precedence is resolved per family.
bool is_valid_category_id(std::string_view id);
std::string_view category_family(std::string_view id);

// Word-category dictionary in the LIWC style. Patterns are literal words or
// prefixes written with a trailing '*'.
//
// Matching, per category family: a literal match wins over any prefix match,
// and among prefix matches the longest prefix wins. The result is the union
// over families of the winning pattern's categories in that family.
//
// Immutable after construction; safe for concurrent reads.
class Lexicon {
 public:
  Lexicon() = default;

  // TSV: a block delimited by lines consisting of '%' declares
  // `id<TAB>name` pairs; every other non-blank, non-'#' line is
  // `pattern<TAB>cat1,cat2,...`.
  static Lexicon load(const std::filesystem::path& path);
  static Lexicon parse(std::istream& in, const std::string& source = "<lexicon>");

  void add_category(const std::string& id, const std::string& name);
  // Re-adding a pattern with the same categories is a no-op; with different
  // categories it throws DuplicatePattern.
  void add_pattern(const std::string& pattern, const std::vector<std::string>& categories);

  const std::map<std::string, std::string>& categories() const noexcept { return names_; }
  bool has_category(std::string_view id) const;
  std::size_t pattern_count() const noexcept { return literals_.size() + prefixes_.size(); }
  // Literal (non-prefix) patterns, sorted.
  std::vector<std::string> literal_words() const;

  // Sorted, duplicate-free category ids for a lowercase word.
  std::vector<std::string> match(std::string_view word_lower) const;

 private:
  int intern(const std::string& id);

  std::map<std::string, std::string> names_;
  std::vector<std::string> ids_;
  std::unordered_map<std::string, int> index_;
  std::vector<int> family_of_;  // category index -> family index
  std::unordered_map<std::string, int> family_index_;
  std::unordered_map<std::string, std::vector<int>> literals_;
  std::unordered_map<std::string, std::vector<int>> prefixes_;
  std::size_t longest_prefix_ = 0;
};

inline std::vector<std::string> match_categories(std::string_view word_lower, const Lexicon& lexicon) {
  return lexicon.match(word_lower);
}

// Concreteness and imageability ratings. A NaN value means the rating is
// not available for that word.
struct WordNorms {
  double concreteness;
  double imageability;
};

class NormsTable {
 public:
  NormsTable(double lo = 1.0, double hi = 7.0) : lo_(lo), hi_(hi) {}

  // CSV with header `word,concreteness,imageability`; an empty cell marks a
  // missing rating. Values outside [lo, hi] throw OutOfBounds.
  static NormsTable load(const std::filesystem::path& path, double lo = 1.0, double hi = 7.0);
  static NormsTable parse(std::istream& in, double lo, double hi, const std::string& source = "<norms>");

  void add(const std::string& word, WordNorms norms);
  const WordNorms* find(std::string_view word_lower) const;
  double lower_bound() const noexcept { return lo_; }
  double upper_bound() const noexcept { return hi_; }
  std::size_t size() const noexcept { return table_.size(); }

 private:
  double lo_;
  double hi_;
  std::unordered_map<std::string, WordNorms> table_;
};

class FrequencyTable {
 public:
  // CSV with header `word,freq_per_million`; frequencies must be > 0.
  static FrequencyTable load(const std::filesystem::path& path);
  static FrequencyTable parse(std::istream& in, const std::string& source = "<frequencies>");

  void add(const std::string& word, double per_million);
  std::optional<double> per_million(std::string_view word_lower) const;
  std::optional<double> log10_frequency(std::string_view word_lower) const;
  std::size_t size() const noexcept { return table_.size(); }

 private:
  std::unordered_map<std::string, double> table_;
};

NormsTable load_norms(const std::filesystem::path& path, double lo = 1.0, double hi = 7.0);
FrequencyTable load_frequencies(const std::filesystem::path& path);
Lexicon load_lexicon(const std::filesystem::path& path);

}  // namespace textimpact
