#include "textimpact/lexicon.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "textimpact/error.hpp"
#include "textimpact/textio.hpp"

namespace textimpact {

namespace {

std::string where(const std::string& source, std::size_t line) {
  return source + ":" + std::to_string(line) + ": ";
}

std::optional<double> parse_number(std::string_view text) {
  text = textio::trim(text);
  if (text.empty()) return std::nullopt;
  double value = 0.0;
  const auto result = std::from_chars(text.data(), text.data() + text.size(), value);
  if (result.ec != std::errc() || result.ptr != text.data() + text.size()) {
    throw std::invalid_argument("not a number");
  }
  return value;
}

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::MissingArtifact, "MissingFile", "cannot read file: " + path.string());
  return in;
}

}  // namespace

bool is_valid_category_id(std::string_view id) {
  if (id.empty() || id.front() == '.' || id.back() == '.') return false;
  char previous = 0;
  for (char c : id) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_' || c == '.';
    if (!ok) return false;
    if (c == '.' && previous == '.') return false;
    previous = c;
  }
  return true;
}

std::string_view category_family(std::string_view id) {
  const auto dot = id.find('.');
  return dot == std::string_view::npos ? id : id.substr(0, dot);
}

int Lexicon::intern(const std::string& id) {
  if (auto it = index_.find(id); it != index_.end()) return it->second;
  const int idx = static_cast<int>(ids_.size());
  ids_.push_back(id);
  index_.emplace(id, idx);
  const std::string family(category_family(id));
  auto [fit, inserted] = family_index_.emplace(family, static_cast<int>(family_index_.size()));
  family_of_.push_back(fit->second);
  return idx;
}

void Lexicon::add_category(const std::string& id, const std::string& name) {
  if (!is_valid_category_id(id)) throw data_error("Malformed", "invalid category id '" + id + "'");
  names_[id] = name;
  intern(id);
}

bool Lexicon::has_category(std::string_view id) const { return names_.count(std::string(id)) > 0; }

void Lexicon::add_pattern(const std::string& pattern, const std::vector<std::string>& categories) {
  if (pattern.empty() || pattern == "*") throw data_error("Malformed", "empty pattern");
  if (categories.empty()) throw data_error("Malformed", "pattern '" + pattern + "' has no categories");
  std::vector<int> cats;
  for (const auto& id : categories) {
    if (!has_category(id)) {
      throw data_error("UnknownCategory", "pattern '" + pattern + "' references undeclared category '" + id + "'");
    }
    cats.push_back(index_.at(id));
  }
  std::sort(cats.begin(), cats.end());
  cats.erase(std::unique(cats.begin(), cats.end()), cats.end());

  const bool is_prefix = pattern.back() == '*';
  std::string key = is_prefix ? pattern.substr(0, pattern.size() - 1) : pattern;
  std::transform(key.begin(), key.end(), key.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  auto& table = is_prefix ? prefixes_ : literals_;
  if (auto it = table.find(key); it != table.end()) {
    if (it->second != cats) {
      throw data_error("DuplicatePattern", "pattern '" + pattern + "' declared twice with different categories");
    }
    return;
  }
  table.emplace(key, std::move(cats));
  if (is_prefix) longest_prefix_ = std::max(longest_prefix_, key.size());
}

std::vector<std::string> Lexicon::literal_words() const {
  std::vector<std::string> out;
  out.reserve(literals_.size());
  for (const auto& [word, cats] : literals_) out.push_back(word);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::string> Lexicon::match(std::string_view word) const {
  std::vector<int> decided;  // family indices already resolved
  std::vector<int> chosen;

  const auto take = [&](const std::vector<int>& cats) {
    std::vector<int> newly;
    for (int c : cats) {
      const int fam = family_of_[c];
      if (std::find(decided.begin(), decided.end(), fam) != decided.end()) continue;
      chosen.push_back(c);
      if (std::find(newly.begin(), newly.end(), fam) == newly.end()) newly.push_back(fam);
    }
    decided.insert(decided.end(), newly.begin(), newly.end());
  };

  if (auto it = literals_.find(std::string(word)); it != literals_.end()) take(it->second);
  for (std::size_t len = std::min(word.size(), longest_prefix_); len >= 1; --len) {
    if (auto it = prefixes_.find(std::string(word.substr(0, len))); it != prefixes_.end()) take(it->second);
  }

  std::vector<std::string> result;
  result.reserve(chosen.size());
  for (int c : chosen) result.push_back(ids_[c]);
  std::sort(result.begin(), result.end());
  result.erase(std::unique(result.begin(), result.end()), result.end());
  return result;
}

Lexicon Lexicon::parse(std::istream& in, const std::string& source) {
  Lexicon lex;
  std::string line;
  std::size_t lineno = 0;
  int header_state = 0;  // 0 = before header, 1 = inside, 2 = after
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string_view trimmed = textio::trim(line);
    if (trimmed.empty() || trimmed.front() == '#') continue;
    if (trimmed == "%") {
      if (header_state == 2) throw data_error("Malformed", where(source, lineno) + "second category header block");
      header_state += 1;
      continue;
    }
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw data_error("Malformed", where(source, lineno) + "expected a TAB separator");
    const std::string left(textio::trim(std::string_view(line).substr(0, tab)));
    const std::string right(textio::trim(std::string_view(line).substr(tab + 1)));
    if (left.empty() || right.empty()) throw data_error("Malformed", where(source, lineno) + "empty field");
    try {
      if (header_state == 1) {
        lex.add_category(left, right);
      } else {
        std::vector<std::string> cats;
        std::stringstream ss(right);
        std::string cat;
        while (std::getline(ss, cat, ',')) {
          const std::string id(textio::trim(cat));
          if (!id.empty()) cats.push_back(id);
        }
        lex.add_pattern(left, cats);
      }
    } catch (const Error& e) {
      throw Error(e.kind(), e.code(), where(source, lineno) + e.what());
    }
  }
  if (header_state == 1) throw data_error("Malformed", source + ": unterminated category header block");
  return lex;
}

Lexicon Lexicon::load(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  return parse(in, path.string());
}

Lexicon load_lexicon(const std::filesystem::path& path) { return Lexicon::load(path); }

void NormsTable::add(const std::string& word, WordNorms norms) {
  const auto check = [&](double v) {
    if (!std::isnan(v) && (v < lo_ || v > hi_)) {
      throw data_error("OutOfBounds", "norm value " + textio::format_double(v) + " for '" + word +
                                          "' outside [" + textio::format_double(lo_) + ", " +
                                          textio::format_double(hi_) + "]");
    }
  };
  check(norms.concreteness);
  check(norms.imageability);
  table_[word] = norms;
}

const WordNorms* NormsTable::find(std::string_view word) const {
  auto it = table_.find(std::string(word));
  return it == table_.end() ? nullptr : &it->second;
}

NormsTable NormsTable::parse(std::istream& in, double lo, double hi, const std::string& source) {
  if (!(lo < hi)) throw config_error("ConfigInvalid", "norm bounds must satisfy lo < hi");
  NormsTable table(lo, hi);
  std::string line;
  std::size_t lineno = 0;
  bool header = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (textio::trim(line).empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    const auto fields = textio::split_csv_line(line);
    if (fields.size() != 3 || textio::trim(fields[0]).empty()) {
      throw data_error("Malformed", where(source, lineno) + "expected word,concreteness,imageability");
    }
    WordNorms norms{};
    try {
      norms.concreteness = parse_number(fields[1]).value_or(std::nan(""));
      norms.imageability = parse_number(fields[2]).value_or(std::nan(""));
    } catch (const std::invalid_argument&) {
      throw data_error("Malformed", where(source, lineno) + "non-numeric rating");
    }
    std::string word(textio::trim(fields[0]));
    std::transform(word.begin(), word.end(), word.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    try {
      table.add(word, norms);
    } catch (const Error& e) {
      throw Error(e.kind(), e.code(), where(source, lineno) + e.what());
    }
  }
  return table;
}

NormsTable NormsTable::load(const std::filesystem::path& path, double lo, double hi) {
  auto in = open_or_throw(path);
  return parse(in, lo, hi, path.string());
}

NormsTable load_norms(const std::filesystem::path& path, double lo, double hi) {
  return NormsTable::load(path, lo, hi);
}

void FrequencyTable::add(const std::string& word, double per_million) {
  if (!(per_million > 0.0) || !std::isfinite(per_million)) {
    throw data_error("OutOfBounds", "frequency for '" + word + "' must be positive");
  }
  table_[word] = per_million;
}

std::optional<double> FrequencyTable::per_million(std::string_view word) const {
  auto it = table_.find(std::string(word));
  if (it == table_.end()) return std::nullopt;
  return it->second;
}

std::optional<double> FrequencyTable::log10_frequency(std::string_view word) const {
  auto f = per_million(word);
  if (!f) return std::nullopt;
  return std::log10(*f);
}

FrequencyTable FrequencyTable::parse(std::istream& in, const std::string& source) {
  FrequencyTable table;
  std::string line;
  std::size_t lineno = 0;
  bool header = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (textio::trim(line).empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    const auto fields = textio::split_csv_line(line);
    if (fields.size() != 2 || textio::trim(fields[0]).empty()) {
      throw data_error("Malformed", where(source, lineno) + "expected word,freq_per_million");
    }
    std::optional<double> value;
    try {
      value = parse_number(fields[1]);
    } catch (const std::invalid_argument&) {
      throw data_error("Malformed", where(source, lineno) + "non-numeric frequency");
    }
    if (!value) throw data_error("Malformed", where(source, lineno) + "missing frequency");
    std::string word(textio::trim(fields[0]));
    std::transform(word.begin(), word.end(), word.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    try {
      table.add(word, *value);
    } catch (const Error& e) {
      throw Error(e.kind(), e.code(), where(source, lineno) + e.what());
    }
  }
  return table;
}

FrequencyTable FrequencyTable::load(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  return parse(in, path.string());
}

FrequencyTable load_frequencies(const std::filesystem::path& path) { return FrequencyTable::load(path); }

}  // namespace textimpact
