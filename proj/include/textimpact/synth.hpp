#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "textimpact/label.hpp"
#include "textimpact/lexicon.hpp"

namespace textimpact {

// How a planted document-level intensity u in [0, 1] depends on the class.
// Shift: HIGH u ~ U(0.15, 1), MODERATE u ~ U(0, 0.85).
// Band: with probability `band_informative` HIGH u ~ U(0.35, 0.65) and
// MODERATE u sits in one of the tails U(0, 0.25) or U(0.75, 1); otherwise u
// is uniform for both classes.
enum class SignalShape { Shift, Band };

struct PlantedSignal {
  std::string feature;   // feature id the signal should move
  std::string category;  // lexicon category; empty means noun reuse
  SignalShape shape = SignalShape::Shift;
  // u maps linearly to [lo, hi]: a percent of word tokens for a category,
  // the probability that a noun slot reuses a core noun otherwise.
  double lo = 0.0;
  double hi = 1.0;
};

struct SyntheticSpec {
  std::size_t high = 100;
  std::size_t moderate = 100;
  std::uint64_t seed = 7;
  std::size_t sentences_min = 40;
  std::size_t sentences_max = 60;
  double band_informative = 0.85;
  // Every other lexicon category appears at a class-independent percent
  // drawn per document from [background_lo, background_hi].
  double background_lo = 0.3;
  double background_hi = 1.2;
  std::vector<PlantedSignal> signals = default_signals();

  static std::vector<PlantedSignal> default_signals();
  std::vector<std::string> planted_features() const;
};

struct SyntheticDocument {
  std::string file_name;  // e.g. "high_007.txt"
  Label label = Label::High;
  std::string text;
};

// HIGH documents first, then MODERATE. Document i draws from
// Rng(derive_seed(seed, i)). Throws ConfigInvalid for an empty class, a bad
// sentence range, or a category the lexicon cannot supply.
std::vector<SyntheticDocument> generate_synthetic(const SyntheticSpec& spec, const Lexicon& lexicon);

// Writes docs/<file_name> and manifest.csv (header `path,label`) under dir.
void write_synthetic(const std::vector<SyntheticDocument>& docs, const std::filesystem::path& dir);

}  // namespace textimpact
