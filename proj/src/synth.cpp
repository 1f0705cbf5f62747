#include "textimpact/synth.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <span>

#include "textimpact/error.hpp"
#include "textimpact/random.hpp"
#include "textimpact/textio.hpp"

namespace textimpact {

namespace {

constexpr std::string_view kNouns[] = {
    "analysis",  "animal",   "attitude",  "bed",       "belief",   "blood",     "book",      "bottle",    "bridge",
    "building",  "camera",   "capacity",  "car",       "cell",     "chair",     "child",     "city",      "component",
    "computer",  "concept",  "context",   "dimension", "doctor",   "drug",      "engine",    "farm",      "forest",
    "framework", "freedom",  "glass",     "hospital",  "house",    "island",    "justice",   "knowledge", "leaf",
    "level",     "machine",  "market",    "mask",      "meaning",  "mechanism", "metal",     "method",    "model",
    "mouse",     "notion",   "nurse",     "outcome",   "paper",    "patient",   "pattern",   "perspective", "phone",
    "plant",     "policy",   "principle", "process",   "quality",  "record",    "relation",  "river",     "road",
    "role",      "sample",   "school",    "seed",      "soil",     "stone",     "strategy",  "structure", "table",
    "tendency",  "theory",   "tissue",    "tree",      "trend",    "vaccine",   "village",   "virus",     "water",
    "window",    "harbor",   "garden",    "valley",    "engineer", "library",   "museum",    "journal",   "protein",
    "enzyme",    "sensor",   "battery",   "satellite", "glacier",  "archive",   "teacher",   "student",   "farmer",
};

constexpr std::string_view kFiller[] = {
    "large",   "small",  "recent",  "regional", "annual",  "formal",  "complex", "digital", "stable",  "novel",
    "rural",   "urban",  "global",  "dense",    "narrow",  "broad",   "rapid",   "slow",    "modern",  "coastal",
    "seasonal", "thermal", "mobile", "lateral",  "spatial", "genetic", "central", "northern", "southern", "western",
    "shape",   "link",   "track",   "span",     "mark",    "frame",   "join",    "cover",   "carry",   "map",
    "rank",    "sort",   "blend",   "green",    "silver",  "wooden",  "daily",   "weekly",  "local",   "remote",
};

bool is_article_like(const std::vector<std::string>& categories) {
  return std::any_of(categories.begin(), categories.end(), [](const std::string& c) {
    const auto family = category_family(c);
    return family == "article" || family == "determiner";
  });
}

struct Vocabulary {
  std::vector<std::string> nouns;
  std::vector<std::string> filler;
  std::map<std::string, std::vector<std::string>> by_category;  // planted and background pools
  std::vector<std::string> background;                          // category ids, sorted
};

Vocabulary build_vocabulary(const SyntheticSpec& spec, const Lexicon& lexicon) {
  Vocabulary v;
  for (auto w : kNouns) {
    if (lexicon.match(w).empty()) v.nouns.emplace_back(w);
  }
  for (auto w : kFiller) {
    if (lexicon.match(w).empty()) v.filler.emplace_back(w);
  }
  if (v.nouns.size() < 10 || v.filler.size() < 10) {
    throw config_error("ConfigInvalid", "the lexicon leaves too few neutral words for the synthetic generator");
  }

  std::vector<std::string> planted;
  for (const auto& s : spec.signals) {
    if (s.category.empty()) continue;
    if (!lexicon.has_category(s.category)) {
      throw config_error("ConfigInvalid", "synthetic signal category '" + s.category + "' is not in the lexicon");
    }
    planted.push_back(s.category);
  }
  const auto is_planted = [&](const std::string& c) { return std::find(planted.begin(), planted.end(), c) != planted.end(); };

  const auto words = lexicon.literal_words();
  for (const auto& cat : planted) {
    auto& pool = v.by_category[cat];
    for (const auto& w : words) {
      const auto cats = lexicon.match(w);
      if (std::find(cats.begin(), cats.end(), cat) == cats.end() || is_article_like(cats)) continue;
      const bool clean = std::none_of(cats.begin(), cats.end(), [&](const std::string& c) { return c != cat && is_planted(c); });
      if (clean) pool.push_back(w);
    }
    if (pool.empty()) throw config_error("ConfigInvalid", "no lexicon word isolates category '" + cat + "'");
  }

  for (const auto& [cat, name] : lexicon.categories()) {
    const auto family = category_family(cat);
    if (is_planted(cat) || family == "article" || family == "determiner") continue;
    std::vector<std::string> pool;
    for (const auto& w : words) {
      const auto cats = lexicon.match(w);
      if (std::find(cats.begin(), cats.end(), cat) == cats.end() || is_article_like(cats)) continue;
      if (std::none_of(cats.begin(), cats.end(), is_planted)) pool.push_back(w);
    }
    if (pool.empty()) continue;
    v.background.push_back(cat);
    v.by_category[cat] = std::move(pool);
  }
  return v;
}

double draw_intensity(SignalShape shape, Label label, double informative, Rng& rng) {
  if (shape == SignalShape::Shift) return label == Label::High ? rng.uniform(0.15, 1.0) : rng.uniform(0.0, 0.85);
  if (!rng.bernoulli(informative)) return rng.uniform01();
  if (label == Label::High) return rng.uniform(0.35, 0.65);
  return rng.bernoulli(0.5) ? rng.uniform(0.0, 0.25) : rng.uniform(0.75, 1.0);
}

const std::string& pick(const std::vector<std::string>& pool, Rng& rng) { return pool[rng.uniform_index(pool.size())]; }

std::string generate_document(const SyntheticSpec& spec, const Vocabulary& vocab, Label label, Rng& rng) {
  // Per-document intensities, in signal order, then background rates.
  double reuse = 0.0;
  std::vector<std::pair<std::string, double>> rates;  // category -> percent
  for (const auto& s : spec.signals) {
    const double u = draw_intensity(s.shape, label, spec.band_informative, rng);
    const double value = s.lo + u * (s.hi - s.lo);
    if (s.category.empty()) {
      reuse = value;
    } else {
      rates.emplace_back(s.category, value);
    }
  }
  for (const auto& cat : vocab.background) rates.emplace_back(cat, rng.uniform(spec.background_lo, spec.background_hi));

  std::vector<std::string> core;
  for (int i = 0; i < 3; ++i) core.push_back(pick(vocab.nouns, rng));

  // Skeleton: "The N <slots> the N <slots>." with slots filled afterwards.
  struct Skeleton {
    std::string noun1, noun2;
    std::size_t gap1, gap2;
  };
  const std::size_t sentences = spec.sentences_min + rng.uniform_index(spec.sentences_max - spec.sentences_min + 1);
  std::vector<Skeleton> skeleton;
  std::size_t slot_count = 0;
  for (std::size_t s = 0; s < sentences; ++s) {
    Skeleton sk;
    sk.noun1 = rng.bernoulli(reuse) ? pick(core, rng) : pick(vocab.nouns, rng);
    sk.noun2 = rng.bernoulli(reuse) ? pick(core, rng) : pick(vocab.nouns, rng);
    sk.gap1 = 3 + rng.uniform_index(4);
    sk.gap2 = 3 + rng.uniform_index(4);
    slot_count += sk.gap1 + sk.gap2;
    skeleton.push_back(sk);
  }
  const double total_words = static_cast<double>(slot_count + 4 * sentences);

  std::vector<std::size_t> counts;
  std::size_t used = 0;
  for (const auto& [cat, percent] : rates) {
    counts.push_back(static_cast<std::size_t>(std::lround(percent / 100.0 * total_words)));
    used += counts.back();
  }
  if (used > slot_count) throw config_error("ConfigInvalid", "synthetic category rates exceed the available word slots");

  std::vector<std::size_t> order(slot_count);
  for (std::size_t i = 0; i < slot_count; ++i) order[i] = i;
  rng.shuffle(std::span<std::size_t>(order));
  std::vector<std::string> slots(slot_count);
  std::size_t next = 0;
  for (std::size_t c = 0; c < rates.size(); ++c) {
    const auto& pool = vocab.by_category.at(rates[c].first);
    for (std::size_t i = 0; i < counts[c]; ++i) slots[order[next++]] = pick(pool, rng);
  }
  for (auto& slot : slots) {
    if (slot.empty()) slot = pick(vocab.filler, rng);
  }

  std::string text;
  std::size_t cursor = 0;
  for (std::size_t s = 0; s < skeleton.size(); ++s) {
    const auto& sk = skeleton[s];
    if (s > 0) text += s % 8 == 0 ? "\n\n" : " ";
    text += "The " + sk.noun1;
    for (std::size_t i = 0; i < sk.gap1; ++i) text += " " + slots[cursor++];
    text += " the " + sk.noun2;
    for (std::size_t i = 0; i < sk.gap2; ++i) text += " " + slots[cursor++];
    text += ".";
  }
  text += "\n";
  return text;
}

std::string padded(std::size_t value, std::size_t width) {
  auto text = std::to_string(value);
  if (text.size() < width) text.insert(0, width - text.size(), '0');
  return text;
}

}  // namespace

std::vector<PlantedSignal> SyntheticSpec::default_signals() {
  using S = SignalShape;
  return {
      {"cohesion.noun_overlap_all", "", S::Shift, 0.05, 0.6},
      {"liwc.focuspast", "focus.past", S::Shift, 1.0, 5.0},
      {"incidence.pronoun_third_plural", "pronoun.third_plural", S::Band, 0.2, 2.0},
      {"liwc.auxverb", "verb.aux", S::Band, 0.5, 4.5},
      {"liwc.cause", "cognition.cause", S::Band, 0.5, 4.5},
      {"liwc.certain", "cognition.certainty", S::Band, 0.5, 4.5},
      {"liwc.insight", "cognition.insight", S::Band, 0.5, 4.5},
      {"incidence.pronoun_second", "pronoun.second", S::Band, 0.5, 4.5},
  };
}

std::vector<std::string> SyntheticSpec::planted_features() const {
  std::vector<std::string> out;
  for (const auto& s : signals) out.push_back(s.feature);
  return out;
}

std::vector<SyntheticDocument> generate_synthetic(const SyntheticSpec& spec, const Lexicon& lexicon) {
  if (spec.high == 0 || spec.moderate == 0) throw config_error("ConfigInvalid", "both synthetic classes need documents");
  if (spec.sentences_min < 2 || spec.sentences_max < spec.sentences_min) {
    throw config_error("ConfigInvalid", "synthetic sentence range must satisfy 2 <= min <= max");
  }
  const auto vocab = build_vocabulary(spec, lexicon);
  std::vector<SyntheticDocument> docs;
  const std::size_t total = spec.high + spec.moderate;
  for (std::size_t i = 0; i < total; ++i) {
    const bool high = i < spec.high;
    Rng rng(derive_seed(spec.seed, i));
    SyntheticDocument doc;
    doc.label = high ? Label::High : Label::Moderate;
    doc.file_name = (high ? "high_" : "moderate_") + padded(high ? i + 1 : i - spec.high + 1, 3) + ".txt";
    doc.text = generate_document(spec, vocab, doc.label, rng);
    docs.push_back(std::move(doc));
  }
  return docs;
}

void write_synthetic(const std::vector<SyntheticDocument>& docs, const std::filesystem::path& dir) {
  std::string manifest = "path,label\n";
  for (const auto& doc : docs) {
    textio::write_file_atomic(dir / "docs" / doc.file_name, doc.text);
    manifest += textio::csv_escape("docs/" + doc.file_name) + "," + std::string(label_name(doc.label)) + "\n";
  }
  textio::write_file_atomic(dir / "manifest.csv", manifest);
}

}  // namespace textimpact
