#include "textimpact/features.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "json.hpp"
#include "textimpact/error.hpp"
#include "textimpact/kernels.hpp"
#include "textimpact/parallel.hpp"
#include "textimpact/random.hpp"

namespace textimpact {

namespace {

struct SentenceSets {
  std::vector<std::string> content;
  std::vector<std::string> nouns;
  std::vector<std::string> pronouns;
  bool third_person = false;
};

void sort_unique(std::vector<std::string>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

SentenceSets sentence_sets(const Sentence& s) {
  SentenceSets out;
  for (const auto& tok : s.tokens) {
    if (tok.kind != TokenKind::Word) continue;
    if (tok.is_content) out.content.push_back(tok.stem);
    if (tok.is_noun_candidate) out.nouns.push_back(tok.stem);
    if (is_pronoun(tok)) out.pronouns.push_back(tok.lower);
    if (is_third_person_pronoun(tok)) out.third_person = true;
  }
  sort_unique(out.content);
  sort_unique(out.nouns);
  sort_unique(out.pronouns);
  return out;
}

std::size_t intersection_size(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::size_t i = 0, j = 0, n = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] < b[j]) {
      ++i;
    } else if (b[j] < a[i]) {
      ++j;
    } else {
      ++n;
      ++i;
      ++j;
    }
  }
  return n;
}

double pair_score(const SentenceSets& earlier, const SentenceSets& later, OverlapKind kind) {
  switch (kind) {
    case OverlapKind::Content: {
      const std::size_t total = earlier.content.size() + later.content.size();
      if (total == 0) return 0.0;
      return 2.0 * static_cast<double>(intersection_size(earlier.content, later.content)) / static_cast<double>(total);
    }
    case OverlapKind::Noun:
      return intersection_size(earlier.nouns, later.nouns) > 0 ? 1.0 : 0.0;
    case OverlapKind::Argument:
      return intersection_size(earlier.nouns, later.nouns) > 0 || intersection_size(earlier.pronouns, later.pronouns) > 0
                 ? 1.0
                 : 0.0;
    case OverlapKind::Anaphor:
      return later.third_person && !earlier.nouns.empty() ? 1.0 : 0.0;
  }
  return 0.0;
}

template <class Fn>
std::optional<double> mean_over_pairs(std::size_t n, Scope scope, Fn&& score) {
  if (n < 2) return std::nullopt;
  double total = 0.0;
  std::size_t pairs = 0;
  if (scope == Scope::Adjacent) {
    for (std::size_t i = 0; i + 1 < n; ++i, ++pairs) total += score(i, i + 1);
  } else {
    for (std::size_t i = 0; i + 1 < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j, ++pairs) total += score(i, j);
    }
  }
  return total / static_cast<double>(pairs);
}

double norm2(const std::vector<double>& v) { return std::sqrt(kernels::squared_norm(v)); }

std::vector<std::vector<double>> embeddings(const PreparedDocument& doc, const LsaSpace& space) {
  std::vector<std::vector<double>> out;
  out.reserve(doc.sentences.size());
  for (const auto& s : doc.sentences) out.push_back(sentence_embedding(space, s));
  return out;
}

bool is_word(const Token& tok) { return tok.kind == TokenKind::Word || tok.kind == TokenKind::Number; }

}  // namespace

std::optional<double> overlap_score(const PreparedDocument& doc, OverlapKind kind, Scope scope) {
  std::vector<SentenceSets> sets;
  sets.reserve(doc.sentences.size());
  for (const auto& s : doc.sentences) sets.push_back(sentence_sets(s));
  return mean_over_pairs(sets.size(), scope, [&](std::size_t i, std::size_t j) { return pair_score(sets[i], sets[j], kind); });
}

std::optional<double> mean_pair_cosine(const std::vector<std::vector<double>>& emb, Scope scope) {
  return mean_over_pairs(emb.size(), scope, [&](std::size_t i, std::size_t j) { return cosine_similarity(emb[i], emb[j]); });
}

std::optional<double> lsa_overlap(const PreparedDocument& doc, const LsaSpace& space, Scope scope) {
  return mean_pair_cosine(embeddings(doc, space), scope);
}

std::optional<double> given_new_score(const std::vector<std::vector<double>>& emb) {
  if (emb.size() < 2) return std::nullopt;
  const bool any_given = std::any_of(emb.begin(), emb.end() - 1, [](const std::vector<double>& v) { return norm2(v) > 0; });
  if (!any_given) return std::nullopt;

  std::vector<std::vector<double>> basis;
  const auto extend_basis = [&](const std::vector<double>& v) {
    const double vn = norm2(v);
    if (vn == 0.0) return;
    auto r = v;
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& q : basis) kernels::axpy(-kernels::dot(q, r), q, r);
    }
    const double rn = norm2(r);
    if (rn <= 1e-10 * vn) return;
    for (auto& x : r) x /= rn;
    basis.push_back(std::move(r));
  };

  extend_basis(emb[0]);
  double total = 0.0;
  for (std::size_t i = 1; i < emb.size(); ++i) {
    const auto& v = emb[i];
    const double vn = norm2(v);
    double score = 0.0;
    if (vn > 0.0) {
      std::vector<double> g(v.size(), 0.0);
      for (const auto& q : basis) kernels::axpy(kernels::dot(q, v), q, g);
      std::vector<double> resid = v;
      kernels::axpy(-1.0, g, resid);
      double gn = norm2(g);
      double rn = norm2(resid);
      if (gn <= 1e-12 * vn) gn = 0.0;
      if (rn <= 1e-12 * vn) rn = 0.0;
      score = gn / (gn + rn);
    }
    total += score;
    extend_basis(v);
  }
  return total / static_cast<double>(emb.size() - 1);
}

std::optional<double> lsa_given_new(const PreparedDocument& doc, const LsaSpace& space) {
  return given_new_score(embeddings(doc, space));
}

double incidence(const PreparedDocument& doc, const std::vector<std::string>& categories, Basis basis) {
  std::size_t words = 0, hits = 0;
  for (const auto& s : doc.sentences) {
    for (const auto& tok : s.tokens) {
      if (!is_word(tok)) continue;
      ++words;
      if (std::any_of(categories.begin(), categories.end(), [&](const std::string& c) { return tok.has_category_family(c); })) {
        ++hits;
      }
    }
  }
  if (words == 0) throw data_error("EmptyDocument", "document '" + doc.id + "' has no word tokens");
  const double scale = basis == Basis::Per1000Words ? 1000.0 : 100.0;
  return scale * static_cast<double>(hits) / static_cast<double>(words);
}

CoverageMean norm_mean(const PreparedDocument& doc, const NormsTable& norms, NormField field, WordSubset subset) {
  std::size_t size = 0;
  std::vector<double> values;
  for (const auto& s : doc.sentences) {
    for (const auto& tok : s.tokens) {
      if (tok.kind != TokenKind::Word) continue;
      if (subset == WordSubset::ContentWords && !tok.is_content) continue;
      ++size;
      const auto* n = norms.find(tok.lower);
      if (!n) continue;
      const double v = field == NormField::Concreteness ? n->concreteness : n->imageability;
      if (!std::isnan(v)) values.push_back(v);
    }
  }
  CoverageMean out;
  if (size == 0 || values.empty()) return out;
  out.mean = order_free_mean(values);
  out.coverage = static_cast<double>(values.size()) / static_cast<double>(size);
  return out;
}

CoverageMean log_freq_mean(const PreparedDocument& doc, const FrequencyTable& freqs) {
  std::size_t size = 0;
  std::vector<double> values;
  for (const auto& s : doc.sentences) {
    for (const auto& tok : s.tokens) {
      if (tok.kind != TokenKind::Word) continue;
      ++size;
      if (const auto f = freqs.log10_frequency(tok.lower)) values.push_back(*f);
    }
  }
  CoverageMean out;
  if (size == 0 || values.empty()) return out;
  out.mean = order_free_mean(values);
  out.coverage = static_cast<double>(values.size()) / static_cast<double>(size);
  return out;
}

double descriptor_value(const PreparedDocument& doc, Descriptor descriptor) {
  std::size_t words = 0, letters_words = 0, chars = 0;
  std::set<std::string> types;
  for (const auto& s : doc.sentences) {
    for (const auto& tok : s.tokens) {
      if (is_word(tok)) ++words;
      if (tok.kind == TokenKind::Word) {
        ++letters_words;
        chars += tok.surface.size();
        types.insert(tok.lower);
      }
    }
  }
  const auto ratio = [](std::size_t a, std::size_t b) { return b == 0 ? kMissing : static_cast<double>(a) / static_cast<double>(b); };
  switch (descriptor) {
    case Descriptor::WordCount: return static_cast<double>(words);
    case Descriptor::SentenceCount: return static_cast<double>(doc.sentences.size());
    case Descriptor::MeanSentenceLength: return ratio(words, doc.sentences.size());
    case Descriptor::MeanWordLength: return ratio(chars, letters_words);
    case Descriptor::TypeTokenRatio: return ratio(types.size(), letters_words);
  }
  return kMissing;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

std::vector<double> z_scores(const std::vector<double>& column) {
  const std::size_t n = column.size();
  std::vector<double> out(n, 0.0);
  if (n < 2) return out;
  const double mean = order_free_mean(column);
  std::vector<double> sq(n);
  for (std::size_t i = 0; i < n; ++i) sq[i] = (column[i] - mean) * (column[i] - mean);
  const double var = order_free_sum(sq) / static_cast<double>(n - 1);
  const double sd = std::sqrt(var);
  if (!(sd > 1e-12 * std::max(1.0, std::fabs(mean)))) return out;
  for (std::size_t i = 0; i < n; ++i) out[i] = (column[i] - mean) / sd;
  return out;
}

const std::vector<std::string>& easability_constituents(EasabilityComponent component) {
  static const std::vector<std::string> ref = {
      "cohesion.cw_overlap_adj",      "cohesion.cw_overlap_all",      "cohesion.noun_overlap_adj",
      "cohesion.noun_overlap_all",    "cohesion.argument_overlap_all", "cohesion.anaphor_overlap_adj",
      "lsa.overlap_adj"};
  static const std::vector<std::string> conn = {"incidence.connectives"};
  return component == EasabilityComponent::RefCohesion ? ref : conn;
}

EasabilityScores easability_pc(const FeatureMatrix& matrix, EasabilityComponent component) {
  const auto& names = easability_constituents(component);
  EasabilityScores out;
  out.z.assign(matrix.rows(), 0.0);
  for (const auto& name : names) {
    const long c = matrix.column_index(name);
    if (c < 0) throw data_error("MissingConstituent", "easability component needs column '" + name + "'");
    const auto z = z_scores(matrix.column(static_cast<std::size_t>(c)));
    for (std::size_t r = 0; r < matrix.rows(); ++r) out.z[r] += z[r];
  }
  for (auto& z : out.z) {
    z /= static_cast<double>(names.size());
    out.percentile.push_back(100.0 * normal_cdf(z));
  }
  return out;
}

namespace {

FeatureDef overlap_def(std::string id, std::string label, OverlapKind kind, Scope scope) {
  FeatureDef d;
  d.id = std::move(id);
  d.label = std::move(label);
  d.kind = FeatureKind::Overlap;
  d.overlap = kind;
  d.scope = scope;
  return d;
}

FeatureDef lsa_def(std::string id, std::string label, Scope scope) {
  FeatureDef d;
  d.id = std::move(id);
  d.label = std::move(label);
  d.kind = FeatureKind::LsaOverlap;
  d.scope = scope;
  return d;
}

FeatureDef incidence_def(std::string id, std::string label, std::vector<std::string> cats, Basis basis) {
  FeatureDef d;
  d.id = std::move(id);
  d.label = std::move(label);
  d.kind = FeatureKind::Incidence;
  d.categories = std::move(cats);
  d.basis = basis;
  return d;
}

FeatureDef norm_def(std::string id, std::string label, NormField field, WordSubset subset) {
  FeatureDef d;
  d.id = std::move(id);
  d.label = std::move(label);
  d.kind = FeatureKind::NormMean;
  d.field = field;
  d.subset = subset;
  return d;
}

FeatureDef easability_def(std::string id, std::string label, EasabilityComponent component, bool percentile) {
  FeatureDef d;
  d.id = std::move(id);
  d.label = std::move(label);
  d.kind = FeatureKind::Easability;
  d.component = component;
  d.percentile = percentile;
  return d;
}

FeatureDef descriptive_def(std::string id, std::string label, Descriptor descriptor) {
  FeatureDef d;
  d.id = std::move(id);
  d.label = std::move(label);
  d.kind = FeatureKind::Descriptive;
  d.descriptor = descriptor;
  return d;
}

std::vector<FeatureDef> build_catalog() {
  using B = Basis;
  std::vector<FeatureDef> c;
  c.push_back(norm_def("wordinfo.imageability_content", "imageability for content words", NormField::Imageability,
                       WordSubset::ContentWords));
  c.push_back(incidence_def("incidence.pronoun_third_plural", "third person plural pronoun incidence",
                            {"pronoun.third_plural"}, B::Per1000Words));
  c.push_back(overlap_def("cohesion.cw_overlap_all", "content word overlap of all sentences", OverlapKind::Content, Scope::All));
  c.push_back(overlap_def("cohesion.cw_overlap_adj", "content word overlap of adjacent sentences", OverlapKind::Content,
                          Scope::Adjacent));
  c.push_back(lsa_def("lsa.overlap_adj", "LSA overlap of adjacent sentences", Scope::Adjacent));
  c.push_back(lsa_def("lsa.overlap_all", "LSA overlap of all sentences", Scope::All));
  {
    FeatureDef d;
    d.id = "lsa.given_new";
    d.label = "LSA given/new of sentences";
    d.kind = FeatureKind::LsaGivenNew;
    c.push_back(d);
  }
  c.push_back(overlap_def("cohesion.noun_overlap_all", "noun overlap in all sentences", OverlapKind::Noun, Scope::All));
  c.push_back(norm_def("wordinfo.concreteness_all", "word concreteness", NormField::Concreteness, WordSubset::AllWords));
  c.push_back(norm_def("wordinfo.concreteness_content", "concreteness for content words", NormField::Concreteness,
                       WordSubset::ContentWords));
  c.push_back(incidence_def("incidence.pronoun_second", "second person pronoun incidence", {"pronoun.second"}, B::Per1000Words));
  c.push_back(overlap_def("cohesion.argument_overlap_all", "argument overlap of all sentences", OverlapKind::Argument,
                          Scope::All));
  c.push_back(overlap_def("cohesion.noun_overlap_adj", "noun overlap of adjacent sentences", OverlapKind::Noun, Scope::Adjacent));
  {
    FeatureDef d;
    d.id = "wordinfo.log_freq_all";
    d.label = "log frequency for all words";
    d.kind = FeatureKind::LogFreq;
    c.push_back(d);
  }
  c.push_back(easability_def("easability.pc_ref_cohesion_z", "referential cohesion z score",
                             EasabilityComponent::RefCohesion, false));
  c.push_back(overlap_def("cohesion.anaphor_overlap_adj", "anaphor overlap of adjacent sentences", OverlapKind::Anaphor,
                          Scope::Adjacent));
  c.push_back(incidence_def("liwc.auxverb", "auxiliary verbs", {"verb.aux"}, B::Percent));
  c.push_back(incidence_def("liwc.focuspast", "focus on past", {"focus.past"}, B::Percent));
  c.push_back(incidence_def("liwc.focuspresent", "focus on present", {"focus.present"}, B::Percent));
  c.push_back(incidence_def("liwc.focusfuture", "focus on future", {"focus.future"}, B::Percent));
  c.push_back(incidence_def("liwc.article", "articles", {"article"}, B::Percent));
  c.push_back(incidence_def("liwc.number", "numbers", {"number"}, B::Percent));
  c.push_back(incidence_def("liwc.posemo", "positive emotion", {"emotion.positive"}, B::Percent));
  c.push_back(incidence_def("liwc.cause", "causative words", {"cognition.cause"}, B::Percent));
  c.push_back(easability_def("easability.pc_connectivity_z", "text easability PC connectivity z score",
                             EasabilityComponent::Connectivity, false));

  c.push_back(incidence_def("liwc.modal", "modal verbs", {"verb.modal"}, B::Percent));
  c.push_back(incidence_def("liwc.negemo", "negative emotion", {"emotion.negative"}, B::Percent));
  c.push_back(incidence_def("liwc.insight", "insight words", {"cognition.insight"}, B::Percent));
  c.push_back(incidence_def("liwc.tentat", "tentative words", {"cognition.tentative"}, B::Percent));
  c.push_back(incidence_def("liwc.certain", "certainty words", {"cognition.certainty"}, B::Percent));
  c.push_back(incidence_def("liwc.discrep", "discrepancy words", {"cognition.discrepancy"}, B::Percent));
  c.push_back(incidence_def("liwc.i", "first person singular pronouns", {"pronoun.first_singular"}, B::Percent));
  c.push_back(incidence_def("liwc.we", "first person plural pronouns", {"pronoun.first_plural"}, B::Percent));
  c.push_back(incidence_def("liwc.shehe", "third person singular pronouns", {"pronoun.third_singular"}, B::Percent));
  c.push_back(incidence_def("liwc.prep", "prepositions", {"preposition"}, B::Percent));
  c.push_back(incidence_def("liwc.conj", "conjunctions", {"conjunction"}, B::Percent));
  c.push_back(incidence_def("liwc.negate", "negations", {"negation"}, B::Percent));
  c.push_back(incidence_def("liwc.quant", "quantifiers", {"quantifier"}, B::Percent));
  c.push_back(incidence_def("liwc.health", "health words", {"health"}, B::Percent));
  c.push_back(incidence_def("incidence.connectives", "all connectives incidence", {"connective"}, B::Per1000Words));
  c.push_back(incidence_def("incidence.connectives_causal", "causal connectives incidence", {"connective.causal"},
                            B::Per1000Words));
  c.push_back(incidence_def("incidence.connectives_additive", "additive connectives incidence", {"connective.additive"},
                            B::Per1000Words));
  c.push_back(incidence_def("incidence.connectives_adversative", "adversative connectives incidence",
                            {"connective.adversative"}, B::Per1000Words));
  c.push_back(incidence_def("incidence.connectives_temporal", "temporal connectives incidence", {"connective.temporal"},
                            B::Per1000Words));
  c.push_back(incidence_def("incidence.connectives_logical", "logical connectives incidence", {"connective.logical"},
                            B::Per1000Words));
  c.push_back(overlap_def("cohesion.argument_overlap_adj", "argument overlap of adjacent sentences", OverlapKind::Argument,
                          Scope::Adjacent));
  c.push_back(overlap_def("cohesion.anaphor_overlap_all", "anaphor overlap of all sentences", OverlapKind::Anaphor, Scope::All));
  c.push_back(norm_def("wordinfo.imageability_all", "word imageability", NormField::Imageability, WordSubset::AllWords));
  c.push_back(easability_def("easability.pc_ref_cohesion_pct", "referential cohesion", EasabilityComponent::RefCohesion, true));
  c.push_back(easability_def("easability.pc_connectivity_pct", "text easability PC connectivity percentile",
                             EasabilityComponent::Connectivity, true));
  c.push_back(descriptive_def("desc.word_count", "word count", Descriptor::WordCount));
  c.push_back(descriptive_def("desc.sentence_count", "sentence count", Descriptor::SentenceCount));
  c.push_back(descriptive_def("desc.mean_sentence_length", "mean sentence length", Descriptor::MeanSentenceLength));
  c.push_back(descriptive_def("desc.mean_word_length", "mean word length", Descriptor::MeanWordLength));
  c.push_back(descriptive_def("desc.type_token_ratio", "type-token ratio", Descriptor::TypeTokenRatio));
  return c;
}

constexpr std::size_t kDefaultCount = 25;

Basis parse_basis(const std::string& text) {
  if (text == "PER_1000_WORDS") return Basis::Per1000Words;
  if (text == "PERCENT") return Basis::Percent;
  throw config_error("ConfigInvalid", "unknown incidence basis '" + text + "'");
}

struct Computed {
  std::vector<double> values;
  std::vector<double> coverage;
};

Computed compute_document(const PreparedDocument& doc, const std::vector<FeatureDef>& defs, const LsaSpace* space,
                          const NormsTable& norms, const FrequencyTable& freqs) {
  Computed out;
  out.values.assign(defs.size(), kMissing);
  out.coverage.assign(defs.size(), kMissing);
  std::vector<std::vector<double>> emb;
  bool have_emb = false;
  const auto get_emb = [&]() -> const std::vector<std::vector<double>>& {
    if (!have_emb) {
      emb = embeddings(doc, *space);
      have_emb = true;
    }
    return emb;
  };
  const auto put = [](double& slot, std::optional<double> v) {
    if (v) slot = *v;
  };
  for (std::size_t j = 0; j < defs.size(); ++j) {
    const auto& d = defs[j];
    switch (d.kind) {
      case FeatureKind::Overlap: put(out.values[j], overlap_score(doc, d.overlap, d.scope)); break;
      case FeatureKind::LsaOverlap: put(out.values[j], mean_pair_cosine(get_emb(), d.scope)); break;
      case FeatureKind::LsaGivenNew: put(out.values[j], given_new_score(get_emb())); break;
      case FeatureKind::Incidence: out.values[j] = incidence(doc, d.categories, d.basis); break;
      case FeatureKind::NormMean: {
        const auto cm = norm_mean(doc, norms, d.field, d.subset);
        put(out.values[j], cm.mean);
        out.coverage[j] = cm.coverage;
        break;
      }
      case FeatureKind::LogFreq: {
        const auto cm = log_freq_mean(doc, freqs);
        put(out.values[j], cm.mean);
        out.coverage[j] = cm.coverage;
        break;
      }
      case FeatureKind::Descriptive: out.values[j] = descriptor_value(doc, d.descriptor); break;
      case FeatureKind::Easability: break;
    }
  }
  return out;
}

}  // namespace

const std::vector<FeatureDef>& feature_catalog() {
  static const std::vector<FeatureDef> catalog = build_catalog();
  return catalog;
}

const FeatureDef* find_feature(std::string_view id) {
  for (const auto& d : feature_catalog()) {
    if (d.id == id) return &d;
  }
  return nullptr;
}

const std::vector<std::string>& default_registry() {
  static const std::vector<std::string> ids = [] {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < kDefaultCount; ++i) out.push_back(feature_catalog()[i].id);
    return out;
  }();
  return ids;
}

const std::vector<std::string>& extended_registry() {
  static const std::vector<std::string> ids = [] {
    std::vector<std::string> out;
    for (const auto& d : feature_catalog()) out.push_back(d.id);
    return out;
  }();
  return ids;
}

std::string feature_label(std::string_view id) {
  const auto* d = find_feature(id);
  return d ? d->label : std::string(id);
}

RegistryConfig RegistryConfig::from_ids(const std::vector<std::string>& ids) {
  RegistryConfig cfg;
  for (const auto& id : ids) {
    const auto* d = find_feature(id);
    if (!d) throw config_error("UnknownFeature", "unknown feature id '" + id + "'");
    cfg.features.push_back(*d);
  }
  return cfg;
}

RegistryConfig RegistryConfig::from_json_text(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw config_error("ConfigInvalid", std::string("registry config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw config_error("ConfigInvalid", "registry config must be a JSON object");
  RegistryConfig cfg;
  try {
    const std::string name = j.value("registry", std::string("default"));
    if (name == "default") {
      cfg = defaults();
    } else if (name == "extended") {
      cfg = extended();
    } else {
      throw config_error("ConfigInvalid", "registry must be \"default\" or \"extended\"");
    }
    if (j.contains("features")) {
      cfg.features.clear();
      for (const auto& item : j.at("features")) {
        if (item.is_string()) {
          cfg.features.push_back(from_ids({item.get<std::string>()}).features[0]);
          continue;
        }
        const std::string id = item.at("id").get<std::string>();
        FeatureDef d;
        if (item.contains("categories")) {
          d = incidence_def(id, item.value("label", id), item.at("categories").get<std::vector<std::string>>(), Basis::Percent);
        } else {
          const auto* known = find_feature(id);
          if (!known) throw config_error("UnknownFeature", "unknown feature id '" + id + "'");
          d = *known;
        }
        if (item.contains("basis")) d.basis = parse_basis(item.at("basis").get<std::string>());
        if (item.contains("label")) d.label = item.at("label").get<std::string>();
        cfg.features.push_back(std::move(d));
      }
    }
    cfg.lsa_k = j.value("lsa_k", cfg.lsa_k);
    cfg.svd.exact_max_dim = j.value("svd_exact_max_dim", cfg.svd.exact_max_dim);
    cfg.workers = j.value("workers", cfg.workers);
  } catch (const nlohmann::json::exception& e) {
    throw config_error("ConfigInvalid", std::string("bad registry config: ") + e.what());
  }
  std::set<std::string> seen;
  for (const auto& d : cfg.features) {
    if (!seen.insert(d.id).second) throw config_error("ConfigInvalid", "feature '" + d.id + "' listed twice");
  }
  if (cfg.lsa_k == 0) throw config_error("ConfigInvalid", "lsa_k must be positive");
  return cfg;
}

std::string ExtractionResult::meta_json() const {
  nlohmann::ordered_json j;
  j["format_version"] = 1;
  j["lsa_rank"] = lsa_rank;
  j["columns"] = nlohmann::ordered_json::array();
  for (std::size_t c = 0; c < matrix.cols(); ++c) {
    nlohmann::ordered_json col;
    col["id"] = matrix.feature_ids[c];
    col["imputed"] = imputed[c];
    if (std::isnan(mean_coverage[c])) {
      col["mean_coverage"] = nullptr;
    } else {
      col["mean_coverage"] = mean_coverage[c];
    }
    j["columns"].push_back(col);
  }
  return j.dump(2) + "\n";
}

ExtractionResult extract_matrix(const std::vector<PreparedDocument>& corpus, const RegistryConfig& config,
                                const NormsTable& norms, const FrequencyTable& freqs, std::uint64_t seed) {
  // Working set: every non-composite registry feature plus the constituents
  // of any requested easability component.
  std::vector<FeatureDef> work;
  const auto add_work = [&](const FeatureDef& d) {
    for (const auto& w : work) {
      if (w.id == d.id) return;
    }
    work.push_back(d);
  };
  for (const auto& d : config.features) {
    if (d.kind != FeatureKind::Easability) add_work(d);
  }
  for (const auto& d : config.features) {
    if (d.kind != FeatureKind::Easability) continue;
    for (const auto& id : easability_constituents(d.component)) add_work(*find_feature(id));
  }

  const bool needs_lsa = std::any_of(work.begin(), work.end(), [](const FeatureDef& d) {
    return d.kind == FeatureKind::LsaOverlap || d.kind == FeatureKind::LsaGivenNew;
  });
  LsaSpace space;
  if (needs_lsa) space = fit_lsa(corpus, config.lsa_k, derive_seed(seed, "lsa"), config.svd);

  const std::size_t n = corpus.size();
  std::vector<Computed> rows(n);
  parallel_for(n, config.workers, [&](std::size_t i) {
    rows[i] = compute_document(corpus[i], work, needs_lsa ? &space : nullptr, norms, freqs);
  });

  std::vector<std::string> ids;
  std::vector<Label> labels;
  for (const auto& doc : corpus) {
    ids.push_back(doc.id);
    labels.push_back(doc.label);
  }
  std::vector<std::string> work_ids;
  for (const auto& d : work) work_ids.push_back(d.id);
  FeatureMatrix work_raw(ids, labels, work_ids);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < work.size(); ++c) work_raw.at(r, c) = rows[r].values[c];
  }
  FeatureMatrix work_imputed = work_raw;
  std::vector<std::size_t> work_imputed_count(work.size(), 0);
  std::vector<double> work_coverage(work.size(), kMissing);
  for (std::size_t c = 0; c < work.size(); ++c) {
    std::vector<double> present, cov;
    for (std::size_t r = 0; r < n; ++r) {
      if (!is_missing(work_raw.at(r, c))) present.push_back(work_raw.at(r, c));
      if (!is_missing(rows[r].coverage[c])) cov.push_back(rows[r].coverage[c]);
    }
    const double fill = order_free_mean(present);
    for (std::size_t r = 0; r < n; ++r) {
      if (is_missing(work_imputed.at(r, c))) {
        work_imputed.at(r, c) = fill;
        ++work_imputed_count[c];
      }
    }
    if (!cov.empty()) work_coverage[c] = order_free_mean(cov);
  }

  ExtractionResult out;
  std::vector<std::string> out_ids;
  for (const auto& d : config.features) out_ids.push_back(d.id);
  out.matrix = FeatureMatrix(ids, labels, out_ids);
  out.raw = FeatureMatrix(ids, labels, out_ids);
  out.imputed.assign(out_ids.size(), 0);
  out.mean_coverage.assign(out_ids.size(), kMissing);
  out.lsa_rank = space.rank();
  for (std::size_t c = 0; c < config.features.size(); ++c) {
    const auto& d = config.features[c];
    if (d.kind == FeatureKind::Easability) {
      const auto pc = easability_pc(work_imputed, d.component);
      const auto& vals = d.percentile ? pc.percentile : pc.z;
      for (std::size_t r = 0; r < n; ++r) {
        out.matrix.at(r, c) = vals[r];
        out.raw.at(r, c) = vals[r];
      }
      continue;
    }
    const auto wc = static_cast<std::size_t>(work_raw.column_index(d.id));
    for (std::size_t r = 0; r < n; ++r) {
      out.matrix.at(r, c) = work_imputed.at(r, wc);
      out.raw.at(r, c) = work_raw.at(r, wc);
    }
    out.imputed[c] = work_imputed_count[wc];
    out.mean_coverage[c] = work_coverage[wc];
  }
  return out;
}

}  // namespace textimpact
