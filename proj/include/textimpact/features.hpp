#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "textimpact/corpus.hpp"
#include "textimpact/lexicon.hpp"
#include "textimpact/lsa.hpp"
#include "textimpact/matrix.hpp"

namespace textimpact {

enum class OverlapKind { Content, Noun, Argument, Anaphor };
enum class Scope { Adjacent, All };
enum class Basis { Per1000Words, Percent };
enum class NormField { Concreteness, Imageability };
enum class WordSubset { AllWords, ContentWords };
enum class EasabilityComponent { RefCohesion, Connectivity };
enum class Descriptor { WordCount, SentenceCount, MeanSentenceLength, MeanWordLength, TypeTokenRatio };

// Mean pair score over consecutive pairs (Adjacent) or all unordered pairs
// (All). Content: Dice coefficient of content-stem sets. Noun: shared
// noun-candidate stem. Argument: shared noun stem or shared pronoun.
// Anaphor: later sentence has a third-person pronoun and the earlier one a
// noun candidate. nullopt (MISSING) for fewer than two sentences.
std::optional<double> overlap_score(const PreparedDocument& doc, OverlapKind kind, Scope scope);

// Mean cosine over the pair set; a zero embedding scores 0 against anything.
std::optional<double> mean_pair_cosine(const std::vector<std::vector<double>>& embeddings, Scope scope);
std::optional<double> lsa_overlap(const PreparedDocument& doc, const LsaSpace& space, Scope scope);

// Given/new: each sentence from the second on is split into its projection
// onto the span of the preceding embeddings (g) and the residual (n), scoring
// |g| / (|g| + |n|). MISSING unless there are two sentences and a nonzero
// embedding among all but the last.
std::optional<double> given_new_score(const std::vector<std::vector<double>>& embeddings);
std::optional<double> lsa_given_new(const PreparedDocument& doc, const LsaSpace& space);

// Tokens carrying any listed category (an id, or a family such as
// "connective") per word token; NUMBER tokens count as words. Throws
// EmptyDocument when there are no word tokens.
double incidence(const PreparedDocument& doc, const std::vector<std::string>& categories, Basis basis);

struct CoverageMean {
  std::optional<double> mean;
  double coverage = 0.0;
};
CoverageMean norm_mean(const PreparedDocument& doc, const NormsTable& norms, NormField field, WordSubset subset);
CoverageMean log_freq_mean(const PreparedDocument& doc, const FrequencyTable& freqs);

double descriptor_value(const PreparedDocument& doc, Descriptor descriptor);

double normal_cdf(double z);
// Corpus z-scores with the sample standard deviation; a constant column
// gives 0 for every row. Sums run in value order so the result does not
// depend on row order.
std::vector<double> z_scores(const std::vector<double>& column);

struct EasabilityScores {
  std::vector<double> z;
  std::vector<double> percentile;
};
const std::vector<std::string>& easability_constituents(EasabilityComponent component);
// Throws MissingConstituent when a required column is absent.
EasabilityScores easability_pc(const FeatureMatrix& matrix, EasabilityComponent component);

enum class FeatureKind { Overlap, LsaOverlap, LsaGivenNew, Incidence, NormMean, LogFreq, Easability, Descriptive };

struct FeatureDef {
  std::string id;
  // Readable name used when printing decision rules.
  std::string label;
  FeatureKind kind = FeatureKind::Descriptive;
  OverlapKind overlap = OverlapKind::Content;
  Scope scope = Scope::Adjacent;
  std::vector<std::string> categories;
  Basis basis = Basis::Percent;
  NormField field = NormField::Concreteness;
  WordSubset subset = WordSubset::AllWords;
  EasabilityComponent component = EasabilityComponent::RefCohesion;
  bool percentile = false;
  Descriptor descriptor = Descriptor::WordCount;
};

// Every built-in feature, in extended-registry order.
const std::vector<FeatureDef>& feature_catalog();
const FeatureDef* find_feature(std::string_view id);
// The 25-column default registry.
const std::vector<std::string>& default_registry();
const std::vector<std::string>& extended_registry();
std::string feature_label(std::string_view id);

struct RegistryConfig {
  std::vector<FeatureDef> features;
  std::size_t lsa_k = 100;
  SvdOptions svd;
  unsigned workers = 1;

  static RegistryConfig from_ids(const std::vector<std::string>& ids);
  static RegistryConfig defaults() { return from_ids(default_registry()); }
  static RegistryConfig extended() { return from_ids(extended_registry()); }
  // {"registry": "default"|"extended", "features": [id | {id, categories,
  // basis, label}], "lsa_k": int, "workers": int}. Explicit features win
  // over the named registry.
  static RegistryConfig from_json_text(std::string_view text);
};

struct ExtractionResult {
  FeatureMatrix matrix;  // imputed, registry column order
  FeatureMatrix raw;     // before imputation (MISSING allowed)
  std::vector<std::size_t> imputed;     // per column
  std::vector<double> mean_coverage;    // per column, NaN when not a norm feature
  std::size_t lsa_rank = 0;

  std::string meta_json() const;
};

// Per-document features run on `workers` threads after the corpus-wide LSA
// fit; the output does not depend on the thread count or document order.
ExtractionResult extract_matrix(const std::vector<PreparedDocument>& corpus, const RegistryConfig& config,
                                const NormsTable& norms, const FrequencyTable& freqs, std::uint64_t seed);

}  // namespace textimpact
