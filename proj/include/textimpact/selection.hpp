#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "textimpact/matrix.hpp"

namespace textimpact {

struct Discretization {
  std::vector<int> bins;
  int bin_count = 0;
  bool constant = false;
};

// Equal-frequency bins. Cutpoints are the sorted values at ranks
// ceil(i*n/B) for i = 1..B-1 (deduplicated); a value's bin is the number of
// cutpoints strictly below it. Identical values always share a bin.
Discretization discretize(const std::vector<double>& column, int bins);

struct ChiSquareResult {
  double statistic = 0.0;
  double p_value = 1.0;
  int dof = 0;
};
// Upper tail of the chi-square distribution, Q(dof/2, x/2).
double chi_square_sf(double x, double dof);
// counts[bin][class]; empty rows and columns are ignored.
ChiSquareResult chi_square_counts(const std::vector<std::vector<double>>& counts);
ChiSquareResult chi_square(const std::vector<double>& column, const std::vector<int>& labels, int bins = 4);

struct MannWhitneyResult {
  double u = 0.0;
  double z = 0.0;
  double p_two_sided = 1.0;
  bool exact = false;
};
// U counts pairs with a_i > b_j, ties as one half. z uses the tie-corrected
// variance and a continuity correction. With no ties and |a|*|b| <= 200 the
// p-value comes from the exact null distribution.
MannWhitneyResult mann_whitney(const std::vector<double>& a, const std::vector<double>& b);
// Exact two-sided p for a tie-free U statistic.
double mann_whitney_exact_p(double u, std::size_t na, std::size_t nb);

// Entropy in bits of a discrete label vector.
double entropy_bits(const std::vector<int>& labels);
double info_gain_bins(const std::vector<int>& bins, const std::vector<int>& labels);
double info_gain(const std::vector<double>& column, const std::vector<int>& labels, int bins = 4);

// ReliefF weights in matrix column order. Features are min-max scaled,
// distances are Manhattan, and k is clipped to what each class can supply.
// m = 0 visits every instance once in a seeded order.
std::vector<double> relieff(const FeatureMatrix& matrix, int k, std::size_t m, std::uint64_t seed);

enum class Method { Chi2, Mwu, InfoGain, Relieff };
std::string_view method_name(Method method) noexcept;
std::optional<Method> parse_method(std::string_view name);
const std::vector<Method>& all_methods();

struct MethodScore {
  std::string feature;
  double statistic = 0.0;
  std::optional<double> p_value;
  int rank = 0;
};

struct MethodTable {
  Method method;
  std::vector<MethodScore> scores;  // feature order of the input matrix
};

enum class Aggregation { Borda, Vote };

struct SelectionParams {
  int bins = 4;
  int relieff_k = 10;
  std::size_t relieff_m = 0;
  std::size_t top_k = 25;
  Aggregation mode = Aggregation::Borda;
  // Vote mode: a feature needs this many methods ranking it within top_k.
  int min_votes = 2;
};

struct AggregateEntry {
  std::string feature;
  double mean_rank = 0.0;
  int votes = 0;
};

struct SelectionReport {
  std::vector<MethodTable> methods;
  std::vector<AggregateEntry> aggregate;  // ascending mean rank
  std::vector<std::string> selected;
  SelectionParams params;
  std::uint64_t seed = 0;

  std::string to_json_text() const;
  static SelectionReport from_json_text(std::string_view text);
};

// Ranks by descending relevance statistic (chi2, |z|, bits, weight), ties by
// feature id.
MethodTable score_method(const FeatureMatrix& matrix, Method method, const SelectionParams& params, std::uint64_t seed);
void assign_ranks(MethodTable& table);

// Borda: mean rank across methods, keep the top_k smallest, ties by feature
// id. Throws MethodMissing unless all four methods are present over the same
// feature set.
SelectionReport aggregate(std::vector<MethodTable> methods, const SelectionParams& params);

SelectionReport select_features(const FeatureMatrix& matrix, const SelectionParams& params, std::uint64_t seed);

}  // namespace textimpact
