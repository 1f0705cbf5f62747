#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "textimpact/label.hpp"
#include "textimpact/learners.hpp"
#include "textimpact/matrix.hpp"

namespace textimpact {

struct SplitPlan {
  std::vector<std::size_t> train;  // ascending
  std::vector<std::size_t> test;   // ascending
  double ratio = 0.8;
  std::uint64_t seed = 0;
  bool single_class = false;
};

// Shuffles each class with its own seeded stream. The training side gets
// floor(ratio * n) rows (at least 1 and at most n - 1 when n >= 2): each
// class contributes floor(ratio * n_c) and any leftover seat goes to the
// class with the largest remainder.
SplitPlan stratified_holdout(const std::vector<Label>& labels, double ratio, std::uint64_t seed);

struct FoldPlan {
  std::vector<std::vector<std::size_t>> folds;  // test rows per fold, ascending
  std::uint64_t seed = 0;

  std::size_t k() const noexcept { return folds.size(); }
  std::vector<std::size_t> train_rows(std::size_t fold) const;
};

// Seeded per-class shuffle, then round-robin over folds. The next class
// continues from the fold where the previous class stopped, so fold sizes
// also differ by at most one. Throws KTooLarge when k > n.
FoldPlan stratified_kfold(const std::vector<Label>& labels, std::size_t k, std::uint64_t seed);

std::vector<std::size_t> bootstrap_indices(std::size_t n, std::uint64_t seed);

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  double threshold = 0.0;  // +inf for the (0, 0) point
};

// Positive class is HIGH. Throws DegenerateLabels unless both classes occur.
std::vector<RocPoint> roc(const std::vector<double>& scores, const std::vector<Label>& labels);
double auc(const std::vector<RocPoint>& points);
// U / (n+ n-) with ties counted one half.
double auc_rank(const std::vector<double>& scores, const std::vector<Label>& labels);

// counts[observed][predicted], indexed by label code (0 MODERATE, 1 HIGH).
struct ConfusionMatrix {
  std::array<std::array<std::size_t, 2>, 2> counts{};

  // Percent of each predicted-class column; a column with no predictions is 0.
  double column_percent(Label observed, Label predicted) const;
};

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
};

struct EvalReport {
  std::string model;
  std::uint64_t seed = 0;
  std::size_t n = 0;
  double accuracy = 0.0;
  std::array<ClassMetrics, 2> per_class{};  // by label code
  // Support-weighted averages of the per-class values.
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  // NaN when the labels hold a single class.
  double auc = 0.0;
  std::vector<RocPoint> roc_points;
  ConfusionMatrix confusion;
  nlohmann::ordered_json provenance = nlohmann::ordered_json::object();

  nlohmann::ordered_json to_json() const;
  static EvalReport from_json(const nlohmann::json& j);
};

// Throws LengthMismatch for unequal or empty inputs.
EvalReport evaluate(const std::vector<Prediction>& predictions, const std::vector<Label>& labels);

struct CvRow {
  ModelSpec spec;
  std::vector<double> fold_accuracy;
  std::vector<double> fold_auc;  // NaN for a single-class fold
  double mean_accuracy = 0.0;
  double mean_auc = 0.0;  // over folds with a defined AUC
};

struct TuneResult {
  std::vector<CvRow> table;  // declaration order
  std::size_t best = 0;
  Model model;
};

// Scores every grid point on every fold of `train`, picks the highest mean
// accuracy (then higher mean AUC, then lower complexity, then earlier
// declaration) and refits on `refit_rows` of `train` (every row when empty).
// Fold fits use derive_seed(seed, point * k + fold); the refit uses
// derive_seed(seed, "refit").
TuneResult grid_tune(const std::vector<ModelSpec>& grid, const FeatureMatrix& train, const FoldPlan& folds, std::uint64_t seed,
                     unsigned workers = 1, const std::vector<std::size_t>& refit_rows = {});

}  // namespace textimpact
