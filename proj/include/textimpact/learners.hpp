#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"
#include "textimpact/label.hpp"
#include "textimpact/matrix.hpp"
#include "textimpact/random.hpp"

namespace textimpact {

// score is the estimated probability of HIGH; label is HIGH when score >= 0.5.
struct Prediction {
  Label label = Label::Moderate;
  double score = 0.0;
};
Prediction prediction_from_score(double score);

// Column index in `matrix` for each name in `features`; throws UnknownFeature.
std::vector<std::size_t> align_columns(const FeatureMatrix& matrix, const std::vector<std::string>& features);

// ---------------------------------------------------------------- linear

enum class LinearKind { Ridge, Lasso };

struct LassoOptions {
  double tol = 1e-6;
  std::size_t max_iter = 10000;
  // Keep the objective after every sweep (used to check monotone descent).
  bool record_objective = false;
};

// Regression on {0,1} labels. Weights are in original feature units, so the
// raw score is intercept + sum_j weights[j] * x[j].
struct LinearModel {
  LinearKind kind = LinearKind::Ridge;
  std::vector<std::string> features;
  std::vector<double> weights;
  double intercept = 0.0;
  double lambda = 0.0;
  std::vector<double> means;
  std::vector<double> scales;
  // Coordinate descent metadata; ridge leaves the defaults.
  std::size_t iterations = 0;
  double final_change = 0.0;
  bool converged = true;
  std::vector<double> objective_trace;

  double raw_score(const double* row) const;
  Prediction predict_row(const double* row) const;
};

// Minimizes (1/2n)||y - b - Xs t||^2 + (lambda/2)||t||^2 over standardized
// features Xs; the intercept is not penalized. Throws SingularSystem when the
// penalized Gram matrix is not positive definite (only possible at lambda 0).
LinearModel fit_ridge(const FeatureMatrix& x, double lambda);

// Cyclic coordinate descent with soft thresholding on
// (1/2n)||y - b - Xs w||^2 + lambda ||w||_1. A run that hits max_iter returns
// with converged = false.
LinearModel fit_lasso(const FeatureMatrix& x, double lambda, const LassoOptions& options = {});

// ---------------------------------------------------------------- trees

struct TreeParams {
  int max_depth = 0;  // 0: unlimited
  std::size_t min_samples_split = 2;
  double min_impurity_decrease = 0.0;
  double ccp_alpha = 0.0;
  std::size_t mtry = 0;  // features tried per split; 0 or >= p: all
};

struct TreeNode {
  int feature = -1;  // -1 for a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  std::array<std::uint64_t, 2> counts{0, 0};  // indexed by label code
  std::uint64_t n = 0;
  int depth = 0;
  // Weighted Gini decrease of this split as a fraction of the training weight.
  double decrease = 0.0;

  bool is_leaf() const noexcept { return feature < 0; }
  double gini() const;
  double high_fraction() const { return n == 0 ? 0.0 : static_cast<double>(counts[1]) / static_cast<double>(n); }
};

// Nodes in preorder with the root at index 0. Rows go left when
// value <= threshold.
struct TreeModel {
  std::vector<std::string> features;
  std::vector<TreeNode> nodes;
  TreeParams params;

  const TreeNode& leaf_for(const double* row) const;
  double score_row(const double* row) const { return leaf_for(row).high_fraction(); }
  Prediction predict_row(const double* row) const { return prediction_from_score(score_row(row)); }
  std::size_t leaf_count() const;
  int depth() const;
  // Sum of split decreases per feature, unnormalized.
  std::vector<double> split_importance() const;
};

TreeModel fit_tree(const FeatureMatrix& x, const TreeParams& params);
// Sample i counts weights[i] times (bootstrap multiplicities). rng is used
// only when params.mtry selects a strict subset of features.
TreeModel fit_tree_weighted(const FeatureMatrix& x, const std::vector<std::uint32_t>& weights, const TreeParams& params, Rng* rng);
// Minimal cost-complexity pruning with cost R(t) = n(t)/n(root) * gini(t).
void prune_tree(TreeModel& tree, double ccp_alpha);

struct ForestParams {
  std::size_t n_trees = 20;
  std::size_t mtry = 0;  // 0: floor(sqrt(p))
  bool bootstrap = true;
  TreeParams tree;
  unsigned workers = 1;
};

struct ForestModel {
  std::vector<std::string> features;
  std::vector<TreeModel> trees;
  ForestParams params;
  std::uint64_t seed = 0;
  std::vector<std::vector<std::uint32_t>> out_of_bag;  // per tree, ascending rows

  double score_row(const double* row) const;
  Prediction predict_row(const double* row) const { return prediction_from_score(score_row(row)); }
};

// Tree t draws from Rng(derive_seed(seed, t)), so the forest does not depend
// on the worker count or training order.
ForestModel fit_forest(const FeatureMatrix& x, const ForestParams& params, std::uint64_t seed);

// Mean split importance over trees normalized to sum 1, in feature order.
// All zero when no tree has a split.
std::vector<std::pair<std::string, double>> gini_importance(const ForestModel& forest);

// ---------------------------------------------------------------- any model

enum class ModelFamily { Ridge, Lasso, Tree, Forest };
std::string_view family_name(ModelFamily family) noexcept;
ModelFamily parse_family(std::string_view name);
const std::vector<ModelFamily>& all_families();

using Model = std::variant<LinearModel, TreeModel, ForestModel>;

ModelFamily family_of(const Model& model);
const std::vector<std::string>& model_features(const Model& model);
// Columns are matched by feature id, so extra or reordered columns are fine.
std::vector<Prediction> predict(const Model& model, const FeatureMatrix& x);

// One hyperparameter point for a family.
struct ModelSpec {
  ModelFamily family = ModelFamily::Ridge;
  double lambda = 1.0;
  LassoOptions lasso;
  TreeParams tree;
  ForestParams forest;

  // Smaller is simpler: 1/lambda, max_depth (0 counts as unlimited), n_trees.
  double complexity() const;
  nlohmann::ordered_json params_json() const;
  // Reads only the keys relevant to `family`; unknown keys are ConfigInvalid.
  static ModelSpec from_json(ModelFamily family, const nlohmann::json& params);
};

Model fit_model(const ModelSpec& spec, const FeatureMatrix& x, std::uint64_t seed);

std::string model_to_json_text(const Model& model);
Model model_from_json_text(std::string_view text);
void save_model(const Model& model, const std::filesystem::path& path);
Model load_model(const std::filesystem::path& path);

}  // namespace textimpact
