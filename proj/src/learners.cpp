#include "textimpact/learners.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "textimpact/error.hpp"
#include "textimpact/kernels.hpp"
#include "textimpact/parallel.hpp"
#include "textimpact/textio.hpp"

namespace textimpact {

namespace {

constexpr int kFormatVersion = 1;

void require_trainable(const FeatureMatrix& x) {
  if (x.rows() == 0) throw data_error("EmptyTrainingSet", "no training rows");
  if (x.has_missing()) throw data_error("MissingValues", "training matrix contains MISSING values");
}

// Column-major standardized copy with population moments. Constant columns
// keep scale 1 and become all zero.
struct Standardized {
  std::vector<std::vector<double>> cols;
  std::vector<double> means;
  std::vector<double> scales;
  std::vector<double> y_centered;
  double y_mean = 0.0;
};

Standardized standardize(const FeatureMatrix& x) {
  const std::size_t n = x.rows(), p = x.cols();
  Standardized s;
  s.cols.assign(p, std::vector<double>(n));
  s.means.assign(p, 0.0);
  s.scales.assign(p, 1.0);
  const double dn = static_cast<double>(n);
  for (std::size_t j = 0; j < p; ++j) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += x.at(i, j);
    const double mean = sum / dn;
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) ss += (x.at(i, j) - mean) * (x.at(i, j) - mean);
    const double sd = std::sqrt(ss / dn);
    const double scale = sd > 0 ? sd : 1.0;
    s.means[j] = mean;
    s.scales[j] = scale;
    for (std::size_t i = 0; i < n; ++i) s.cols[j][i] = sd > 0 ? (x.at(i, j) - mean) / scale : 0.0;
  }
  const auto y = x.label_codes();
  double ysum = 0.0;
  for (int v : y) ysum += v;
  s.y_mean = ysum / dn;
  s.y_centered.resize(n);
  for (std::size_t i = 0; i < n; ++i) s.y_centered[i] = y[i] - s.y_mean;
  return s;
}

LinearModel linear_from_standardized(LinearKind kind, const FeatureMatrix& x, const Standardized& s, const std::vector<double>& theta, double lambda) {
  LinearModel m;
  m.kind = kind;
  m.features = x.feature_ids;
  m.lambda = lambda;
  m.means = s.means;
  m.scales = s.scales;
  m.weights.resize(theta.size());
  double shift = 0.0;
  for (std::size_t j = 0; j < theta.size(); ++j) {
    m.weights[j] = theta[j] / s.scales[j];
    shift += m.weights[j] * s.means[j];
  }
  m.intercept = s.y_mean - shift;
  return m;
}

// In-place Cholesky of a row-major SPD matrix, then solve a x = b.
bool cholesky_solve(std::vector<double> a, std::size_t n, std::vector<double>& b) {
  double max_diag = 0.0;
  for (std::size_t i = 0; i < n; ++i) max_diag = std::max(max_diag, a[i * n + i]);
  const double floor = std::max(max_diag, 1.0) * 1e-12;
  for (std::size_t j = 0; j < n; ++j) {
    double d = a[j * n + j];
    for (std::size_t k = 0; k < j; ++k) d -= a[j * n + k] * a[j * n + k];
    if (!(d > floor)) return false;
    const double l = std::sqrt(d);
    a[j * n + j] = l;
    for (std::size_t i = j + 1; i < n; ++i) {
      double v = a[i * n + j];
      for (std::size_t k = 0; k < j; ++k) v -= a[i * n + k] * a[j * n + k];
      a[i * n + j] = v / l;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    double v = b[i];
    for (std::size_t k = 0; k < i; ++k) v -= a[i * n + k] * b[k];
    b[i] = v / a[i * n + i];
  }
  for (std::size_t i = n; i-- > 0;) {
    double v = b[i];
    for (std::size_t k = i + 1; k < n; ++k) v -= a[k * n + i] * b[k];
    b[i] = v / a[i * n + i];
  }
  return true;
}

double soft_threshold(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

double lasso_objective(const std::vector<double>& r, const std::vector<double>& w, double lambda) {
  const double n = static_cast<double>(r.size());
  double l1 = 0.0;
  for (double v : w) l1 += std::fabs(v);
  return kernels::squared_norm(r) / (2.0 * n) + lambda * l1;
}

}  // namespace

Prediction prediction_from_score(double score) {
  const double s = std::clamp(score, 0.0, 1.0);
  return {s >= 0.5 ? Label::High : Label::Moderate, s};
}

std::vector<std::size_t> align_columns(const FeatureMatrix& matrix, const std::vector<std::string>& features) {
  std::vector<std::size_t> idx;
  idx.reserve(features.size());
  for (const auto& f : features) {
    const long c = matrix.column_index(f);
    if (c < 0) throw data_error("UnknownFeature", "matrix has no column '" + f + "'");
    idx.push_back(static_cast<std::size_t>(c));
  }
  return idx;
}

// ---------------------------------------------------------------- linear

double LinearModel::raw_score(const double* row) const {
  double s = intercept;
  for (std::size_t j = 0; j < weights.size(); ++j) s += weights[j] * row[j];
  return s;
}

Prediction LinearModel::predict_row(const double* row) const { return prediction_from_score(raw_score(row)); }

LinearModel fit_ridge(const FeatureMatrix& x, double lambda) {
  require_trainable(x);
  if (x.rows() < 2) throw data_error("EmptyTrainingSet", "ridge needs at least 2 rows");
  if (!(lambda >= 0)) throw config_error("ConfigInvalid", "ridge lambda must be >= 0");
  const auto s = standardize(x);
  const std::size_t p = x.cols();
  const double n = static_cast<double>(x.rows());
  std::vector<double> gram(p * p);
  std::vector<double> rhs(p);
  for (std::size_t a = 0; a < p; ++a) {
    for (std::size_t b = a; b < p; ++b) {
      const double v = kernels::dot(s.cols[a], s.cols[b]) / n;
      gram[a * p + b] = v;
      gram[b * p + a] = v;
    }
    gram[a * p + a] += lambda;
    rhs[a] = kernels::dot(s.cols[a], s.y_centered) / n;
  }
  if (!cholesky_solve(gram, p, rhs)) {
    throw numerical_error("SingularSystem", "ridge normal equations are singular; use lambda > 0");
  }
  return linear_from_standardized(LinearKind::Ridge, x, s, rhs, lambda);
}

LinearModel fit_lasso(const FeatureMatrix& x, double lambda, const LassoOptions& options) {
  require_trainable(x);
  if (x.rows() < 2) throw data_error("EmptyTrainingSet", "lasso needs at least 2 rows");
  if (!(lambda >= 0)) throw config_error("ConfigInvalid", "lasso lambda must be >= 0");
  const auto s = standardize(x);
  const std::size_t p = x.cols();
  const double n = static_cast<double>(x.rows());
  std::vector<double> z(p);
  for (std::size_t j = 0; j < p; ++j) z[j] = kernels::squared_norm(s.cols[j]) / n;
  std::vector<double> w(p, 0.0);
  std::vector<double> r = s.y_centered;
  std::vector<double> trace;
  if (options.record_objective) trace.push_back(lasso_objective(r, w, lambda));

  std::size_t iter = 0;
  double change = 0.0;
  bool converged = false;
  while (iter < options.max_iter) {
    ++iter;
    change = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
      if (z[j] == 0.0) continue;
      const double rho = kernels::dot(s.cols[j], r) / n + z[j] * w[j];
      const double updated = soft_threshold(rho, lambda) / z[j];
      const double d = updated - w[j];
      if (d != 0.0) {
        kernels::axpy(-d, s.cols[j], r);
        w[j] = updated;
        change = std::max(change, std::fabs(d));
      }
    }
    if (options.record_objective) trace.push_back(lasso_objective(r, w, lambda));
    if (change <= options.tol) {
      converged = true;
      break;
    }
  }
  auto m = linear_from_standardized(LinearKind::Lasso, x, s, w, lambda);
  m.iterations = iter;
  m.final_change = change;
  m.converged = converged;
  m.objective_trace = std::move(trace);
  return m;
}

// ---------------------------------------------------------------- trees

double TreeNode::gini() const {
  if (n == 0) return 0.0;
  const double dn = static_cast<double>(n);
  const double a = static_cast<double>(counts[0]) / dn, b = static_cast<double>(counts[1]) / dn;
  return 1.0 - a * a - b * b;
}

const TreeNode& TreeModel::leaf_for(const double* row) const {
  std::size_t i = 0;
  while (!nodes[i].is_leaf()) {
    const auto& node = nodes[i];
    i = static_cast<std::size_t>(row[node.feature] <= node.threshold ? node.left : node.right);
  }
  return nodes[i];
}

std::size_t TreeModel::leaf_count() const {
  return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

int TreeModel::depth() const {
  int d = 0;
  for (const auto& n : nodes) d = std::max(d, n.depth);
  return d;
}

std::vector<double> TreeModel::split_importance() const {
  std::vector<double> imp(features.size(), 0.0);
  for (const auto& n : nodes) {
    if (!n.is_leaf()) imp[static_cast<std::size_t>(n.feature)] += n.decrease;
  }
  return imp;
}

namespace {

using Int = __int128;

struct SplitScore {
  // Purity of a split is sum_c L_c^2 / NL + sum_c R_c^2 / NR = num / den.
  Int num = 0;
  Int den = 1;
};

bool better(const SplitScore& a, const SplitScore& b) { return a.num * b.den > b.num * a.den; }

class TreeBuilder {
 public:
  TreeBuilder(const FeatureMatrix& x, const std::vector<std::uint32_t>& weights, const TreeParams& params, Rng* rng)
      : x_(x), w_(weights), params_(params), rng_(rng), y_(x.label_codes()) {
    for (auto v : weights) total_ += v;
  }

  TreeModel build() {
    TreeModel tree;
    tree.features = x_.feature_ids;
    tree.params = params_;
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < x_.rows(); ++i) {
      if (w_[i] > 0) rows.push_back(i);
    }
    if (rows.empty()) throw data_error("EmptyTrainingSet", "tree has no weighted rows");
    grow(tree, rows, 0);
    return tree;
  }

 private:
  int grow(TreeModel& tree, const std::vector<std::size_t>& rows, int depth) {
    TreeNode node;
    node.depth = depth;
    for (auto i : rows) {
      node.counts[static_cast<std::size_t>(y_[i])] += w_[i];
      node.n += w_[i];
    }
    const int index = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back(node);

    const bool pure = node.counts[0] == 0 || node.counts[1] == 0;
    const bool depth_done = params_.max_depth > 0 && depth >= params_.max_depth;
    if (pure || depth_done || node.n < params_.min_samples_split) return index;

    int best_feature = -1;
    double best_threshold = 0.0;
    SplitScore best;
    const Int c0 = node.counts[0], c1 = node.counts[1], cn = node.n;
    // A split must beat the parent's own purity strictly.
    best.num = c0 * c0 + c1 * c1;
    best.den = cn;
    std::vector<std::pair<double, std::size_t>> sorted(rows.size());
    for (std::size_t f : candidate_features()) {
      for (std::size_t k = 0; k < rows.size(); ++k) sorted[k] = {x_.at(rows[k], f), rows[k]};
      std::sort(sorted.begin(), sorted.end());
      Int l0 = 0, l1 = 0;
      for (std::size_t k = 0; k + 1 < sorted.size(); ++k) {
        const auto i = sorted[k].second;
        (y_[i] == 1 ? l1 : l0) += w_[i];
        if (sorted[k].first == sorted[k + 1].first) continue;
        const Int nl = l0 + l1, r0 = c0 - l0, r1 = c1 - l1, nr = r0 + r1;
        SplitScore s{(l0 * l0 + l1 * l1) * nr + (r0 * r0 + r1 * r1) * nl, nl * nr};
        if (better(s, best)) {
          best = s;
          best_feature = static_cast<int>(f);
          best_threshold = midpoint(sorted[k].first, sorted[k + 1].first);
        }
      }
    }
    if (best_feature < 0) return index;

    std::vector<std::size_t> left, right;
    for (auto i : rows) (x_.at(i, static_cast<std::size_t>(best_feature)) <= best_threshold ? left : right).push_back(i);
    const double purity_parent = static_cast<double>(c0 * c0 + c1 * c1) / static_cast<double>(cn);
    const double purity_split = static_cast<double>(best.num) / static_cast<double>(best.den);
    const double decrease = (purity_split - purity_parent) / static_cast<double>(total_);
    if (decrease < params_.min_impurity_decrease) return index;

    tree.nodes[static_cast<std::size_t>(index)].feature = best_feature;
    tree.nodes[static_cast<std::size_t>(index)].threshold = best_threshold;
    tree.nodes[static_cast<std::size_t>(index)].decrease = decrease;
    const int l = grow(tree, left, depth + 1);
    const int r = grow(tree, right, depth + 1);
    tree.nodes[static_cast<std::size_t>(index)].left = l;
    tree.nodes[static_cast<std::size_t>(index)].right = r;
    return index;
  }

  static double midpoint(double a, double b) {
    const double m = a + (b - a) / 2.0;
    return m < b ? m : a;
  }

  std::vector<std::size_t> candidate_features() {
    const std::size_t p = x_.cols();
    std::vector<std::size_t> all(p);
    std::iota(all.begin(), all.end(), 0);
    if (params_.mtry == 0 || params_.mtry >= p || rng_ == nullptr) return all;
    for (std::size_t k = 0; k < params_.mtry; ++k) std::swap(all[k], all[k + rng_->uniform_index(p - k)]);
    all.resize(params_.mtry);
    std::sort(all.begin(), all.end());
    return all;
  }

  const FeatureMatrix& x_;
  const std::vector<std::uint32_t>& w_;
  const TreeParams& params_;
  Rng* rng_;
  std::vector<int> y_;
  std::uint64_t total_ = 0;
};

// Leaf cost sum and leaf count of the subtree at i.
void subtree_cost(const TreeModel& t, std::size_t i, double root_n, double& cost, std::size_t& leaves) {
  const auto& n = t.nodes[i];
  if (n.is_leaf()) {
    cost += static_cast<double>(n.n) / root_n * n.gini();
    ++leaves;
    return;
  }
  subtree_cost(t, static_cast<std::size_t>(n.left), root_n, cost, leaves);
  subtree_cost(t, static_cast<std::size_t>(n.right), root_n, cost, leaves);
}

void copy_subtree(const TreeModel& from, std::size_t i, TreeModel& to, int& out_index) {
  out_index = static_cast<int>(to.nodes.size());
  to.nodes.push_back(from.nodes[i]);
  const auto& n = from.nodes[i];
  if (n.is_leaf()) return;
  int l = -1, r = -1;
  copy_subtree(from, static_cast<std::size_t>(n.left), to, l);
  copy_subtree(from, static_cast<std::size_t>(n.right), to, r);
  to.nodes[static_cast<std::size_t>(out_index)].left = l;
  to.nodes[static_cast<std::size_t>(out_index)].right = r;
}

}  // namespace

TreeModel fit_tree_weighted(const FeatureMatrix& x, const std::vector<std::uint32_t>& weights, const TreeParams& params, Rng* rng) {
  require_trainable(x);
  if (weights.size() != x.rows()) throw data_error("LengthMismatch", "one weight per training row required");
  auto tree = TreeBuilder(x, weights, params, rng).build();
  if (params.ccp_alpha > 0) prune_tree(tree, params.ccp_alpha);
  return tree;
}

TreeModel fit_tree(const FeatureMatrix& x, const TreeParams& params) {
  return fit_tree_weighted(x, std::vector<std::uint32_t>(x.rows(), 1), params, nullptr);
}

void prune_tree(TreeModel& tree, double ccp_alpha) {
  if (tree.nodes.empty()) return;
  const double root_n = static_cast<double>(tree.nodes[0].n);
  while (true) {
    double best_g = std::numeric_limits<double>::infinity();
    std::size_t best = 0;
    for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
      const auto& n = tree.nodes[i];
      if (n.is_leaf()) continue;
      double cost = 0.0;
      std::size_t leaves = 0;
      subtree_cost(tree, i, root_n, cost, leaves);
      const double own = static_cast<double>(n.n) / root_n * n.gini();
      const double g = (own - cost) / static_cast<double>(leaves - 1);
      if (g < best_g) {
        best_g = g;
        best = i;
      }
    }
    if (!(best_g <= ccp_alpha)) break;
    auto& n = tree.nodes[best];
    n.feature = -1;
    n.threshold = 0.0;
    n.decrease = 0.0;
    n.left = n.right = -1;
    // The detached descendants are dropped by copying the reachable nodes.
    TreeModel compact;
    int root = 0;
    copy_subtree(tree, 0, compact, root);
    tree.nodes = std::move(compact.nodes);
  }
}

double ForestModel::score_row(const double* row) const {
  double s = 0.0;
  for (const auto& t : trees) s += t.score_row(row);
  return trees.empty() ? 0.0 : s / static_cast<double>(trees.size());
}

ForestModel fit_forest(const FeatureMatrix& x, const ForestParams& params, std::uint64_t seed) {
  require_trainable(x);
  if (x.rows() < 2) throw data_error("EmptyTrainingSet", "forest needs at least 2 rows");
  if (params.n_trees == 0) throw config_error("ConfigInvalid", "forest needs at least one tree");
  const std::size_t n = x.rows(), p = x.cols();
  ForestModel forest;
  forest.features = x.feature_ids;
  forest.params = params;
  forest.seed = seed;
  forest.params.mtry = params.mtry == 0 ? std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(p))))) : params.mtry;
  forest.params.tree.mtry = forest.params.mtry;
  forest.trees.resize(params.n_trees);
  forest.out_of_bag.resize(params.n_trees);
  parallel_for(params.n_trees, params.workers, [&](std::size_t t) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
    std::vector<std::uint32_t> weights(n, 1);
    if (params.bootstrap) {
      std::fill(weights.begin(), weights.end(), 0);
      for (std::size_t k = 0; k < n; ++k) ++weights[rng.uniform_index(n)];
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (weights[i] == 0) forest.out_of_bag[t].push_back(static_cast<std::uint32_t>(i));
    }
    forest.trees[t] = fit_tree_weighted(x, weights, forest.params.tree, &rng);
  });
  return forest;
}

std::vector<std::pair<std::string, double>> gini_importance(const ForestModel& forest) {
  std::vector<double> imp(forest.features.size(), 0.0);
  for (const auto& t : forest.trees) {
    const auto ti = t.split_importance();
    for (std::size_t j = 0; j < imp.size(); ++j) imp[j] += ti[j];
  }
  double total = 0.0;
  for (double v : imp) total += v;
  std::vector<std::pair<std::string, double>> out;
  for (std::size_t j = 0; j < imp.size(); ++j) out.emplace_back(forest.features[j], total > 0 ? imp[j] / total : 0.0);
  return out;
}

// ---------------------------------------------------------------- any model

std::string_view family_name(ModelFamily family) noexcept {
  switch (family) {
    case ModelFamily::Ridge: return "ridge";
    case ModelFamily::Lasso: return "lasso";
    case ModelFamily::Tree: return "tree";
    case ModelFamily::Forest: return "forest";
  }
  return "?";
}

ModelFamily parse_family(std::string_view name) {
  for (auto f : all_families()) {
    if (family_name(f) == name) return f;
  }
  throw config_error("ConfigInvalid", "unknown model family '" + std::string(name) + "'");
}

const std::vector<ModelFamily>& all_families() {
  static const std::vector<ModelFamily> f = {ModelFamily::Ridge, ModelFamily::Lasso, ModelFamily::Tree, ModelFamily::Forest};
  return f;
}

ModelFamily family_of(const Model& model) {
  if (const auto* lm = std::get_if<LinearModel>(&model)) return lm->kind == LinearKind::Ridge ? ModelFamily::Ridge : ModelFamily::Lasso;
  if (std::holds_alternative<TreeModel>(model)) return ModelFamily::Tree;
  return ModelFamily::Forest;
}

const std::vector<std::string>& model_features(const Model& model) {
  return std::visit([](const auto& m) -> const std::vector<std::string>& { return m.features; }, model);
}

std::vector<Prediction> predict(const Model& model, const FeatureMatrix& x) {
  const auto idx = align_columns(x, model_features(model));
  std::vector<double> row(idx.size());
  std::vector<Prediction> out;
  out.reserve(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t j = 0; j < idx.size(); ++j) row[j] = x.at(r, idx[j]);
    out.push_back(std::visit([&](const auto& m) { return m.predict_row(row.data()); }, model));
  }
  return out;
}

double ModelSpec::complexity() const {
  constexpr double inf = std::numeric_limits<double>::infinity();
  switch (family) {
    case ModelFamily::Ridge:
    case ModelFamily::Lasso: return lambda > 0 ? 1.0 / lambda : inf;
    case ModelFamily::Tree: return tree.max_depth > 0 ? tree.max_depth : inf;
    case ModelFamily::Forest: return static_cast<double>(forest.n_trees);
  }
  return inf;
}

namespace {

nlohmann::ordered_json tree_params_json(const TreeParams& t) {
  return {{"max_depth", t.max_depth},
          {"min_samples_split", t.min_samples_split},
          {"min_impurity_decrease", t.min_impurity_decrease},
          {"ccp_alpha", t.ccp_alpha}};
}

void read_tree_params(const nlohmann::json& j, TreeParams& t, const std::string& key) {
  if (key == "max_depth") {
    t.max_depth = j.get<int>();
  } else if (key == "min_samples_split") {
    t.min_samples_split = j.get<std::size_t>();
  } else if (key == "min_impurity_decrease") {
    t.min_impurity_decrease = j.get<double>();
  } else if (key == "ccp_alpha") {
    t.ccp_alpha = j.get<double>();
  } else {
    throw config_error("ConfigInvalid", "unknown model parameter '" + key + "'");
  }
}

}  // namespace

nlohmann::ordered_json ModelSpec::params_json() const {
  switch (family) {
    case ModelFamily::Ridge: return {{"lambda", lambda}};
    case ModelFamily::Lasso: return {{"lambda", lambda}, {"tol", lasso.tol}, {"max_iter", lasso.max_iter}};
    case ModelFamily::Tree: return tree_params_json(tree);
    case ModelFamily::Forest: {
      auto j = tree_params_json(forest.tree);
      j["n_trees"] = forest.n_trees;
      j["mtry"] = forest.mtry;
      j["bootstrap"] = forest.bootstrap;
      return j;
    }
  }
  return {};
}

ModelSpec ModelSpec::from_json(ModelFamily family, const nlohmann::json& params) {
  ModelSpec s;
  s.family = family;
  if (!params.is_object()) throw config_error("ConfigInvalid", "model parameters must be an object");
  try {
    for (const auto& [key, value] : params.items()) {
      switch (family) {
        case ModelFamily::Ridge:
          if (key != "lambda") throw config_error("ConfigInvalid", "unknown ridge parameter '" + key + "'");
          s.lambda = value.get<double>();
          break;
        case ModelFamily::Lasso:
          if (key == "lambda") {
            s.lambda = value.get<double>();
          } else if (key == "tol") {
            s.lasso.tol = value.get<double>();
          } else if (key == "max_iter") {
            s.lasso.max_iter = value.get<std::size_t>();
          } else {
            throw config_error("ConfigInvalid", "unknown lasso parameter '" + key + "'");
          }
          break;
        case ModelFamily::Tree: read_tree_params(value, s.tree, key); break;
        case ModelFamily::Forest:
          if (key == "n_trees") {
            s.forest.n_trees = value.get<std::size_t>();
          } else if (key == "mtry") {
            s.forest.mtry = value.get<std::size_t>();
          } else if (key == "bootstrap") {
            s.forest.bootstrap = value.get<bool>();
          } else {
            read_tree_params(value, s.forest.tree, key);
          }
          break;
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw config_error("ConfigInvalid", std::string("bad model parameter: ") + e.what());
  }
  if ((family == ModelFamily::Ridge || family == ModelFamily::Lasso) && !(s.lambda >= 0)) {
    throw config_error("ConfigInvalid", "lambda must be >= 0");
  }
  return s;
}

Model fit_model(const ModelSpec& spec, const FeatureMatrix& x, std::uint64_t seed) {
  switch (spec.family) {
    case ModelFamily::Ridge: return fit_ridge(x, spec.lambda);
    case ModelFamily::Lasso: return fit_lasso(x, spec.lambda, spec.lasso);
    case ModelFamily::Tree: return fit_tree(x, spec.tree);
    case ModelFamily::Forest: return fit_forest(x, spec.forest, seed);
  }
  throw config_error("ConfigInvalid", "unknown model family");
}

// ---------------------------------------------------------------- JSON

namespace {

using ojson = nlohmann::ordered_json;

ojson node_json(const TreeModel& t, std::size_t i) {
  const auto& n = t.nodes[i];
  ojson j;
  j["n"] = n.n;
  j["counts"] = {{"HIGH", n.counts[1]}, {"MODERATE", n.counts[0]}};
  if (!n.is_leaf()) {
    j["feature"] = t.features[static_cast<std::size_t>(n.feature)];
    j["threshold"] = n.threshold;
    j["decrease"] = n.decrease;
    j["left"] = node_json(t, static_cast<std::size_t>(n.left));
    j["right"] = node_json(t, static_cast<std::size_t>(n.right));
  }
  return j;
}

ojson tree_json(const TreeModel& t) {
  ojson j;
  j["features"] = t.features;
  j["params"] = tree_params_json(t.params);
  j["params"]["mtry"] = t.params.mtry;
  j["root"] = node_json(t, 0);
  return j;
}

int read_node(const nlohmann::json& j, TreeModel& t, int depth) {
  TreeNode n;
  n.depth = depth;
  n.n = j.at("n").get<std::uint64_t>();
  n.counts[1] = j.at("counts").at("HIGH").get<std::uint64_t>();
  n.counts[0] = j.at("counts").at("MODERATE").get<std::uint64_t>();
  const int index = static_cast<int>(t.nodes.size());
  t.nodes.push_back(n);
  if (j.contains("feature")) {
    const auto name = j.at("feature").get<std::string>();
    const auto it = std::find(t.features.begin(), t.features.end(), name);
    if (it == t.features.end()) throw data_error("Malformed", "tree splits on unknown feature '" + name + "'");
    auto& node = t.nodes[static_cast<std::size_t>(index)];
    node.feature = static_cast<int>(it - t.features.begin());
    node.threshold = j.at("threshold").get<double>();
    node.decrease = j.at("decrease").get<double>();
    const int l = read_node(j.at("left"), t, depth + 1);
    const int r = read_node(j.at("right"), t, depth + 1);
    t.nodes[static_cast<std::size_t>(index)].left = l;
    t.nodes[static_cast<std::size_t>(index)].right = r;
  }
  return index;
}

TreeParams read_tree_params_object(const nlohmann::json& j) {
  TreeParams p;
  p.max_depth = j.at("max_depth").get<int>();
  p.min_samples_split = j.at("min_samples_split").get<std::size_t>();
  p.min_impurity_decrease = j.at("min_impurity_decrease").get<double>();
  p.ccp_alpha = j.at("ccp_alpha").get<double>();
  p.mtry = j.value("mtry", std::size_t{0});
  return p;
}

TreeModel read_tree(const nlohmann::json& j) {
  TreeModel t;
  t.features = j.at("features").get<std::vector<std::string>>();
  t.params = read_tree_params_object(j.at("params"));
  read_node(j.at("root"), t, 0);
  return t;
}

}  // namespace

std::string model_to_json_text(const Model& model) {
  ojson j;
  j["format_version"] = kFormatVersion;
  j["model"] = std::string(family_name(family_of(model)));
  if (const auto* lm = std::get_if<LinearModel>(&model)) {
    j["lambda"] = lm->lambda;
    j["intercept"] = lm->intercept;
    j["weights"] = ojson::object();
    j["means"] = ojson::object();
    j["scales"] = ojson::object();
    for (std::size_t k = 0; k < lm->features.size(); ++k) {
      j["weights"][lm->features[k]] = lm->weights[k];
      j["means"][lm->features[k]] = lm->means[k];
      j["scales"][lm->features[k]] = lm->scales[k];
    }
    if (lm->kind == LinearKind::Lasso) {
      j["iterations"] = lm->iterations;
      j["final_change"] = lm->final_change;
      j["converged"] = lm->converged;
    }
  } else if (const auto* tm = std::get_if<TreeModel>(&model)) {
    j["tree"] = tree_json(*tm);
  } else {
    const auto& fm = std::get<ForestModel>(model);
    j["features"] = fm.features;
    j["seed"] = fm.seed;
    j["params"] = tree_params_json(fm.params.tree);
    j["params"]["n_trees"] = fm.params.n_trees;
    j["params"]["mtry"] = fm.params.mtry;
    j["params"]["bootstrap"] = fm.params.bootstrap;
    j["trees"] = ojson::array();
    for (const auto& t : fm.trees) j["trees"].push_back(tree_json(t));
    j["out_of_bag"] = fm.out_of_bag;
  }
  return j.dump(2) + "\n";
}

Model model_from_json_text(std::string_view text) {
  try {
    const auto j = ojson::parse(text);
    if (j.at("format_version").get<int>() != kFormatVersion) throw data_error("Malformed", "unsupported model format_version");
    const auto family = parse_family(j.at("model").get<std::string>());
    switch (family) {
      case ModelFamily::Ridge:
      case ModelFamily::Lasso: {
        LinearModel m;
        m.kind = family == ModelFamily::Ridge ? LinearKind::Ridge : LinearKind::Lasso;
        m.lambda = j.at("lambda").get<double>();
        m.intercept = j.at("intercept").get<double>();
        for (const auto& [name, w] : j.at("weights").items()) {
          m.features.push_back(name);
          m.weights.push_back(w.get<double>());
          m.means.push_back(j.at("means").at(name).get<double>());
          m.scales.push_back(j.at("scales").at(name).get<double>());
        }
        if (m.kind == LinearKind::Lasso) {
          m.iterations = j.at("iterations").get<std::size_t>();
          m.final_change = j.at("final_change").get<double>();
          m.converged = j.at("converged").get<bool>();
        }
        return m;
      }
      case ModelFamily::Tree: return read_tree(j.at("tree"));
      case ModelFamily::Forest: {
        ForestModel f;
        f.features = j.at("features").get<std::vector<std::string>>();
        f.seed = j.at("seed").get<std::uint64_t>();
        const auto& p = j.at("params");
        f.params.tree = read_tree_params_object(p);
        f.params.n_trees = p.at("n_trees").get<std::size_t>();
        f.params.mtry = p.at("mtry").get<std::size_t>();
        f.params.bootstrap = p.at("bootstrap").get<bool>();
        for (const auto& t : j.at("trees")) f.trees.push_back(read_tree(t));
        f.out_of_bag = j.at("out_of_bag").get<std::vector<std::vector<std::uint32_t>>>();
        if (f.trees.size() != f.params.n_trees) throw data_error("Malformed", "forest tree count does not match n_trees");
        return f;
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw data_error("Malformed", std::string("bad model JSON: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::ConfigInvalid) throw data_error("Malformed", e.what());
    throw;
  }
  throw data_error("Malformed", "bad model JSON");
}

void save_model(const Model& model, const std::filesystem::path& path) { textio::write_file_atomic(path, model_to_json_text(model)); }

Model load_model(const std::filesystem::path& path) { return model_from_json_text(textio::read_file(path)); }

}  // namespace textimpact
