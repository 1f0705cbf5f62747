#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <cstring>
#include <functional>

#include "textimpact/error.hpp"
#include "textimpact/learners.hpp"
#include "textimpact/random.hpp"

using namespace textimpact;

namespace {

FeatureMatrix make_matrix(const std::vector<int>& y, const std::vector<std::vector<double>>& cols, std::vector<std::string> names = {}) {
  std::vector<std::string> ids;
  std::vector<Label> labels;
  for (std::size_t i = 0; i < y.size(); ++i) {
    ids.push_back("d" + std::to_string(i));
    labels.push_back(label_from_code(y[i]));
  }
  if (names.empty()) {
    for (std::size_t c = 0; c < cols.size(); ++c) names.push_back("f" + std::to_string(c));
  }
  FeatureMatrix m(ids, labels, names);
  for (std::size_t c = 0; c < cols.size(); ++c) {
    for (std::size_t r = 0; r < y.size(); ++r) m.at(r, c) = cols[c][r];
  }
  return m;
}

// Noisy linear problem with p features.
FeatureMatrix random_problem(std::uint64_t seed, std::size_t n, std::size_t p, double noise = 1.0) {
  Rng rng(seed);
  std::vector<std::vector<double>> cols(p, std::vector<double>(n));
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
      cols[j][i] = rng.uniform(-1, 1) * static_cast<double>(j + 1);
      s += cols[j][i] / static_cast<double>(j + 1) * (j % 2 == 0 ? 1.0 : -0.5);
    }
    y[i] = s + noise * rng.uniform(-1, 1) > 0 ? 1 : 0;
  }
  return make_matrix(y, cols);
}

// OLS with intercept in original units via Eigen's QR.
Eigen::VectorXd ols(const FeatureMatrix& m) {
  Eigen::MatrixXd a(m.rows(), m.cols() + 1);
  Eigen::VectorXd y(m.rows());
  const auto codes = m.label_codes();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    a(static_cast<Eigen::Index>(i), 0) = 1.0;
    for (std::size_t j = 0; j < m.cols(); ++j) a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j + 1)) = m.at(i, j);
    y(static_cast<Eigen::Index>(i)) = codes[i];
  }
  return a.colPivHouseholderQr().solve(y);
}

// Columns of an 8-point Hadamard design: mean 0, population SD 1, orthogonal.
std::vector<std::vector<double>> hadamard_columns() {
  std::vector<std::vector<double>> cols(3, std::vector<double>(8));
  for (int i = 0; i < 8; ++i) {
    for (int j = 0; j < 3; ++j) cols[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] = ((i >> j) & 1) ? 1.0 : -1.0;
  }
  return cols;
}

const std::vector<int> kHadamardLabels = {1, 1, 1, 0, 1, 0, 0, 0};

std::vector<double> ols_orthonormal(const std::vector<std::vector<double>>& cols, const std::vector<int>& y) {
  double ybar = 0;
  for (int v : y) ybar += v;
  ybar /= static_cast<double>(y.size());
  std::vector<double> w;
  for (const auto& c : cols) {
    double s = 0;
    for (std::size_t i = 0; i < y.size(); ++i) s += c[i] * (y[i] - ybar);
    w.push_back(s / static_cast<double>(y.size()));
  }
  return w;
}

std::string code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return "";
}

double accuracy(const std::vector<Prediction>& p, const FeatureMatrix& m) {
  std::size_t ok = 0;
  for (std::size_t i = 0; i < p.size(); ++i) ok += p[i].label == m.labels[i];
  return static_cast<double>(ok) / static_cast<double>(p.size());
}

bool same_scores(const std::vector<Prediction>& a, const std::vector<Prediction>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].label != b[i].label || std::memcmp(&a[i].score, &b[i].score, sizeof(double)) != 0) return false;
  }
  return true;
}

}  // namespace

TEST(Prediction, TieGoesHigh) {
  EXPECT_EQ(prediction_from_score(0.5).label, Label::High);
  EXPECT_EQ(prediction_from_score(0.4999).label, Label::Moderate);
  EXPECT_EQ(prediction_from_score(1.7).score, 1.0);
  EXPECT_EQ(prediction_from_score(-0.2).score, 0.0);
}

TEST(Ridge, LambdaZeroMatchesOls) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto m = random_problem(seed, 60, 4);
    const auto model = fit_ridge(m, 0.0);
    const auto beta = ols(m);
    EXPECT_NEAR(model.intercept, beta(0), 1e-8);
    for (std::size_t j = 0; j < 4; ++j) EXPECT_NEAR(model.weights[j], beta(static_cast<Eigen::Index>(j + 1)), 1e-8);
  }
}

TEST(Ridge, OrthonormalShrinkage) {
  const auto cols = hadamard_columns();
  const auto m = make_matrix(kHadamardLabels, cols);
  const auto w_ols = ols_orthonormal(cols, kHadamardLabels);
  for (double lambda : {0.0, 0.5, 1.0, 3.0}) {
    const auto model = fit_ridge(m, lambda);
    for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(model.weights[j], w_ols[j] / (1.0 + lambda), 1e-14);
  }
}

TEST(Ridge, HugePenaltyGivesPrevalence) {
  const auto m = random_problem(7, 50, 3);
  const auto model = fit_ridge(m, 1e12);
  double prevalence = 0.0;
  for (int v : m.label_codes()) prevalence += v;
  prevalence /= 50.0;
  for (double w : model.weights) EXPECT_LT(std::fabs(w), 1e-6);
  EXPECT_NEAR(model.intercept, prevalence, 1e-6);
}

TEST(Ridge, NormShrinksWithLambda) {
  const auto m = random_problem(8, 80, 5);
  double prev = std::numeric_limits<double>::infinity();
  for (double lambda : {0.0, 0.01, 0.1, 1.0, 10.0, 100.0}) {
    const auto model = fit_ridge(m, lambda);
    double norm = 0.0;
    for (std::size_t j = 0; j < model.weights.size(); ++j) norm += std::pow(model.weights[j] * model.scales[j], 2);
    EXPECT_LE(norm, prev);
    prev = norm;
  }
}

TEST(Ridge, SingularAtLambdaZero) {
  const auto base = random_problem(9, 20, 2);
  const auto m = make_matrix(base.label_codes(), {base.column(0), base.column(0)});
  try {
    fit_ridge(m, 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "SingularSystem");
    EXPECT_EQ(e.kind(), ErrorKind::NumericalError);
  }
  EXPECT_NO_THROW(fit_ridge(m, 0.1));
}

TEST(Lasso, OrthonormalSoftThreshold) {
  const auto cols = hadamard_columns();
  const auto m = make_matrix(kHadamardLabels, cols);
  const auto w_ols = ols_orthonormal(cols, kHadamardLabels);
  std::size_t prev_nonzero = 4;
  for (double lambda : {0.0, 0.1, 0.2, 0.25, 0.3, 1.0}) {
    const auto model = fit_lasso(m, lambda);
    EXPECT_TRUE(model.converged);
    std::size_t nonzero = 0;
    for (std::size_t j = 0; j < 3; ++j) {
      const double expected = std::copysign(std::max(0.0, std::fabs(w_ols[j]) - lambda), w_ols[j]);
      EXPECT_NEAR(model.weights[j], expected, 1e-12) << lambda;
      nonzero += model.weights[j] != 0.0;
    }
    EXPECT_LE(nonzero, prev_nonzero);
    prev_nonzero = nonzero;
  }
  for (double w : fit_lasso(m, 1.0).weights) EXPECT_EQ(w, 0.0);
}

TEST(Lasso, LambdaZeroMatchesOls) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto m = random_problem(seed, 60, 4);
    const auto model = fit_lasso(m, 0.0);
    EXPECT_TRUE(model.converged);
    const auto beta = ols(m);
    EXPECT_NEAR(model.intercept, beta(0), 1e-6);
    for (std::size_t j = 0; j < 4; ++j) EXPECT_NEAR(model.weights[j], beta(static_cast<Eigen::Index>(j + 1)), 1e-6);
  }
}

TEST(Lasso, KktBoundZerosEverything) {
  const auto m = random_problem(11, 70, 5);
  // lambda_max = max_j |Xs_j^T (y - ybar)| / n on the standardized design.
  const auto y = m.label_codes();
  double ybar = 0;
  for (int v : y) ybar += v;
  ybar /= 70.0;
  double lambda_max = 0.0;
  for (std::size_t j = 0; j < 5; ++j) {
    const auto c = m.column(j);
    double mean = 0, ss = 0, dot = 0;
    for (double v : c) mean += v;
    mean /= 70.0;
    for (double v : c) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / 70.0);
    for (std::size_t i = 0; i < 70; ++i) dot += (c[i] - mean) / sd * (y[i] - ybar);
    lambda_max = std::max(lambda_max, std::fabs(dot) / 70.0);
  }
  const auto at = fit_lasso(m, lambda_max * (1 + 1e-12));
  for (double w : at.weights) EXPECT_EQ(w, 0.0);
  EXPECT_NEAR(at.intercept, ybar, 1e-15);
  const auto below = fit_lasso(m, lambda_max * 0.9);
  EXPECT_GT(std::count_if(below.weights.begin(), below.weights.end(), [](double w) { return w != 0.0; }), 0);
}

TEST(Lasso, ObjectiveNeverIncreases) {
  const auto m = random_problem(12, 90, 6, 0.5);
  LassoOptions opts;
  opts.record_objective = true;
  for (double lambda : {0.0, 0.01, 0.05}) {
    const auto model = fit_lasso(m, lambda, opts);
    ASSERT_GE(model.objective_trace.size(), 2u);
    for (std::size_t k = 1; k < model.objective_trace.size(); ++k) {
      EXPECT_LE(model.objective_trace[k], model.objective_trace[k - 1] + 1e-15);
    }
  }
}

TEST(Lasso, NotConvergedIsReported) {
  const auto base = random_problem(13, 40, 2);
  auto c = base.column(0);
  auto d = c;
  for (auto& v : d) v = v * 0.999 + 0.001;
  d[0] += 0.01;
  const auto m = make_matrix(base.label_codes(), {c, d, base.column(1)});
  LassoOptions opts;
  opts.max_iter = 2;
  opts.tol = 1e-14;
  const auto model = fit_lasso(m, 0.0, opts);
  EXPECT_FALSE(model.converged);
  EXPECT_EQ(model.iterations, 2u);
  EXPECT_GT(model.final_change, opts.tol);
}

TEST(Tree, OneDimensionalExample) {
  const auto m = make_matrix({0, 0, 1, 1}, {{0, 1, 2, 3}});
  const auto t = fit_tree(m, {});
  ASSERT_EQ(t.nodes.size(), 3u);
  EXPECT_EQ(t.nodes[0].feature, 0);
  EXPECT_EQ(t.nodes[0].threshold, 1.5);
  EXPECT_EQ(t.depth(), 1);
  EXPECT_EQ(accuracy(predict(t, m), m), 1.0);
  EXPECT_DOUBLE_EQ(t.nodes[0].decrease, 0.5);
}

TEST(Tree, SingleClassIsOneLeaf) {
  const auto m = make_matrix({1, 1, 1}, {{0, 5, 2}});
  const auto t = fit_tree(m, {});
  EXPECT_EQ(t.nodes.size(), 1u);
  EXPECT_EQ(t.score_row(m.row_ptr(0)), 1.0);
  EXPECT_EQ(code_of([] { fit_tree(FeatureMatrix({}, {}, {"x"}), {}); }), "EmptyTrainingSet");
}

TEST(Tree, RootSplitMatchesBruteForce) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    const std::size_t n = 6 + rng.uniform_index(10), p = 3;
    std::vector<std::vector<double>> cols(p, std::vector<double>(n));
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = static_cast<int>(rng.uniform_index(2));
      for (auto& c : cols) c[i] = std::floor(rng.uniform(0, 5));
    }
    y[0] = 0;
    y[1] = 1;
    const auto m = make_matrix(y, cols);
    TreeParams params;
    params.max_depth = 1;
    const auto t = fit_tree(m, params);
    // Exhaustive search over features and midpoints, first best wins.
    const auto gini = [](double a, double b) { return a + b == 0 ? 0.0 : 1 - std::pow(a / (a + b), 2) - std::pow(b / (a + b), 2); };
    double p0 = 0, p1 = 0;
    for (int v : y) (v ? p1 : p0) += 1;
    double best = 1e-12;
    int best_f = -1;
    double best_t = 0;
    for (std::size_t f = 0; f < p; ++f) {
      auto vals = cols[f];
      std::sort(vals.begin(), vals.end());
      vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
      for (std::size_t k = 0; k + 1 < vals.size(); ++k) {
        const double thr = (vals[k] + vals[k + 1]) / 2;
        double l0 = 0, l1 = 0;
        for (std::size_t i = 0; i < n; ++i) {
          if (cols[f][i] <= thr) (y[i] ? l1 : l0) += 1;
        }
        const double r0 = p0 - l0, r1 = p1 - l1;
        const double dec = gini(p0, p1) - ((l0 + l1) * gini(l0, l1) + (r0 + r1) * gini(r0, r1)) / static_cast<double>(n);
        if (dec > best + 1e-12) {
          best = dec;
          best_f = static_cast<int>(f);
          best_t = thr;
        }
      }
    }
    EXPECT_EQ(t.nodes[0].feature, best_f) << seed;
    if (best_f >= 0) {
      EXPECT_EQ(t.nodes[0].threshold, best_t) << seed;
      EXPECT_NEAR(t.nodes[0].decrease, best, 1e-12) << seed;
    }
  }
}

TEST(Tree, StructuralInvariants) {
  const auto m = random_problem(20, 150, 5, 1.5);
  for (int depth : {0, 2, 4}) {
    TreeParams params;
    params.max_depth = depth;
    params.min_samples_split = 4;
    const auto t = fit_tree(m, params);
    if (depth > 0) {
      EXPECT_LE(t.depth(), depth);
    }
    for (const auto& node : t.nodes) {
      if (node.is_leaf()) continue;
      const auto& l = t.nodes[static_cast<std::size_t>(node.left)];
      const auto& r = t.nodes[static_cast<std::size_t>(node.right)];
      EXPECT_EQ(l.n + r.n, node.n);
      EXPECT_EQ(l.counts[0] + r.counts[0], node.counts[0]);
      EXPECT_EQ(l.depth, node.depth + 1);
      EXPECT_EQ(r.depth, node.depth + 1);
      EXPECT_GT(node.decrease, 0.0);
      EXPECT_GE(node.n, 4u);
    }
  }
  TreeParams params;
  params.min_impurity_decrease = 0.01;
  for (const auto& node : fit_tree(m, params).nodes) {
    if (!node.is_leaf()) {
      EXPECT_GE(node.decrease, 0.01);
    }
  }
}

TEST(Tree, PruningShrinksMonotonically) {
  const auto m = random_problem(21, 200, 5, 2.0);
  std::size_t prev = fit_tree(m, {}).nodes.size();
  for (double alpha : {0.0005, 0.002, 0.01, 0.05, 1.0}) {
    TreeParams params;
    params.ccp_alpha = alpha;
    const auto t = fit_tree(m, params);
    EXPECT_LE(t.nodes.size(), prev);
    prev = t.nodes.size();
    for (std::size_t i = 0; i < t.nodes.size(); ++i) {
      const auto& node = t.nodes[i];
      if (node.is_leaf()) continue;
      EXPECT_LT(static_cast<std::size_t>(node.left), t.nodes.size());
      EXPECT_EQ(t.nodes[static_cast<std::size_t>(node.left)].n + t.nodes[static_cast<std::size_t>(node.right)].n, node.n);
    }
  }
  EXPECT_EQ(prev, 1u);
}

TEST(Forest, ReducesToSingleTree) {
  const auto m = random_problem(30, 120, 4, 1.0);
  ForestParams params;
  params.n_trees = 1;
  params.bootstrap = false;
  params.mtry = 4;
  params.tree.max_depth = 5;
  const auto forest = fit_forest(m, params, 99);
  const auto tree = fit_tree(m, params.tree);
  EXPECT_TRUE(same_scores(predict(forest, m), predict(tree, m)));
  EXPECT_TRUE(forest.out_of_bag[0].empty());
}

TEST(Forest, ScoreIsMeanOfTrees) {
  const auto m = random_problem(31, 100, 6, 1.0);
  const auto forest = fit_forest(m, {}, 5);
  ASSERT_EQ(forest.trees.size(), 20u);
  EXPECT_EQ(forest.params.mtry, 2u);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    double s = 0;
    for (const auto& t : forest.trees) s += t.score_row(m.row_ptr(r));
    EXPECT_EQ(forest.score_row(m.row_ptr(r)), s / 20.0);
  }
}

TEST(Forest, DeterministicAcrossWorkers) {
  const auto m = random_problem(32, 100, 6, 1.0);
  ForestParams params;
  params.workers = 1;
  const auto a = model_to_json_text(fit_forest(m, params, 17));
  params.workers = 4;
  const auto b = model_to_json_text(fit_forest(m, params, 17));
  EXPECT_EQ(a, b);
  EXPECT_NE(a, model_to_json_text(fit_forest(m, params, 18)));
}

TEST(Forest, BeatsPrunedTreeOnSeparableData) {
  Rng rng(33);
  std::vector<std::vector<double>> cols(3, std::vector<double>(120));
  std::vector<int> y(120);
  for (std::size_t i = 0; i < 120; ++i) {
    for (auto& c : cols) c[i] = rng.uniform(-1, 1);
    y[i] = cols[0][i] + cols[1][i] - 0.5 * cols[2][i] > 0;
  }
  const auto m = make_matrix(y, cols);
  TreeParams pruned;
  pruned.ccp_alpha = 0.01;
  ForestParams params;
  params.n_trees = 50;
  EXPECT_GE(accuracy(predict(fit_forest(m, params, 3), m), m), accuracy(predict(fit_tree(m, pruned), m), m));
}

TEST(Forest, GiniImportance) {
  // Only the first feature carries signal and the second is constant.
  const auto m = make_matrix({0, 0, 0, 1, 1, 1}, {{1, 2, 3, 4, 5, 6}, {7, 7, 7, 7, 7, 7}});
  ForestParams params;
  params.mtry = 2;
  const auto imp = gini_importance(fit_forest(m, params, 1));
  EXPECT_EQ(imp[0].first, "f0");
  EXPECT_EQ(imp[0].second, 1.0);
  EXPECT_EQ(imp[1].second, 0.0);

  const auto big = random_problem(34, 150, 5, 1.0);
  double total = 0;
  for (const auto& [f, v] : gini_importance(fit_forest(big, {}, 2))) {
    EXPECT_GE(v, 0.0);
    total += v;
  }
  EXPECT_NEAR(total, 1.0, 1e-12);

  const auto flat = make_matrix({0, 1, 0, 1}, {{1, 1, 1, 1}});
  for (const auto& [f, v] : gini_importance(fit_forest(flat, {}, 1))) EXPECT_EQ(v, 0.0);
}

TEST(Forest, DuplicateColumnsShareImportance) {
  double diff_sum = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto base = random_problem(40 + seed, 150, 3, 1.0);
    const auto dup = make_matrix(base.label_codes(), {base.column(0), base.column(1), base.column(2), base.column(0)});
    ForestParams params;
    params.n_trees = 50;
    const auto single = gini_importance(fit_forest(base, params, seed));
    const auto shared = gini_importance(fit_forest(dup, params, seed));
    diff_sum += (shared[0].second + shared[3].second) - single[0].second;
    EXPECT_GT(shared[0].second, 0.0);
    EXPECT_GT(shared[3].second, 0.0);
  }
  EXPECT_LT(std::fabs(diff_sum / 10.0), 0.1);
}

TEST(ModelJson, RoundTripKeepsPredictionsExact) {
  const auto m = random_problem(50, 80, 4, 1.0);
  ModelSpec ridge{ModelFamily::Ridge, 0.3, {}, {}, {}};
  ModelSpec lasso{ModelFamily::Lasso, 0.01, {}, {}, {}};
  ModelSpec tree{ModelFamily::Tree, 1.0, {}, {}, {}};
  tree.tree.max_depth = 4;
  ModelSpec forest{ModelFamily::Forest, 1.0, {}, {}, {}};
  forest.forest.n_trees = 7;
  for (const auto& spec : {ridge, lasso, tree, forest}) {
    const auto model = fit_model(spec, m, 3);
    EXPECT_EQ(family_of(model), spec.family);
    const auto text = model_to_json_text(model);
    const auto back = model_from_json_text(text);
    EXPECT_EQ(model_to_json_text(back), text);
    EXPECT_TRUE(same_scores(predict(model, m), predict(back, m))) << family_name(spec.family);
  }
  EXPECT_EQ(code_of([] { model_from_json_text("{\"format_version\": 1}"); }), "Malformed");
  EXPECT_EQ(code_of([] { model_from_json_text("{\"format_version\": 1, \"model\": \"svm\"}"); }), "Malformed");
}

TEST(ModelJson, PredictMatchesColumnsById) {
  const auto m = random_problem(51, 60, 3, 1.0);
  const auto model = fit_model(ModelSpec{ModelFamily::Ridge, 0.1, {}, {}, {}}, m, 1);
  const auto reordered = m.select_columns({"f2", "f0", "f1"});
  EXPECT_TRUE(same_scores(predict(model, m), predict(model, reordered)));
  EXPECT_EQ(code_of([&] { predict(model, m.select_columns({"f0", "f1"})); }), "UnknownFeature");
}

TEST(ModelSpec, ParsesAndRejects) {
  const auto s = ModelSpec::from_json(ModelFamily::Forest, nlohmann::json::parse(R"({"n_trees": 30, "max_depth": 6})"));
  EXPECT_EQ(s.forest.n_trees, 30u);
  EXPECT_EQ(s.forest.tree.max_depth, 6);
  EXPECT_EQ(s.complexity(), 30.0);
  EXPECT_EQ(ModelSpec::from_json(ModelFamily::Ridge, nlohmann::json::parse(R"({"lambda": 4})")).complexity(), 0.25);
  EXPECT_EQ(code_of([] { ModelSpec::from_json(ModelFamily::Ridge, nlohmann::json::parse(R"({"depth": 4})")); }), "ConfigInvalid");
  EXPECT_EQ(code_of([] { ModelSpec::from_json(ModelFamily::Lasso, nlohmann::json::parse(R"({"lambda": -1})")); }), "ConfigInvalid");
  EXPECT_EQ(code_of([] { parse_family("svm"); }), "ConfigInvalid");
}
