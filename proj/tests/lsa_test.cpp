#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstring>

#include "textimpact/error.hpp"
#include "textimpact/features.hpp"
#include "textimpact/kernels.hpp"
#include "textimpact/random.hpp"

using namespace textimpact;

namespace {

std::vector<double> random_dense(Rng& rng, std::size_t rows, std::size_t cols) {
  std::vector<double> v(rows * cols);
  for (auto& x : v) x = rng.uniform(-1.0, 1.0);
  return v;
}

Eigen::MatrixXd to_eigen(const std::vector<double>& v, std::size_t rows, std::size_t cols) {
  Eigen::MatrixXd m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = v[r * cols + c];
  }
  return m;
}

// Squared Frobenius residual of projecting A onto the span of the left vectors.
double projection_residual(const Eigen::MatrixXd& a, const TruncatedSvd& svd) {
  Eigen::MatrixXd u(a.rows(), svd.rank());
  for (std::size_t i = 0; i < svd.rank(); ++i) {
    for (Eigen::Index r = 0; r < a.rows(); ++r) u(r, static_cast<Eigen::Index>(i)) = svd.u[i][r];
  }
  return (a - u * (u.transpose() * a)).squaredNorm();
}

bool same_bits(const TruncatedSvd& a, const TruncatedSvd& b) {
  if (a.rank() != b.rank()) return false;
  if (std::memcmp(a.sigma.data(), b.sigma.data(), a.rank() * sizeof(double)) != 0) return false;
  for (std::size_t i = 0; i < a.rank(); ++i) {
    if (std::memcmp(a.u[i].data(), b.u[i].data(), a.rows * sizeof(double)) != 0) return false;
  }
  return true;
}

const Lexicon& demo_lexicon() {
  static const Lexicon lex = Lexicon::load(TEXTIMPACT_DATA_DIR "/lexicon.tsv");
  return lex;
}

PreparedDocument doc(const std::string& id, const std::vector<std::string>& sentences) {
  return annotate(prepare_sentences(id, Label::High, sentences), demo_lexicon());
}

}  // namespace

TEST(Jacobi, MatchesEigenSelfAdjointSolver) {
  Rng rng(21);
  for (std::size_t n : {1u, 2u, 5u, 17u}) {
    const auto b = random_dense(rng, n, n);
    std::vector<double> sym(n * n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) sym[i * n + j] = b[i * n + j] + b[j * n + i];
    }
    const auto eig = jacobi_eigen(sym, n);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> oracle(to_eigen(sym, n, n));
    for (std::size_t i = 0; i < n; ++i) {
      const double expected = oracle.eigenvalues()(static_cast<Eigen::Index>(n - 1 - i));
      EXPECT_NEAR(eig.values[i], expected, 1e-12 * (1 + std::fabs(expected)));
      // A v = lambda v
      const Eigen::MatrixXd a = to_eigen(sym, n, n);
      Eigen::VectorXd v(n);
      for (std::size_t r = 0; r < n; ++r) v(r) = eig.vectors[i][r];
      EXPECT_LT((a * v - eig.values[i] * v).norm(), 1e-11);
      EXPECT_NEAR(v.norm(), 1.0, 1e-12);
    }
  }
}

TEST(TruncatedSvd, SingularValuesMatchDenseOracle) {
  Rng rng(22);
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = random_dense(rng, 20, 30);
    const auto svd = truncated_svd(SparseColumns::from_dense(a, 20, 30), 20, 1);
    Eigen::JacobiSVD<Eigen::MatrixXd> oracle(to_eigen(a, 20, 30));
    ASSERT_EQ(svd.rank(), 20u);
    for (std::size_t i = 0; i < 20; ++i) {
      const double expected = oracle.singularValues()(static_cast<Eigen::Index>(i));
      EXPECT_LE(std::fabs(svd.sigma[i] - expected), 1e-8 * expected) << trial << " " << i;
    }
    // Same on the transposed shape, which uses the column-side Gram matrix.
    std::vector<double> at(600);
    for (std::size_t r = 0; r < 20; ++r) {
      for (std::size_t c = 0; c < 30; ++c) at[c * 20 + r] = a[r * 30 + c];
    }
    const auto svd_t = truncated_svd(SparseColumns::from_dense(at, 30, 20), 20, 1);
    ASSERT_EQ(svd_t.rank(), 20u);
    for (std::size_t i = 0; i < 20; ++i) EXPECT_LE(std::fabs(svd_t.sigma[i] - svd.sigma[i]), 1e-8 * svd.sigma[i]);
  }
}

TEST(TruncatedSvd, ResidualIsOptimalForTruncation) {
  Rng rng(23);
  for (std::size_t k : {1u, 3u, 8u}) {
    const auto a = random_dense(rng, 20, 30);
    const auto e = to_eigen(a, 20, 30);
    const auto svd = truncated_svd(SparseColumns::from_dense(a, 20, 30), k, 5);
    Eigen::JacobiSVD<Eigen::MatrixXd> oracle(e);
    double best = 0.0;
    for (Eigen::Index i = static_cast<Eigen::Index>(k); i < oracle.singularValues().size(); ++i) {
      best += oracle.singularValues()(i) * oracle.singularValues()(i);
    }
    EXPECT_LE(projection_residual(e, svd), best + 1e-6);
    for (std::size_t i = 0; i + 1 < svd.rank(); ++i) EXPECT_GE(svd.sigma[i], svd.sigma[i + 1]);
  }
}

TEST(TruncatedSvd, RandomizedPathMatchesOracle) {
  // Known spectrum 0.7^i through random orthogonal factors.
  Rng rng(24);
  const std::size_t m = 40, n = 60, r = 30;
  const Eigen::MatrixXd p = to_eigen(random_dense(rng, m, r), m, r).householderQr().householderQ() * Eigen::MatrixXd::Identity(m, r);
  const Eigen::MatrixXd q = to_eigen(random_dense(rng, n, r), n, r).householderQr().householderQ() * Eigen::MatrixXd::Identity(n, r);
  Eigen::VectorXd s(r);
  for (std::size_t i = 0; i < r; ++i) s(static_cast<Eigen::Index>(i)) = std::pow(0.7, static_cast<double>(i));
  const Eigen::MatrixXd a = p * s.asDiagonal() * q.transpose();
  std::vector<double> dense(m * n);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) dense[i * n + j] = a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  SvdOptions opts;
  opts.exact_max_dim = 5;  // force the randomized path
  const auto svd = truncated_svd(SparseColumns::from_dense(dense, m, n), 4, 99, opts);
  ASSERT_EQ(svd.rank(), 4u);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_LE(std::fabs(svd.sigma[i] - s(static_cast<Eigen::Index>(i))), 1e-8 * s(static_cast<Eigen::Index>(i)));
  double best = 0.0;
  for (std::size_t i = 4; i < r; ++i) best += s(static_cast<Eigen::Index>(i)) * s(static_cast<Eigen::Index>(i));
  EXPECT_LE(projection_residual(a, svd), best + 1e-6);

  const auto again = truncated_svd(SparseColumns::from_dense(dense, m, n), 4, 99, opts);
  EXPECT_TRUE(same_bits(svd, again));
}

TEST(TruncatedSvd, KBeyondRankIsTruncated) {
  // Rank 2: third row is the sum of the first two.
  const std::vector<double> a = {1, 0, 2, 0, 1, 1, 1, 1, 3};
  const auto svd = truncated_svd(SparseColumns::from_dense(a, 3, 3), 10, 1);
  EXPECT_EQ(svd.rank(), 2u);
}

TEST(TruncatedSvd, BackendsGiveIdenticalBits) {
  Rng rng(25);
  const auto a = random_dense(rng, 20, 30);
  const auto original = kernels::active_backend();
  kernels::set_backend(kernels::Backend::Scalar);
  const auto ref = truncated_svd(SparseColumns::from_dense(a, 20, 30), 10, 3);
  for (auto b : {kernels::Backend::Avx2, kernels::Backend::Neon}) {
    if (!kernels::set_backend(b)) continue;
    EXPECT_TRUE(same_bits(ref, truncated_svd(SparseColumns::from_dense(a, 20, 30), 10, 3))) << kernels::backend_name(b);
  }
  kernels::set_backend(original);
}

TEST(FitLsa, TwoOrthogonalSingleTermSentences) {
  const std::vector<PreparedDocument> corpus = {doc("d", {"Virus.", "Mask."})};
  const auto space = fit_lsa(corpus, 2, 7);
  ASSERT_EQ(space.rank(), 2u);
  const double weight = std::log1p(1.0) * std::log(2.0);
  EXPECT_NEAR(space.singular_values()[0], weight, 1e-15);
  EXPECT_NEAR(space.singular_values()[1], weight, 1e-15);
  const auto e0 = sentence_embedding(space, corpus[0].sentences[0]);
  const auto e1 = sentence_embedding(space, corpus[0].sentences[1]);
  EXPECT_EQ(cosine_similarity(e0, e1), 0.0);
  EXPECT_EQ(*lsa_overlap(corpus[0], space, Scope::Adjacent), 0.0);
}

TEST(FitLsa, DeterministicAndOrderFree) {
  const std::vector<PreparedDocument> corpus = {
      doc("a", {"The virus spread to the city.", "Masks reduce the spread.", "Doctors treated patients."}),
      doc("b", {"The hospital measured blood samples.", "Patients received the vaccine.", "The city closed schools."}),
      doc("c", {"Vaccines protect children.", "The virus infects cells.", "Masks protect nurses and doctors."})};
  const auto s1 = fit_lsa(corpus, 100, 3);
  const auto s2 = fit_lsa(corpus, 100, 3);
  EXPECT_TRUE(same_bits(s1.svd(), s2.svd()));
  EXPECT_EQ(s1.vocabulary(), s2.vocabulary());

  std::vector<PreparedDocument> reversed(corpus.rbegin(), corpus.rend());
  const auto s3 = fit_lsa(reversed, 100, 3);
  EXPECT_TRUE(same_bits(s1.svd(), s3.svd()));
  EXPECT_LE(s1.rank(), 100u);
  for (double s : s1.singular_values()) EXPECT_GT(s, 0.0);
}

TEST(FitLsa, EmbeddingContracts) {
  const std::vector<PreparedDocument> corpus = {
      doc("a", {"The virus spread to the city.", "Masks reduce the spread.", "Doctors treated patients."}),
      doc("b", {"The hospital measured blood.", "Patients received the vaccine."})};
  const auto space = fit_lsa(corpus, 10, 1);
  const auto oov = doc("x", {"Xylophones hum quietly."});
  for (double v : sentence_embedding(space, oov.sentences[0])) EXPECT_EQ(v, 0.0);

  const auto e = sentence_embedding(space, corpus[0].sentences[0]);
  EXPECT_EQ(cosine_similarity(e, e), 1.0);
  const auto same_bag = doc("y", {"City virus spread."});
  EXPECT_EQ(sentence_embedding(space, same_bag.sentences[0]), e);
}

TEST(FitLsa, DegenerateCorpus) {
  try {
    fit_lsa({doc("a", {"The."})}, 5, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "DegenerateCorpus");
  }
  try {
    fit_lsa({doc("a", {"They are.", "It is."})}, 5, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "DegenerateCorpus");
  }
}
