#include "textimpact/lsa.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "textimpact/error.hpp"
#include "textimpact/kernels.hpp"
#include "textimpact/random.hpp"

namespace textimpact {

namespace {

const kernels::KernelTable& K() { return kernels::active(); }

double vec_dot(const std::vector<double>& a, const std::vector<double>& b) { return K().dot(a.data(), b.data(), a.size()); }

double sparse_dot(const std::vector<std::pair<std::uint32_t, double>>& a,
                  const std::vector<std::pair<std::uint32_t, double>>& b) {
  double total = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i].first < b[j].first) {
      ++i;
    } else if (b[j].first < a[i].first) {
      ++j;
    } else {
      total += a[i].second * b[j].second;
      ++i;
      ++j;
    }
  }
  return total;
}

void normalize_sign(std::vector<double>& v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (std::fabs(v[i]) > std::fabs(v[best])) best = i;
  }
  if (!v.empty() && v[best] < 0) {
    for (auto& x : v) x = -x;
  }
}

// Orthonormalizes `basis` in place (two passes of modified Gram-Schmidt).
// A vector that collapses numerically is replaced by a fresh random vector.
void orthonormalize(std::vector<std::vector<double>>& basis, Rng& rng) {
  for (std::size_t j = 0; j < basis.size(); ++j) {
    auto& v = basis[j];
    for (int attempt = 0;; ++attempt) {
      const double before = std::sqrt(vec_dot(v, v));
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t i = 0; i < j; ++i) K().axpy(-vec_dot(basis[i], v), basis[i].data(), v.data(), v.size());
      }
      const double after = std::sqrt(vec_dot(v, v));
      if (after > 1e-10 * before && after > 0) {
        for (auto& x : v) x /= after;
        break;
      }
      if (attempt > 8) throw numerical_error("SubspaceCollapse", "subspace iteration lost rank");
      for (auto& x : v) x = rng.uniform(-1.0, 1.0);
    }
  }
}

// Keeps eigenpairs above numerical rank and at most k of them.
std::size_t numerical_rank(const std::vector<double>& values, std::size_t k) {
  if (values.empty() || values[0] <= 0) return 0;
  const double floor = values[0] * 1e-12;
  std::size_t r = 0;
  while (r < values.size() && r < k && values[r] > floor) ++r;
  return r;
}

TruncatedSvd exact_row_side(const SparseColumns& a, std::size_t k) {
  const std::size_t m = a.rows;
  std::vector<double> gram(m * m, 0.0);
  for (const auto& col : a.cols) {
    for (std::size_t x = 0; x < col.size(); ++x) {
      const auto [i, vi] = col[x];
      for (std::size_t y = x; y < col.size(); ++y) {
        const auto [j, vj] = col[y];
        gram[i * m + j] += vi * vj;
      }
    }
  }
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) gram[j * m + i] = gram[i * m + j];
  }
  auto eig = jacobi_eigen(std::move(gram), m);
  TruncatedSvd out;
  out.rows = m;
  const std::size_t r = numerical_rank(eig.values, k);
  for (std::size_t i = 0; i < r; ++i) {
    out.sigma.push_back(std::sqrt(eig.values[i]));
    out.u.push_back(std::move(eig.vectors[i]));
  }
  return out;
}

TruncatedSvd exact_col_side(const SparseColumns& a, std::size_t k) {
  const std::size_t n = a.col_count();
  std::vector<double> gram(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const double g = sparse_dot(a.cols[i], a.cols[j]);
      gram[i * n + j] = g;
      gram[j * n + i] = g;
    }
  }
  auto eig = jacobi_eigen(std::move(gram), n);
  TruncatedSvd out;
  out.rows = a.rows;
  const std::size_t r = numerical_rank(eig.values, k);
  for (std::size_t i = 0; i < r; ++i) {
    const double sigma = std::sqrt(eig.values[i]);
    std::vector<double> u(a.rows, 0.0);
    for (std::size_t s = 0; s < n; ++s) {
      const double coef = eig.vectors[i][s] / sigma;
      if (coef == 0.0) continue;
      for (const auto& [row, v] : a.cols[s]) u[row] += v * coef;
    }
    const double norm = std::sqrt(vec_dot(u, u));
    for (auto& x : u) x /= norm;
    out.sigma.push_back(sigma);
    out.u.push_back(std::move(u));
  }
  return out;
}

TruncatedSvd randomized(const SparseColumns& a, std::size_t k, std::uint64_t seed, const SvdOptions& options) {
  const std::size_t m = a.rows;
  const std::size_t n = a.col_count();
  const std::size_t q = std::min({k + options.oversample, m, n});
  Rng rng(seed);
  std::vector<std::vector<double>> basis(q, std::vector<double>(m));
  for (auto& v : basis) {
    for (auto& x : v) x = rng.uniform(-1.0, 1.0);
  }
  orthonormalize(basis, rng);

  std::vector<double> z(n);
  for (std::size_t it = 0; it < options.power_iterations; ++it) {
    for (auto& v : basis) {
      // v <- A A^T v
      for (std::size_t s = 0; s < n; ++s) {
        double t = 0.0;
        for (const auto& [row, val] : a.cols[s]) t += v[row] * val;
        z[s] = t;
      }
      std::fill(v.begin(), v.end(), 0.0);
      for (std::size_t s = 0; s < n; ++s) {
        if (z[s] == 0.0) continue;
        for (const auto& [row, val] : a.cols[s]) v[row] += val * z[s];
      }
    }
    orthonormalize(basis, rng);
  }

  // Rayleigh-Ritz on B = Q^T A through the q x q Gram matrix B B^T.
  std::vector<double> small(q * q, 0.0);
  std::vector<double> b(q);
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t j = 0; j < q; ++j) {
      double t = 0.0;
      for (const auto& [row, val] : a.cols[s]) t += basis[j][row] * val;
      b[j] = t;
    }
    for (std::size_t i = 0; i < q; ++i) {
      if (b[i] == 0.0) continue;
      for (std::size_t j = i; j < q; ++j) small[i * q + j] += b[i] * b[j];
    }
  }
  for (std::size_t i = 0; i < q; ++i) {
    for (std::size_t j = i + 1; j < q; ++j) small[j * q + i] = small[i * q + j];
  }
  auto eig = jacobi_eigen(std::move(small), q);
  TruncatedSvd out;
  out.rows = m;
  const std::size_t r = numerical_rank(eig.values, k);
  for (std::size_t i = 0; i < r; ++i) {
    std::vector<double> u(m, 0.0);
    for (std::size_t j = 0; j < q; ++j) K().axpy(eig.vectors[i][j], basis[j].data(), u.data(), m);
    out.sigma.push_back(std::sqrt(eig.values[i]));
    out.u.push_back(std::move(u));
  }
  return out;
}

}  // namespace

SparseColumns SparseColumns::from_dense(const std::vector<double>& row_major, std::size_t rows, std::size_t cols) {
  SparseColumns out;
  out.rows = rows;
  out.cols.resize(cols);
  for (std::size_t c = 0; c < cols; ++c) {
    for (std::size_t r = 0; r < rows; ++r) {
      const double v = row_major[r * cols + c];
      if (v != 0.0) out.cols[c].emplace_back(static_cast<std::uint32_t>(r), v);
    }
  }
  return out;
}

SymmetricEigen jacobi_eigen(std::vector<double> g, std::size_t n, int max_sweeps) {
  // rows[i] of `vt` is the running i-th eigenvector (V transposed), so each
  // rotation touches two contiguous rows.
  std::vector<double> vt(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) vt[i * n + i] = 1.0;
  double frob = 0.0;
  for (double x : g) frob += x * x;
  const double abs_floor = std::sqrt(frob) * 1e-18;

  const auto& kt = K();
  SymmetricEigen out;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = g[p * n + q];
        const double app = g[p * n + p];
        const double aqq = g[q * n + q];
        if (std::fabs(apq) <= abs_floor || std::fabs(apq) <= 1e-17 * std::sqrt(std::fabs(app * aqq))) {
          g[p * n + q] = 0.0;
          g[q * n + p] = 0.0;
          continue;
        }
        rotated = true;
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        kt.rotate(c, s, &g[p * n], &g[q * n], n);
        for (std::size_t r = 0; r < n; ++r) {
          if (r == p || r == q) continue;
          g[r * n + p] = g[p * n + r];
          g[r * n + q] = g[q * n + r];
        }
        g[p * n + p] = app - t * apq;
        g[q * n + q] = aqq + t * apq;
        g[p * n + q] = 0.0;
        g[q * n + p] = 0.0;
        kt.rotate(c, s, &vt[p * n], &vt[q * n], n);
      }
    }
    out.sweeps = sweep + 1;
    if (!rotated) break;
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return g[a * n + a] > g[b * n + b]; });
  for (std::size_t i : order) {
    out.values.push_back(g[i * n + i]);
    out.vectors.emplace_back(vt.begin() + static_cast<long>(i * n), vt.begin() + static_cast<long>((i + 1) * n));
  }
  return out;
}

TruncatedSvd truncated_svd(const SparseColumns& a, std::size_t k, std::uint64_t seed, const SvdOptions& options) {
  TruncatedSvd out;
  if (a.rows == 0 || a.col_count() == 0 || k == 0) {
    out.rows = a.rows;
    return out;
  }
  const std::size_t small_dim = std::min(a.rows, a.col_count());
  if (small_dim <= options.exact_max_dim) {
    out = a.rows <= a.col_count() ? exact_row_side(a, k) : exact_col_side(a, k);
  } else {
    out = randomized(a, k, seed, options);
  }
  for (auto& u : out.u) normalize_sign(u);
  return out;
}

LsaSpace::LsaSpace(std::vector<std::string> vocabulary, std::vector<double> idf, TruncatedSvd svd)
    : vocabulary_(std::move(vocabulary)), idf_(std::move(idf)), svd_(std::move(svd)) {
  for (std::size_t i = 0; i < vocabulary_.size(); ++i) index_.emplace(vocabulary_[i], static_cast<std::uint32_t>(i));
}

long LsaSpace::index_of(std::string_view stem) const {
  const auto it = index_.find(std::string(stem));
  return it == index_.end() ? -1 : static_cast<long>(it->second);
}

std::vector<std::pair<std::uint32_t, double>> LsaSpace::term_vector(const Sentence& sentence) const {
  std::map<std::uint32_t, int> tf;
  for (const auto& tok : sentence.tokens) {
    if (!tok.is_content) continue;
    const auto it = index_.find(tok.stem);
    if (it != index_.end()) ++tf[it->second];
  }
  std::vector<std::pair<std::uint32_t, double>> out;
  for (const auto& [term, count] : tf) {
    const double w = std::log1p(static_cast<double>(count)) * idf_[term];
    if (w != 0.0) out.emplace_back(term, w);
  }
  return out;
}

LsaSpace fit_lsa(const std::vector<PreparedDocument>& corpus, std::size_t k, std::uint64_t seed, const SvdOptions& options) {
  std::map<std::string, std::size_t> df;
  std::size_t n_sentences = 0;
  for (const auto& doc : corpus) {
    for (const auto& s : doc.sentences) {
      ++n_sentences;
      std::vector<std::string> stems;
      for (const auto& tok : s.tokens) {
        if (tok.is_content) stems.push_back(tok.stem);
      }
      std::sort(stems.begin(), stems.end());
      stems.erase(std::unique(stems.begin(), stems.end()), stems.end());
      for (const auto& st : stems) ++df[st];
    }
  }
  if (n_sentences < 2) throw data_error("DegenerateCorpus", "LSA needs at least two sentences");

  std::vector<std::string> vocab;
  std::vector<double> idf;
  for (const auto& [st, count] : df) {
    vocab.push_back(st);
    idf.push_back(std::log(static_cast<double>(n_sentences) / static_cast<double>(count)));
  }
  LsaSpace weights(vocab, idf, TruncatedSvd{});

  SparseColumns a;
  a.rows = vocab.size();
  for (const auto& doc : corpus) {
    for (const auto& s : doc.sentences) {
      auto col = weights.term_vector(s);
      if (!col.empty()) a.cols.push_back(std::move(col));
    }
  }
  if (a.cols.empty()) throw data_error("DegenerateCorpus", "no sentence carries a nonzero LSA term weight");
  // Canonical column order makes the factorization independent of the order
  // documents and sentences were supplied in.
  std::sort(a.cols.begin(), a.cols.end());

  auto svd = truncated_svd(a, k, seed, options);
  return LsaSpace(std::move(vocab), std::move(idf), std::move(svd));
}

std::vector<double> sentence_embedding(const LsaSpace& space, const Sentence& sentence) {
  const auto& svd = space.svd();
  std::vector<double> out(svd.rank(), 0.0);
  const auto t = space.term_vector(sentence);
  for (std::size_t i = 0; i < svd.rank(); ++i) {
    double acc = 0.0;
    for (const auto& [term, w] : t) acc += svd.u[i][term] * w;
    out[i] = acc / svd.sigma[i];
  }
  return out;
}

double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b) {
  const double aa = vec_dot(a, a);
  const double bb = vec_dot(b, b);
  if (aa == 0.0 || bb == 0.0) return 0.0;
  const double c = vec_dot(a, b) / std::sqrt(aa * bb);
  return std::clamp(c, -1.0, 1.0);
}

}  // namespace textimpact
