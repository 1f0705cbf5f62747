#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "textimpact/corpus.hpp"

namespace textimpact {

// Column-compressed matrix: one sorted (row, value) list per column.
struct SparseColumns {
  std::size_t rows = 0;
  std::vector<std::vector<std::pair<std::uint32_t, double>>> cols;

  std::size_t col_count() const noexcept { return cols.size(); }
  static SparseColumns from_dense(const std::vector<double>& row_major, std::size_t rows, std::size_t cols);
};

// Eigen-decomposition of a dense symmetric n x n matrix by cyclic Jacobi
// rotations. Eigenvalues descend; vectors[i] is the unit eigenvector of
// values[i].
struct SymmetricEigen {
  std::vector<double> values;
  std::vector<std::vector<double>> vectors;
  int sweeps = 0;
};
SymmetricEigen jacobi_eigen(std::vector<double> matrix, std::size_t n, int max_sweeps = 100);

struct SvdOptions {
  // If the smaller matrix dimension is at most this, the Gram matrix on that
  // side is decomposed exactly; otherwise seeded subspace iteration is used.
  std::size_t exact_max_dim = 512;
  std::size_t oversample = 10;
  std::size_t power_iterations = 12;
};

// Leading singular triplets (left side only). Singular values are
// non-increasing; components below numerical rank are dropped, so
// rank() <= requested k. Each left vector is sign-normalized so that its
// largest-magnitude entry is positive.
struct TruncatedSvd {
  std::size_t rows = 0;
  std::vector<double> sigma;
  std::vector<std::vector<double>> u;  // u[i] has `rows` entries

  std::size_t rank() const noexcept { return sigma.size(); }
};
TruncatedSvd truncated_svd(const SparseColumns& a, std::size_t k, std::uint64_t seed, const SvdOptions& options = {});

// Latent semantic space over content-word stems. Term weights are
// log(1 + tf) * ln(N / df) where N counts sentences in the fitting corpus.
class LsaSpace {
 public:
  LsaSpace() = default;
  LsaSpace(std::vector<std::string> vocabulary, std::vector<double> idf, TruncatedSvd svd);

  const std::vector<std::string>& vocabulary() const noexcept { return vocabulary_; }
  const std::vector<double>& idf() const noexcept { return idf_; }
  const std::vector<double>& singular_values() const noexcept { return svd_.sigma; }
  const TruncatedSvd& svd() const noexcept { return svd_; }
  std::size_t rank() const noexcept { return svd_.rank(); }
  // -1 when the stem is out of vocabulary.
  long index_of(std::string_view stem) const;

  // Weighted term vector of a sentence as sorted (term, weight) pairs.
  std::vector<std::pair<std::uint32_t, double>> term_vector(const Sentence& sentence) const;

 private:
  std::vector<std::string> vocabulary_;
  std::unordered_map<std::string, std::uint32_t> index_;
  std::vector<double> idf_;
  TruncatedSvd svd_;
};

// Throws DegenerateCorpus when the corpus has fewer than two sentences or no
// sentence carries a nonzero term weight.
LsaSpace fit_lsa(const std::vector<PreparedDocument>& corpus, std::size_t k, std::uint64_t seed,
                 const SvdOptions& options = {});

// Folding-in: Sigma^-1 U^T t for the sentence's weighted term vector t.
std::vector<double> sentence_embedding(const LsaSpace& space, const Sentence& sentence);

double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace textimpact
