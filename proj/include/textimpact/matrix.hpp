#pragma once

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "textimpact/label.hpp"

namespace textimpact {

// MISSING feature values are stored as quiet NaN.
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
inline bool is_missing(double value) noexcept { return std::isnan(value); }

// Documents x features, row-major, with one class label per document.
struct FeatureMatrix {
  std::vector<std::string> doc_ids;
  std::vector<Label> labels;
  std::vector<std::string> feature_ids;
  std::vector<double> values;

  FeatureMatrix() = default;
  FeatureMatrix(std::vector<std::string> ids, std::vector<Label> labels, std::vector<std::string> features);

  std::size_t rows() const noexcept { return doc_ids.size(); }
  std::size_t cols() const noexcept { return feature_ids.size(); }
  double& at(std::size_t r, std::size_t c) { return values[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const { return values[r * cols() + c]; }
  const double* row_ptr(std::size_t r) const { return values.data() + r * cols(); }

  std::vector<double> column(std::size_t c) const;
  // -1 when absent.
  long column_index(std::string_view feature) const;
  bool has_missing() const;
  // 1 for HIGH, 0 for MODERATE.
  std::vector<int> label_codes() const;

  // Throws UnknownFeature for a name that is not a column.
  FeatureMatrix select_columns(const std::vector<std::string>& features) const;
  FeatureMatrix select_rows(const std::vector<std::size_t>& rows) const;

  // Throws BadShape when the grid is not rectangular or names repeat.
  void validate() const;
};

// CSV: `doc_id,label,<feature...>`; MISSING cells are empty. Values use the
// shortest text that round-trips, so write/read is lossless.
std::string matrix_to_csv(const FeatureMatrix& matrix);
FeatureMatrix matrix_from_csv(std::string_view text, const std::string& source = "<matrix>");
void save_matrix(const FeatureMatrix& matrix, const std::filesystem::path& path);
FeatureMatrix load_matrix(const std::filesystem::path& path);

// Sum of values in ascending order, so the result is independent of the
// order in which rows were supplied.
double order_free_sum(std::vector<double> values);
double order_free_mean(const std::vector<double>& values);

}  // namespace textimpact
