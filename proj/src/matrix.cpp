#include "textimpact/matrix.hpp"

#include <algorithm>
#include <charconv>
#include <set>

#include "textimpact/error.hpp"
#include "textimpact/textio.hpp"

namespace textimpact {

FeatureMatrix::FeatureMatrix(std::vector<std::string> ids, std::vector<Label> lbls, std::vector<std::string> features)
    : doc_ids(std::move(ids)), labels(std::move(lbls)), feature_ids(std::move(features)) {
  values.assign(doc_ids.size() * feature_ids.size(), 0.0);
}

std::vector<double> FeatureMatrix::column(std::size_t c) const {
  std::vector<double> out(rows());
  for (std::size_t r = 0; r < rows(); ++r) out[r] = at(r, c);
  return out;
}

long FeatureMatrix::column_index(std::string_view feature) const {
  const auto it = std::find(feature_ids.begin(), feature_ids.end(), feature);
  return it == feature_ids.end() ? -1 : static_cast<long>(it - feature_ids.begin());
}

bool FeatureMatrix::has_missing() const {
  return std::any_of(values.begin(), values.end(), [](double v) { return is_missing(v); });
}

std::vector<int> FeatureMatrix::label_codes() const {
  std::vector<int> out;
  out.reserve(labels.size());
  for (auto l : labels) out.push_back(label_code(l));
  return out;
}

FeatureMatrix FeatureMatrix::select_columns(const std::vector<std::string>& features) const {
  std::vector<std::size_t> idx;
  for (const auto& f : features) {
    const long c = column_index(f);
    if (c < 0) throw data_error("UnknownFeature", "feature '" + f + "' is not a matrix column");
    idx.push_back(static_cast<std::size_t>(c));
  }
  FeatureMatrix out(doc_ids, labels, features);
  for (std::size_t r = 0; r < rows(); ++r) {
    for (std::size_t j = 0; j < idx.size(); ++j) out.at(r, j) = at(r, idx[j]);
  }
  return out;
}

FeatureMatrix FeatureMatrix::select_rows(const std::vector<std::size_t>& rows_wanted) const {
  FeatureMatrix out;
  out.feature_ids = feature_ids;
  out.values.reserve(rows_wanted.size() * cols());
  for (std::size_t r : rows_wanted) {
    out.doc_ids.push_back(doc_ids.at(r));
    out.labels.push_back(labels.at(r));
    out.values.insert(out.values.end(), row_ptr(r), row_ptr(r) + cols());
  }
  return out;
}

void FeatureMatrix::validate() const {
  if (labels.size() != doc_ids.size() || values.size() != doc_ids.size() * feature_ids.size()) {
    throw data_error("BadShape", "feature matrix is not rectangular");
  }
  std::set<std::string> seen;
  for (const auto& f : feature_ids) {
    if (!seen.insert(f).second) throw data_error("BadShape", "duplicate feature column '" + f + "'");
  }
}

std::string matrix_to_csv(const FeatureMatrix& m) {
  m.validate();
  std::string out = "doc_id,label";
  for (const auto& f : m.feature_ids) out += "," + textio::csv_escape(f);
  out += "\n";
  for (std::size_t r = 0; r < m.rows(); ++r) {
    out += textio::csv_escape(m.doc_ids[r]);
    out += ",";
    out += label_name(m.labels[r]);
    for (std::size_t c = 0; c < m.cols(); ++c) {
      out += ",";
      if (!is_missing(m.at(r, c))) out += textio::format_double(m.at(r, c));
    }
    out += "\n";
  }
  return out;
}

FeatureMatrix matrix_from_csv(std::string_view text, const std::string& source) {
  const auto lines = textio::split_lines(text);
  if (lines.empty()) throw data_error("Malformed", source + ": empty feature matrix file");
  const auto header = textio::split_csv_line(lines[0]);
  if (header.size() < 2 || header[0] != "doc_id" || header[1] != "label") {
    throw data_error("Malformed", source + ":1: header must start with doc_id,label");
  }
  FeatureMatrix m;
  m.feature_ids.assign(header.begin() + 2, header.end());
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (textio::trim(lines[i]).empty()) continue;
    const auto cells = textio::split_csv_line(lines[i]);
    const std::string where = source + ":" + std::to_string(i + 1) + ": ";
    if (cells.size() != header.size()) throw data_error("Malformed", where + "wrong number of cells");
    const auto label = parse_label(cells[1]);
    if (!label) throw data_error("BadLabel", where + "bad label '" + cells[1] + "'");
    m.doc_ids.push_back(cells[0]);
    m.labels.push_back(*label);
    for (std::size_t c = 2; c < cells.size(); ++c) {
      const auto cell = textio::trim(cells[c]);
      if (cell.empty()) {
        m.values.push_back(kMissing);
        continue;
      }
      double v = 0.0;
      const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (res.ec != std::errc() || res.ptr != cell.data() + cell.size()) {
        throw data_error("Malformed", where + "non-numeric cell '" + std::string(cell) + "'");
      }
      m.values.push_back(v);
    }
  }
  m.validate();
  return m;
}

void save_matrix(const FeatureMatrix& matrix, const std::filesystem::path& path) {
  textio::write_file_atomic(path, matrix_to_csv(matrix));
}

FeatureMatrix load_matrix(const std::filesystem::path& path) {
  return matrix_from_csv(textio::read_file(path), path.string());
}

double order_free_sum(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  double total = 0.0;
  for (double v : values) total += v;
  return total;
}

double order_free_mean(const std::vector<double>& values) {
  if (values.empty()) return 0.0;
  return order_free_sum(values) / static_cast<double>(values.size());
}

}  // namespace textimpact
