#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "textimpact/evaluation.hpp"
#include "textimpact/learners.hpp"
#include "textimpact/selection.hpp"

namespace textimpact {

// One node drawn as a square. (x, y) is the base-left corner, angle is the
// direction of the base edge in radians (counterclockwise, y up).
struct PythagoreanSquare {
  std::size_t node = 0;
  int depth = 0;
  double x = 0.0;
  double y = 0.0;
  double side = 0.0;
  double angle = 0.0;
  Label fill = Label::High;  // majority class
  double saturation = 0.0;   // majority share of the node's samples
  bool leaf = false;

  // Base-left, base-right, top-right, top-left.
  std::array<std::array<double, 2>, 4> corners() const;
};

// Node weight w = ln(1 + n) when log_scale, else n. The root side is
// sqrt(w(root)); a node with side c gets children of sides
// c * sqrt(w_l / (w_l + w_r)) and c * sqrt(w_r / (w_l + w_r)), erected on its
// top edge as the legs of a right triangle. Squares are in preorder.
std::vector<PythagoreanSquare> layout_tree(const TreeModel& tree, bool log_scale = true);

struct TreeQuality {
  double mean_leaf_depth = 0.0;
  double mean_leaf_purity = 0.0;
};
TreeQuality tree_quality(const TreeModel& tree);
// Tree indices by mean leaf depth ascending, then mean purity descending,
// then index.
std::vector<std::size_t> order_trees_by_quality(const ForestModel& forest);

// Standalone SVG 1.1 with one cell per tree; cells run left to right, top to
// bottom, in quality order. Square coordinates are written as given and
// placed through a per-cell transform.
std::string render_forest_svg(const ForestModel& forest, const std::vector<std::vector<PythagoreanSquare>>& layouts, std::size_t columns = 5);
std::string render_tree_svg(const TreeModel& tree, const std::vector<PythagoreanSquare>& layout);

// (feature, importance) by descending importance, ties by feature id.
std::vector<std::pair<std::string, double>> importance_table(std::vector<std::pair<std::string, double>> importances);

// One rule per leaf: conditions from root to leaf joined by " AND ", then
// " → " and the leaf's majority class, e.g.
// "noun overlap in all sentences > 0.230 → HIGH".
std::vector<std::string> decision_rules(const TreeModel& tree, int digits = 3);

struct ComparisonRow {
  std::string model;
  EvalReport report;
};
// Columns: Model, AUC, CA, F1, Precision, Recall as percentages.
std::string comparison_csv(const std::vector<ComparisonRow>& rows);

struct RunSummary {
  nlohmann::ordered_json config;
  std::string config_hash;
  nlohmann::ordered_json seeds;
  nlohmann::ordered_json selection;
  std::vector<ComparisonRow> evaluations;
  nlohmann::ordered_json tuning;
  std::vector<std::pair<std::string, double>> importances;
  std::vector<std::string> rules;
  std::string generated_at;  // the only time-dependent field
};
nlohmann::ordered_json run_json(const RunSummary& run);

}  // namespace textimpact
