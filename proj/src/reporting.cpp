#include "textimpact/reporting.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "textimpact/error.hpp"
#include "textimpact/features.hpp"
#include "textimpact/textio.hpp"

namespace textimpact {

namespace {

constexpr double kCellSize = 240.0;
constexpr double kCellMargin = 12.0;
constexpr double kCaptionHeight = 20.0;

double node_weight(const TreeNode& node, bool log_scale) {
  const auto n = static_cast<double>(node.n);
  return log_scale ? std::log1p(n) : n;
}

double majority_share(const TreeNode& node) {
  if (node.n == 0) return 0.0;
  const auto top = std::max(node.counts[0], node.counts[1]);
  return static_cast<double>(top) / static_cast<double>(node.n);
}

Label majority_label(const TreeNode& node) { return prediction_from_score(node.high_fraction()).label; }

struct Frame {
  double x, y, side, angle;
};

void place(const TreeModel& tree, int index, const Frame& frame, bool log_scale, std::vector<PythagoreanSquare>& out) {
  const auto& node = tree.nodes[static_cast<std::size_t>(index)];
  PythagoreanSquare sq;
  sq.node = static_cast<std::size_t>(index);
  sq.depth = node.depth;
  sq.x = frame.x;
  sq.y = frame.y;
  sq.side = frame.side;
  sq.angle = frame.angle;
  sq.fill = majority_label(node);
  sq.saturation = majority_share(node);
  sq.leaf = node.is_leaf();
  out.push_back(sq);
  if (node.is_leaf()) return;

  const double wl = node_weight(tree.nodes[static_cast<std::size_t>(node.left)], log_scale);
  const double wr = node_weight(tree.nodes[static_cast<std::size_t>(node.right)], log_scale);
  const double total = wl + wr;
  const double share_l = total > 0.0 ? wl / total : 0.5;
  const double share_r = total > 0.0 ? wr / total : 0.5;
  const double a = frame.side * std::sqrt(share_l);
  const double b = frame.side * std::sqrt(share_r);
  const double theta = std::atan2(std::sqrt(share_r), std::sqrt(share_l));

  const double ux = std::cos(frame.angle), uy = std::sin(frame.angle);
  const double vx = -uy, vy = ux;
  const double tlx = frame.x + frame.side * vx;
  const double tly = frame.y + frame.side * vy;

  const double left_angle = frame.angle + theta;
  place(tree, node.left, Frame{tlx, tly, a, left_angle}, log_scale, out);

  const double apex_x = tlx + a * std::cos(left_angle);
  const double apex_y = tly + a * std::sin(left_angle);
  place(tree, node.right, Frame{apex_x, apex_y, b, left_angle - std::numbers::pi / 2.0}, log_scale, out);
}

// HSL with lightness 0.5 to #rrggbb.
std::string hsl_hex(double hue, double saturation, double lightness) {
  const double c = (1.0 - std::fabs(2.0 * lightness - 1.0)) * saturation;
  const double h = std::fmod(hue, 360.0) / 60.0;
  const double x = c * (1.0 - std::fabs(std::fmod(h, 2.0) - 1.0));
  double r = 0.0, g = 0.0, b = 0.0;
  if (h < 1.0) {
    r = c, g = x;
  } else if (h < 2.0) {
    r = x, g = c;
  } else if (h < 3.0) {
    g = c, b = x;
  } else if (h < 4.0) {
    g = x, b = c;
  } else if (h < 5.0) {
    r = x, b = c;
  } else {
    r = c, b = x;
  }
  const double m = lightness - c / 2.0;
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out = "#";
  for (double channel : {r, g, b}) {
    const int v = std::clamp(static_cast<int>(std::lround((channel + m) * 255.0)), 0, 255);
    out += kHex[v / 16];
    out += kHex[v % 16];
  }
  return out;
}

std::string square_color(const PythagoreanSquare& sq) {
  const double hue = sq.fill == Label::High ? 215.0 : 0.0;
  return hsl_hex(hue, std::clamp(sq.saturation, 0.0, 1.0), 0.5);
}

std::string num(double v) { return textio::format_fixed(v, 6); }

struct Cell {
  std::size_t tree_index;
  const TreeModel* tree;
  const std::vector<PythagoreanSquare>* layout;
};

void append_cell(std::string& svg, const Cell& cell, double origin_x, double origin_y) {
  double min_x = 0.0, max_x = 0.0, min_y = 0.0, max_y = 0.0;
  bool first = true;
  for (const auto& sq : *cell.layout) {
    for (const auto& p : sq.corners()) {
      if (first) {
        min_x = max_x = p[0];
        min_y = max_y = p[1];
        first = false;
      }
      min_x = std::min(min_x, p[0]);
      max_x = std::max(max_x, p[0]);
      min_y = std::min(min_y, p[1]);
      max_y = std::max(max_y, p[1]);
    }
  }
  const double span = std::max({max_x - min_x, max_y - min_y, 1e-12});
  const double box = kCellSize - 2.0 * kCellMargin;
  const double drawing = kCellSize - kCaptionHeight - 2.0 * kCellMargin;
  const double scale = std::min(box, drawing) / span;
  const double tx = origin_x + kCellMargin + (box - scale * (max_x - min_x)) / 2.0 - scale * min_x;
  const double ty = origin_y + kCellMargin + (drawing - scale * (max_y - min_y)) + scale * max_y;

  const auto& tree = *cell.tree;
  svg += "  <g id=\"tree-" + std::to_string(cell.tree_index) + "\">\n";
  svg += "    <title>tree " + std::to_string(cell.tree_index) + ": " + std::to_string(tree.nodes.size()) + " nodes, depth " +
         std::to_string(tree.depth()) + "</title>\n";
  svg += "    <g transform=\"translate(" + num(tx) + "," + num(ty) + ") scale(" + num(scale) + "," + num(-scale) + ")\">\n";
  for (const auto& sq : *cell.layout) {
    const auto corners = sq.corners();
    svg += "      <polygon points=\"";
    for (std::size_t i = 0; i < corners.size(); ++i) {
      if (i) svg += ' ';
      svg += num(corners[i][0]) + "," + num(corners[i][1]);
    }
    svg += "\" fill=\"" + square_color(sq) + "\" stroke=\"#ffffff\" stroke-width=\"" + num(0.5 / scale) + "\"/>\n";
  }
  svg += "    </g>\n";
  svg += "    <text x=\"" + num(origin_x + kCellSize / 2.0) + "\" y=\"" + num(origin_y + kCellSize - kCellMargin) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">tree " + std::to_string(cell.tree_index) + " (" +
         std::to_string(tree.nodes.size()) + " nodes, depth " + std::to_string(tree.depth()) + ")</text>\n";
  svg += "  </g>\n";
}

std::string render_cells(const std::vector<Cell>& cells, std::size_t columns) {
  columns = std::max<std::size_t>(1, std::min(columns, std::max<std::size_t>(1, cells.size())));
  const std::size_t rows = cells.empty() ? 1 : (cells.size() + columns - 1) / columns;
  const double width = static_cast<double>(columns) * kCellSize;
  const double height = static_cast<double>(rows) * kCellSize;
  std::string svg = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + num(width) + "\" height=\"" + num(height) +
         "\" viewBox=\"0 0 " + num(width) + " " + num(height) + "\">\n";
  svg += "  <rect x=\"0\" y=\"0\" width=\"" + num(width) + "\" height=\"" + num(height) + "\" fill=\"#ffffff\"/>\n";
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const double ox = static_cast<double>(i % columns) * kCellSize;
    const double oy = static_cast<double>(i / columns) * kCellSize;
    append_cell(svg, cells[i], ox, oy);
  }
  svg += "</svg>\n";
  return svg;
}

std::string rule_condition(const TreeModel& tree, const TreeNode& parent, bool went_left, int digits) {
  const auto& id = tree.features[static_cast<std::size_t>(parent.feature)];
  return feature_label(id) + (went_left ? " <= " : " > ") + textio::format_fixed(parent.threshold, digits);
}

void collect_rules(const TreeModel& tree, int index, std::vector<std::string>& path, int digits, std::vector<std::string>& out) {
  const auto& node = tree.nodes[static_cast<std::size_t>(index)];
  if (node.is_leaf()) {
    std::string rule;
    for (std::size_t i = 0; i < path.size(); ++i) {
      if (i) rule += " AND ";
      rule += path[i];
    }
    if (path.empty()) rule = "always";
    rule += " → ";
    rule += label_name(majority_label(node));
    out.push_back(std::move(rule));
    return;
  }
  path.push_back(rule_condition(tree, node, true, digits));
  collect_rules(tree, node.left, path, digits, out);
  path.back() = rule_condition(tree, node, false, digits);
  collect_rules(tree, node.right, path, digits, out);
  path.pop_back();
}

std::string percent(double v) { return std::isfinite(v) ? textio::format_fixed(100.0 * v, 1) : "NA"; }

}  // namespace

std::array<std::array<double, 2>, 4> PythagoreanSquare::corners() const {
  const double ux = std::cos(angle) * side, uy = std::sin(angle) * side;
  const double vx = -uy, vy = ux;
  return {{{x, y}, {x + ux, y + uy}, {x + ux + vx, y + uy + vy}, {x + vx, y + vy}}};
}

std::vector<PythagoreanSquare> layout_tree(const TreeModel& tree, bool log_scale) {
  std::vector<PythagoreanSquare> out;
  if (tree.nodes.empty()) return out;
  out.reserve(tree.nodes.size());
  const double root_side = std::sqrt(node_weight(tree.nodes[0], log_scale));
  place(tree, 0, Frame{0.0, 0.0, root_side, 0.0}, log_scale, out);
  return out;
}

TreeQuality tree_quality(const TreeModel& tree) {
  TreeQuality q;
  std::size_t leaves = 0;
  for (const auto& node : tree.nodes) {
    if (!node.is_leaf()) continue;
    q.mean_leaf_depth += node.depth;
    q.mean_leaf_purity += majority_share(node);
    ++leaves;
  }
  if (leaves) {
    q.mean_leaf_depth /= static_cast<double>(leaves);
    q.mean_leaf_purity /= static_cast<double>(leaves);
  }
  return q;
}

std::vector<std::size_t> order_trees_by_quality(const ForestModel& forest) {
  std::vector<TreeQuality> quality;
  quality.reserve(forest.trees.size());
  for (const auto& tree : forest.trees) quality.push_back(tree_quality(tree));
  std::vector<std::size_t> order(forest.trees.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (quality[a].mean_leaf_depth != quality[b].mean_leaf_depth) return quality[a].mean_leaf_depth < quality[b].mean_leaf_depth;
    if (quality[a].mean_leaf_purity != quality[b].mean_leaf_purity) return quality[a].mean_leaf_purity > quality[b].mean_leaf_purity;
    return a < b;
  });
  return order;
}

std::string render_forest_svg(const ForestModel& forest, const std::vector<std::vector<PythagoreanSquare>>& layouts, std::size_t columns) {
  if (layouts.size() != forest.trees.size()) {
    throw data_error("LengthMismatch", "forest has " + std::to_string(forest.trees.size()) + " trees but " +
                                           std::to_string(layouts.size()) + " layouts were given");
  }
  std::vector<Cell> cells;
  for (auto index : order_trees_by_quality(forest)) cells.push_back(Cell{index, &forest.trees[index], &layouts[index]});
  return render_cells(cells, columns);
}

std::string render_tree_svg(const TreeModel& tree, const std::vector<PythagoreanSquare>& layout) {
  return render_cells({Cell{0, &tree, &layout}}, 1);
}

std::vector<std::pair<std::string, double>> importance_table(std::vector<std::pair<std::string, double>> importances) {
  std::sort(importances.begin(), importances.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  return importances;
}

std::vector<std::string> decision_rules(const TreeModel& tree, int digits) {
  std::vector<std::string> out;
  if (tree.nodes.empty()) return out;
  std::vector<std::string> path;
  collect_rules(tree, 0, path, digits, out);
  return out;
}

std::string comparison_csv(const std::vector<ComparisonRow>& rows) {
  std::string out = "Model,AUC,CA,F1,Precision,Recall\n";
  for (const auto& row : rows) {
    const auto& r = row.report;
    out += textio::csv_escape(row.model) + "," + percent(r.auc) + "," + percent(r.accuracy) + "," + percent(r.f1) + "," +
           percent(r.precision) + "," + percent(r.recall) + "\n";
  }
  return out;
}

nlohmann::ordered_json run_json(const RunSummary& run) {
  nlohmann::ordered_json j;
  j["format_version"] = 1;
  j["config_hash"] = run.config_hash;
  j["config"] = run.config;
  j["seeds"] = run.seeds;
  j["selection"] = run.selection;
  auto evaluations = nlohmann::ordered_json::array();
  auto table = nlohmann::ordered_json::array();
  for (const auto& row : run.evaluations) {
    evaluations.push_back(row.report.to_json());
    const auto& r = row.report;
    table.push_back({{"Model", row.model}, {"AUC", percent(r.auc)}, {"CA", percent(r.accuracy)}, {"F1", percent(r.f1)},
                     {"Precision", percent(r.precision)}, {"Recall", percent(r.recall)}});
  }
  j["evaluations"] = std::move(evaluations);
  j["comparison"] = std::move(table);
  j["tuning"] = run.tuning;
  auto importances = nlohmann::ordered_json::array();
  for (const auto& [id, value] : run.importances) {
    importances.push_back({{"feature", id}, {"label", feature_label(id)}, {"importance", value}});
  }
  j["importances"] = std::move(importances);
  j["rules"] = run.rules;
  j["generated_at"] = run.generated_at;
  return j;
}

}  // namespace textimpact
