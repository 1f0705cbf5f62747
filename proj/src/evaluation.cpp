#include "textimpact/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "textimpact/error.hpp"
#include "textimpact/parallel.hpp"
#include "textimpact/random.hpp"

namespace textimpact {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::array<std::vector<std::size_t>, 2> shuffled_classes(const std::vector<Label>& labels, std::uint64_t seed) {
  std::array<std::vector<std::size_t>, 2> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[static_cast<std::size_t>(label_code(labels[i]))].push_back(i);
  for (std::size_t c = 0; c < 2; ++c) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(c)));
    rng.shuffle(std::span<std::size_t>(by_class[c]));
  }
  return by_class;
}

}  // namespace

SplitPlan stratified_holdout(const std::vector<Label>& labels, double ratio, std::uint64_t seed) {
  if (!(ratio > 0 && ratio < 1)) throw config_error("ConfigInvalid", "holdout ratio must be in (0, 1)");
  if (labels.empty()) throw data_error("EmptyTrainingSet", "holdout of an empty label set");
  const std::size_t n = labels.size();
  const auto by_class = shuffled_classes(labels, seed);
  SplitPlan plan;
  plan.ratio = ratio;
  plan.seed = seed;
  plan.single_class = by_class[0].empty() || by_class[1].empty();

  auto total = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(n) + 1e-9));
  if (n >= 2) total = std::clamp<std::size_t>(total, 1, n - 1);
  std::array<std::size_t, 2> take{};
  std::array<double, 2> rem{};
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < 2; ++c) {
    const double quota = ratio * static_cast<double>(by_class[c].size());
    take[c] = std::min(by_class[c].size(), static_cast<std::size_t>(std::floor(quota + 1e-9)));
    rem[c] = quota - static_cast<double>(take[c]);
    assigned += take[c];
  }
  // Largest remainder; equal remainders favour the larger class, then HIGH.
  while (assigned < total) {
    std::size_t pick = 2;
    for (std::size_t c : {1u, 0u}) {
      if (take[c] >= by_class[c].size()) continue;
      if (pick == 2 || rem[c] > rem[pick] || (rem[c] == rem[pick] && by_class[c].size() > by_class[pick].size())) pick = c;
    }
    ++take[pick];
    rem[pick] -= 1.0;
    ++assigned;
  }
  while (assigned > total) {
    const std::size_t c = take[1] >= take[0] ? 1 : 0;
    --take[c];
    --assigned;
  }
  for (std::size_t c = 0; c < 2; ++c) {
    for (std::size_t k = 0; k < by_class[c].size(); ++k) (k < take[c] ? plan.train : plan.test).push_back(by_class[c][k]);
  }
  std::sort(plan.train.begin(), plan.train.end());
  std::sort(plan.test.begin(), plan.test.end());
  return plan;
}

std::vector<std::size_t> FoldPlan::train_rows(std::size_t fold) const {
  std::vector<std::size_t> rows;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    if (f != fold) rows.insert(rows.end(), folds[f].begin(), folds[f].end());
  }
  std::sort(rows.begin(), rows.end());
  return rows;
}

FoldPlan stratified_kfold(const std::vector<Label>& labels, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw config_error("ConfigInvalid", "k-fold needs k >= 2");
  if (k > labels.size()) throw data_error("KTooLarge", "k = " + std::to_string(k) + " exceeds " + std::to_string(labels.size()) + " samples");
  const auto by_class = shuffled_classes(labels, derive_seed(seed, "kfold"));
  FoldPlan plan;
  plan.seed = seed;
  plan.folds.resize(k);
  std::size_t next = 0;
  for (std::size_t c : {1u, 0u}) {
    for (std::size_t i : by_class[c]) {
      plan.folds[next].push_back(i);
      next = (next + 1) % k;
    }
  }
  for (auto& f : plan.folds) std::sort(f.begin(), f.end());
  return plan;
}

std::vector<std::size_t> bootstrap_indices(std::size_t n, std::uint64_t seed) {
  if (n == 0) throw data_error("EmptyTrainingSet", "bootstrap of zero rows");
  Rng rng(seed);
  std::vector<std::size_t> out(n);
  for (auto& i : out) i = rng.uniform_index(n);
  return out;
}

std::vector<RocPoint> roc(const std::vector<double>& scores, const std::vector<Label>& labels) {
  if (scores.size() != labels.size()) throw data_error("LengthMismatch", "scores and labels differ in length");
  std::size_t pos = 0;
  for (auto l : labels) pos += l == Label::High;
  const std::size_t neg = labels.size() - pos;
  if (pos == 0 || neg == 0) throw data_error("DegenerateLabels", "ROC needs both classes");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::vector<RocPoint> pts{{0.0, 0.0, std::numeric_limits<double>::infinity()}};
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double s = scores[order[i]];
    for (; i < order.size() && scores[order[i]] == s; ++i) (labels[order[i]] == Label::High ? tp : fp) += 1;
    pts.push_back({static_cast<double>(fp) / static_cast<double>(neg), static_cast<double>(tp) / static_cast<double>(pos), s});
  }
  return pts;
}

double auc(const std::vector<RocPoint>& points) {
  double a = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) {
    a += (points[i].fpr - points[i - 1].fpr) * (points[i].tpr + points[i - 1].tpr) / 2.0;
  }
  return a;
}

double auc_rank(const std::vector<double>& scores, const std::vector<Label>& labels) {
  if (scores.size() != labels.size()) throw data_error("LengthMismatch", "scores and labels differ in length");
  // Midranks over the pooled scores give U for the HIGH sample.
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double rank_sum = 0.0;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double mid = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t t = i; t < j; ++t) {
      if (labels[order[t]] == Label::High) {
        rank_sum += mid;
        ++pos;
      }
    }
    i = j;
  }
  const std::size_t neg = scores.size() - pos;
  if (pos == 0 || neg == 0) throw data_error("DegenerateLabels", "AUC needs both classes");
  const double dp = static_cast<double>(pos);
  return (rank_sum - dp * (dp + 1.0) / 2.0) / (dp * static_cast<double>(neg));
}

double ConfusionMatrix::column_percent(Label observed, Label predicted) const {
  const auto p = static_cast<std::size_t>(label_code(predicted));
  const std::size_t col = counts[0][p] + counts[1][p];
  if (col == 0) return 0.0;
  return 100.0 * static_cast<double>(counts[static_cast<std::size_t>(label_code(observed))][p]) / static_cast<double>(col);
}

EvalReport evaluate(const std::vector<Prediction>& predictions, const std::vector<Label>& labels) {
  if (predictions.size() != labels.size() || labels.empty()) {
    throw data_error("LengthMismatch", "evaluate needs equal, non-empty prediction and label lists");
  }
  EvalReport r;
  r.n = labels.size();
  std::size_t correct = 0;
  for (std::size_t i = 0; i < r.n; ++i) {
    const auto o = static_cast<std::size_t>(label_code(labels[i]));
    const auto p = static_cast<std::size_t>(label_code(predictions[i].label));
    ++r.confusion.counts[o][p];
    correct += o == p;
  }
  const double n = static_cast<double>(r.n);
  r.accuracy = static_cast<double>(correct) / n;
  for (std::size_t c = 0; c < 2; ++c) {
    auto& m = r.per_class[c];
    const std::size_t tp = r.confusion.counts[c][c];
    const std::size_t predicted = r.confusion.counts[0][c] + r.confusion.counts[1][c];
    m.support = r.confusion.counts[c][0] + r.confusion.counts[c][1];
    m.precision = predicted == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(predicted);
    m.recall = m.support == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(m.support);
    m.f1 = m.precision + m.recall == 0 ? 0.0 : 2.0 * m.precision * m.recall / (m.precision + m.recall);
    const double w = static_cast<double>(m.support) / n;
    r.precision += w * m.precision;
    r.recall += w * m.recall;
    r.f1 += w * m.f1;
  }
  std::vector<double> scores;
  scores.reserve(r.n);
  for (const auto& p : predictions) scores.push_back(p.score);
  if (r.per_class[0].support > 0 && r.per_class[1].support > 0) {
    r.roc_points = roc(scores, labels);
    r.auc = auc(r.roc_points);
    const double check = auc_rank(scores, labels);
    if (std::fabs(check - r.auc) > 1e-9) {
      throw numerical_error("AucMismatch", "trapezoid AUC disagrees with the rank statistic");
    }
  } else {
    r.auc = kNaN;
  }
  return r;
}

namespace {

nlohmann::ordered_json nullable(double v) { return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr); }

double read_nullable(const nlohmann::json& j, double if_null) { return j.is_null() ? if_null : j.get<double>(); }

}  // namespace

nlohmann::ordered_json EvalReport::to_json() const {
  nlohmann::ordered_json j;
  j["model"] = model;
  j["seed"] = seed;
  j["n"] = n;
  j["auc"] = nullable(auc);
  j["accuracy"] = accuracy;
  j["f1"] = f1;
  j["precision"] = precision;
  j["recall"] = recall;
  j["per_class"] = nlohmann::ordered_json::object();
  for (auto label : {Label::High, Label::Moderate}) {
    const auto& m = per_class[static_cast<std::size_t>(label_code(label))];
    j["per_class"][std::string(label_name(label))] = {{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}, {"support", m.support}};
  }
  // Rows are observed, columns predicted, both in HIGH, MODERATE order.
  nlohmann::ordered_json raw = nlohmann::ordered_json::array(), pct = nlohmann::ordered_json::array();
  for (auto o : {Label::High, Label::Moderate}) {
    nlohmann::ordered_json rr = nlohmann::ordered_json::array(), pr = nlohmann::ordered_json::array();
    for (auto p : {Label::High, Label::Moderate}) {
      rr.push_back(confusion.counts[static_cast<std::size_t>(label_code(o))][static_cast<std::size_t>(label_code(p))]);
      pr.push_back(confusion.column_percent(o, p));
    }
    raw.push_back(rr);
    pct.push_back(pr);
  }
  j["confusion"] = {{"labels", {"HIGH", "MODERATE"}}, {"counts", raw}, {"column_percent", pct}};
  j["roc"] = nlohmann::ordered_json::array();
  for (const auto& p : roc_points) j["roc"].push_back({{"fpr", p.fpr}, {"tpr", p.tpr}, {"threshold", nullable(p.threshold)}});
  j["provenance"] = provenance;
  return j;
}

EvalReport EvalReport::from_json(const nlohmann::json& j) {
  EvalReport r;
  try {
    r.model = j.at("model").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.n = j.at("n").get<std::size_t>();
    r.auc = read_nullable(j.at("auc"), kNaN);
    r.accuracy = j.at("accuracy").get<double>();
    r.f1 = j.at("f1").get<double>();
    r.precision = j.at("precision").get<double>();
    r.recall = j.at("recall").get<double>();
    for (auto label : {Label::High, Label::Moderate}) {
      const auto& m = j.at("per_class").at(std::string(label_name(label)));
      auto& out = r.per_class[static_cast<std::size_t>(label_code(label))];
      out.precision = m.at("precision").get<double>();
      out.recall = m.at("recall").get<double>();
      out.f1 = m.at("f1").get<double>();
      out.support = m.at("support").get<std::size_t>();
    }
    const auto& counts = j.at("confusion").at("counts");
    const Label order[2] = {Label::High, Label::Moderate};
    for (std::size_t o = 0; o < 2; ++o) {
      for (std::size_t p = 0; p < 2; ++p) {
        r.confusion.counts[static_cast<std::size_t>(label_code(order[o]))][static_cast<std::size_t>(label_code(order[p]))] =
            counts.at(o).at(p).get<std::size_t>();
      }
    }
    for (const auto& p : j.at("roc")) {
      r.roc_points.push_back({p.at("fpr").get<double>(), p.at("tpr").get<double>(), read_nullable(p.at("threshold"), std::numeric_limits<double>::infinity())});
    }
    r.provenance = nlohmann::ordered_json::parse(j.at("provenance").dump());
  } catch (const nlohmann::json::exception& e) {
    throw data_error("Malformed", std::string("bad evaluation report: ") + e.what());
  }
  return r;
}

TuneResult grid_tune(const std::vector<ModelSpec>& grid, const FeatureMatrix& train, const FoldPlan& folds, std::uint64_t seed, unsigned workers,
                     const std::vector<std::size_t>& refit_rows) {
  if (grid.empty()) throw config_error("ConfigInvalid", "tuning grid is empty");
  const std::size_t k = folds.k();
  std::vector<double> acc(grid.size() * k, kNaN), aucs(grid.size() * k, kNaN);
  parallel_for(grid.size() * k, workers, [&](std::size_t task) {
    const std::size_t g = task / k, f = task % k;
    const auto fit_rows = train.select_rows(folds.train_rows(f));
    const auto test_rows = train.select_rows(folds.folds[f]);
    const auto model = fit_model(grid[g], fit_rows, derive_seed(seed, static_cast<std::uint64_t>(task)));
    const auto report = evaluate(predict(model, test_rows), test_rows.labels);
    acc[task] = report.accuracy;
    aucs[task] = report.auc;
  });

  TuneResult result;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    CvRow row;
    row.spec = grid[g];
    double sa = 0.0, su = 0.0;
    std::size_t nu = 0;
    for (std::size_t f = 0; f < k; ++f) {
      row.fold_accuracy.push_back(acc[g * k + f]);
      row.fold_auc.push_back(aucs[g * k + f]);
      sa += acc[g * k + f];
      if (!std::isnan(aucs[g * k + f])) {
        su += aucs[g * k + f];
        ++nu;
      }
    }
    row.mean_accuracy = sa / static_cast<double>(k);
    row.mean_auc = nu == 0 ? kNaN : su / static_cast<double>(nu);
    result.table.push_back(std::move(row));
  }
  const auto auc_key = [](double v) { return std::isnan(v) ? -1.0 : v; };
  for (std::size_t g = 1; g < result.table.size(); ++g) {
    const auto& a = result.table[g];
    const auto& b = result.table[result.best];
    bool wins = false;
    if (a.mean_accuracy != b.mean_accuracy) {
      wins = a.mean_accuracy > b.mean_accuracy;
    } else if (auc_key(a.mean_auc) != auc_key(b.mean_auc)) {
      wins = auc_key(a.mean_auc) > auc_key(b.mean_auc);
    } else {
      wins = a.spec.complexity() < b.spec.complexity();
    }
    if (wins) result.best = g;
  }
  const auto refit = refit_rows.empty() ? train : train.select_rows(refit_rows);
  result.model = fit_model(grid[result.best], refit, derive_seed(seed, "refit"));
  return result;
}

}  // namespace textimpact
