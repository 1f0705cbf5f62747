#include "textimpact/selection.hpp"

#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "json.hpp"
#include "textimpact/error.hpp"
#include "textimpact/kernels.hpp"
#include "textimpact/random.hpp"

namespace textimpact {

Discretization discretize(const std::vector<double>& column, int bins) {
  if (bins < 2) throw config_error("ConfigInvalid", "discretize needs at least 2 bins");
  Discretization out;
  const std::size_t n = column.size();
  out.bins.assign(n, 0);
  if (n == 0) {
    out.constant = true;
    return out;
  }
  auto sorted = column;
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> cuts;
  for (int i = 1; i < bins; ++i) {
    const std::size_t rank = (static_cast<std::size_t>(i) * n + static_cast<std::size_t>(bins) - 1) / static_cast<std::size_t>(bins);
    cuts.push_back(sorted[std::max<std::size_t>(rank, 1) - 1]);
  }
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  std::vector<int> raw(n);
  for (std::size_t i = 0; i < n; ++i) {
    raw[i] = static_cast<int>(std::lower_bound(cuts.begin(), cuts.end(), column[i]) - cuts.begin());
  }
  // Renumber so bin ids are 0..count-1 with no gaps.
  std::set<int> used(raw.begin(), raw.end());
  std::map<int, int> remap;
  for (int b : used) remap.emplace(b, static_cast<int>(remap.size()));
  for (std::size_t i = 0; i < n; ++i) out.bins[i] = remap[raw[i]];
  out.bin_count = static_cast<int>(remap.size());
  out.constant = out.bin_count == 1;
  return out;
}

double chi_square_sf(double x, double dof) {
  if (dof <= 0) return 1.0;
  if (x <= 0) return 1.0;
  return boost::math::gamma_q(dof / 2.0, x / 2.0);
}

ChiSquareResult chi_square_counts(const std::vector<std::vector<double>>& counts) {
  std::vector<double> row_tot, col_tot;
  double total = 0.0;
  std::size_t ncols = 0;
  for (const auto& r : counts) ncols = std::max(ncols, r.size());
  col_tot.assign(ncols, 0.0);
  for (const auto& r : counts) {
    double t = 0.0;
    for (std::size_t c = 0; c < r.size(); ++c) {
      t += r[c];
      col_tot[c] += r[c];
    }
    row_tot.push_back(t);
    total += t;
  }
  const auto rows_used = std::count_if(row_tot.begin(), row_tot.end(), [](double v) { return v > 0; });
  const auto cols_used = std::count_if(col_tot.begin(), col_tot.end(), [](double v) { return v > 0; });
  ChiSquareResult out;
  if (rows_used < 2 || cols_used < 2) return out;
  double stat = 0.0;
  for (std::size_t r = 0; r < counts.size(); ++r) {
    if (row_tot[r] == 0) continue;
    for (std::size_t c = 0; c < ncols; ++c) {
      if (col_tot[c] == 0) continue;
      const double expected = row_tot[r] * col_tot[c] / total;
      const double observed = c < counts[r].size() ? counts[r][c] : 0.0;
      stat += (observed - expected) * (observed - expected) / expected;
    }
  }
  out.statistic = stat;
  out.dof = static_cast<int>((rows_used - 1) * (cols_used - 1));
  out.p_value = chi_square_sf(stat, out.dof);
  return out;
}

ChiSquareResult chi_square(const std::vector<double>& column, const std::vector<int>& labels, int bins) {
  const auto d = discretize(column, bins);
  std::vector<std::vector<double>> counts(static_cast<std::size_t>(std::max(d.bin_count, 1)), std::vector<double>(2, 0.0));
  for (std::size_t i = 0; i < column.size(); ++i) counts[static_cast<std::size_t>(d.bins[i])][static_cast<std::size_t>(labels[i])] += 1.0;
  return chi_square_counts(counts);
}

double mann_whitney_exact_p(double u, std::size_t na, std::size_t nb) {
  // c[i][j] is the distribution of U for sample sizes (i, j).
  const std::size_t umax = na * nb;
  std::vector<std::vector<std::vector<double>>> c(na + 1, std::vector<std::vector<double>>(nb + 1));
  for (std::size_t i = 0; i <= na; ++i) {
    for (std::size_t j = 0; j <= nb; ++j) {
      auto& dist = c[i][j];
      dist.assign(i * j + 1, 0.0);
      if (i == 0 || j == 0) {
        dist[0] = 1.0;
        continue;
      }
      // The largest value belongs to sample a (beats all j of b) or to b.
      const auto& from_a = c[i - 1][j];
      const auto& from_b = c[i][j - 1];
      for (std::size_t v = 0; v < from_a.size(); ++v) dist[v + j] += from_a[v];
      for (std::size_t v = 0; v < from_b.size(); ++v) dist[v] += from_b[v];
    }
  }
  const auto& dist = c[na][nb];
  const double total = std::accumulate(dist.begin(), dist.end(), 0.0);
  const auto uu = static_cast<std::size_t>(std::llround(u));
  double lower = 0.0, upper = 0.0;
  for (std::size_t v = 0; v <= umax; ++v) {
    if (v <= uu) lower += dist[v];
    if (v >= uu) upper += dist[v];
  }
  return std::min(1.0, 2.0 * std::min(lower, upper) / total);
}

MannWhitneyResult mann_whitney(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.empty() || b.empty()) throw data_error("EmptySample", "Mann-Whitney needs two non-empty samples");
  const std::size_t na = a.size(), nb = b.size(), n = na + nb;
  std::vector<std::pair<double, int>> all;
  all.reserve(n);
  for (double v : a) all.emplace_back(v, 0);
  for (double v : b) all.emplace_back(v, 1);
  std::sort(all.begin(), all.end(), [](const auto& x, const auto& y) { return x.first < y.first; });

  double rank_sum_a = 0.0, tie_term = 0.0;
  bool ties = false;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && all[j].first == all[i].first) ++j;
    const double t = static_cast<double>(j - i);
    const double midrank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t x = i; x < j; ++x) {
      if (all[x].second == 0) rank_sum_a += midrank;
    }
    if (t > 1) {
      ties = true;
      tie_term += t * t * t - t;
    }
    i = j;
  }
  MannWhitneyResult out;
  const double dna = static_cast<double>(na), dnb = static_cast<double>(nb), dn = static_cast<double>(n);
  out.u = rank_sum_a - dna * (dna + 1.0) / 2.0;
  const double mu = dna * dnb / 2.0;
  const double var = dna * dnb / 12.0 * ((dn + 1.0) - (n > 1 ? tie_term / (dn * (dn - 1.0)) : 0.0));
  if (var > 0) {
    const double diff = out.u - mu;
    const double corrected = std::max(0.0, std::fabs(diff) - 0.5);
    out.z = (diff < 0 ? -corrected : corrected) / std::sqrt(var);
    out.p_two_sided = std::min(1.0, std::erfc(std::fabs(out.z) / std::sqrt(2.0)));
  }
  if (!ties && na * nb <= 200) {
    out.p_two_sided = mann_whitney_exact_p(out.u, na, nb);
    out.exact = true;
  }
  return out;
}

double entropy_bits(const std::vector<int>& labels) {
  std::map<int, double> counts;
  for (int l : labels) counts[l] += 1.0;
  const double n = static_cast<double>(labels.size());
  double h = 0.0;
  for (const auto& [label, c] : counts) {
    const double p = c / n;
    if (p > 0) h -= p * std::log2(p);
  }
  return h;
}

double info_gain_bins(const std::vector<int>& bins, const std::vector<int>& labels) {
  if (labels.empty()) return 0.0;
  std::map<int, std::vector<int>> groups;
  for (std::size_t i = 0; i < bins.size(); ++i) groups[bins[i]].push_back(labels[i]);
  const double n = static_cast<double>(labels.size());
  double cond = 0.0;
  for (const auto& [bin, ys] : groups) cond += static_cast<double>(ys.size()) / n * entropy_bits(ys);
  return std::max(0.0, entropy_bits(labels) - cond);
}

double info_gain(const std::vector<double>& column, const std::vector<int>& labels, int bins) {
  const auto d = discretize(column, bins);
  if (d.constant) return 0.0;
  return info_gain_bins(d.bins, labels);
}

std::vector<double> relieff(const FeatureMatrix& matrix, int k, std::size_t m, std::uint64_t seed) {
  const std::size_t n = matrix.rows(), p = matrix.cols();
  const auto y = matrix.label_codes();
  std::size_t class_n[2] = {0, 0};
  for (int v : y) ++class_n[v];
  if (class_n[0] == 0 || class_n[1] == 0) throw data_error("SingleClass", "ReliefF needs both classes");
  if (k < 1) throw config_error("ConfigInvalid", "ReliefF k must be at least 1");

  // Distances use features in id order so they do not depend on column order.
  std::vector<std::size_t> order(p);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return matrix.feature_ids[a] < matrix.feature_ids[b]; });
  std::vector<double> x(n * p, 0.0);
  for (std::size_t j = 0; j < p; ++j) {
    const std::size_t src = order[j];
    double lo = matrix.at(0, src), hi = lo;
    for (std::size_t r = 1; r < n; ++r) {
      lo = std::min(lo, matrix.at(r, src));
      hi = std::max(hi, matrix.at(r, src));
    }
    const double span = hi - lo;
    for (std::size_t r = 0; r < n; ++r) x[r * p + j] = span > 0 ? (matrix.at(r, src) - lo) / span : 0.0;
  }

  std::vector<std::size_t> visit(n);
  std::iota(visit.begin(), visit.end(), 0);
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(visit));
  const std::size_t samples = (m == 0 || m > n) ? n : m;

  const auto& kt = kernels::active();
  std::vector<double> weight(p, 0.0);
  std::vector<std::pair<double, std::size_t>> cand;
  std::vector<double> hit_sum(p), miss_sum(p);
  for (std::size_t s = 0; s < samples; ++s) {
    const std::size_t i = visit[s];
    const int ci = y[i];
    std::fill(hit_sum.begin(), hit_sum.end(), 0.0);
    std::fill(miss_sum.begin(), miss_sum.end(), 0.0);
    std::size_t k_used[2] = {0, 0};
    for (int c = 0; c < 2; ++c) {
      cand.clear();
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i || y[j] != c) continue;
        cand.emplace_back(kt.l1_distance(&x[i * p], &x[j * p], p), j);
      }
      const std::size_t kk = std::min<std::size_t>(static_cast<std::size_t>(k), cand.size());
      std::partial_sort(cand.begin(), cand.begin() + static_cast<long>(kk), cand.end());
      auto& sum = c == ci ? hit_sum : miss_sum;
      for (std::size_t t = 0; t < kk; ++t) {
        const std::size_t j = cand[t].second;
        for (std::size_t f = 0; f < p; ++f) sum[f] += std::fabs(x[i * p + f] - x[j * p + f]);
      }
      k_used[c] = kk;
    }
    const int other = 1 - ci;
    const double p_other = static_cast<double>(class_n[other]) / static_cast<double>(n);
    const double p_self = static_cast<double>(class_n[ci]) / static_cast<double>(n);
    const double miss_scale = p_other / (1.0 - p_self);
    for (std::size_t f = 0; f < p; ++f) {
      double delta = 0.0;
      if (k_used[other] > 0) delta += miss_scale * miss_sum[f] / static_cast<double>(k_used[other]);
      if (k_used[ci] > 0) delta -= hit_sum[f] / static_cast<double>(k_used[ci]);
      weight[f] += delta;
    }
  }
  std::vector<double> out(p, 0.0);
  for (std::size_t j = 0; j < p; ++j) out[order[j]] = weight[j] / static_cast<double>(samples);
  return out;
}

std::string_view method_name(Method method) noexcept {
  switch (method) {
    case Method::Chi2: return "CHI2";
    case Method::Mwu: return "MWU";
    case Method::InfoGain: return "INFOGAIN";
    case Method::Relieff: return "RELIEFF";
  }
  return "?";
}

std::optional<Method> parse_method(std::string_view name) {
  for (auto m : all_methods()) {
    if (method_name(m) == name) return m;
  }
  return std::nullopt;
}

const std::vector<Method>& all_methods() {
  static const std::vector<Method> methods = {Method::Chi2, Method::Mwu, Method::InfoGain, Method::Relieff};
  return methods;
}

void assign_ranks(MethodTable& table) {
  std::vector<std::size_t> idx(table.scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    const auto& x = table.scores[a];
    const auto& y = table.scores[b];
    if (x.statistic != y.statistic) return x.statistic > y.statistic;
    return x.feature < y.feature;
  });
  for (std::size_t r = 0; r < idx.size(); ++r) table.scores[idx[r]].rank = static_cast<int>(r + 1);
}

MethodTable score_method(const FeatureMatrix& matrix, Method method, const SelectionParams& params, std::uint64_t seed) {
  MethodTable table{method, {}};
  const auto y = matrix.label_codes();
  std::vector<double> relief;
  if (method == Method::Relieff) relief = relieff(matrix, params.relieff_k, params.relieff_m, derive_seed(seed, "relieff"));
  for (std::size_t c = 0; c < matrix.cols(); ++c) {
    MethodScore s;
    s.feature = matrix.feature_ids[c];
    const auto col = matrix.column(c);
    switch (method) {
      case Method::Chi2: {
        const auto r = chi_square(col, y, params.bins);
        s.statistic = r.statistic;
        s.p_value = r.p_value;
        break;
      }
      case Method::Mwu: {
        std::vector<double> a, b;
        for (std::size_t i = 0; i < col.size(); ++i) (y[i] == 1 ? a : b).push_back(col[i]);
        if (a.empty() || b.empty()) throw data_error("SingleClass", "Mann-Whitney needs both classes");
        const auto r = mann_whitney(a, b);
        s.statistic = std::fabs(r.z);
        s.p_value = r.p_two_sided;
        break;
      }
      case Method::InfoGain: s.statistic = info_gain(col, y, params.bins); break;
      case Method::Relieff: s.statistic = relief[c]; break;
    }
    table.scores.push_back(std::move(s));
  }
  assign_ranks(table);
  return table;
}

SelectionReport aggregate(std::vector<MethodTable> methods, const SelectionParams& params) {
  for (auto m : all_methods()) {
    const auto count = std::count_if(methods.begin(), methods.end(), [&](const MethodTable& t) { return t.method == m; });
    if (count != 1) throw data_error("MethodMissing", "aggregation needs exactly one table for " + std::string(method_name(m)));
  }
  std::sort(methods.begin(), methods.end(), [](const MethodTable& a, const MethodTable& b) { return a.method < b.method; });
  std::map<std::string, std::pair<double, int>> acc;  // rank sum, votes
  for (const auto& s : methods[0].scores) acc[s.feature] = {0.0, 0};
  for (const auto& t : methods) {
    if (t.scores.size() != acc.size()) throw data_error("MethodMissing", "method tables cover different features");
    for (const auto& s : t.scores) {
      const auto it = acc.find(s.feature);
      if (it == acc.end()) throw data_error("MethodMissing", "feature '" + s.feature + "' missing from a method table");
      it->second.first += s.rank;
      if (static_cast<std::size_t>(s.rank) <= params.top_k) ++it->second.second;
    }
  }
  SelectionReport report;
  report.params = params;
  for (const auto& [feature, v] : acc) {
    report.aggregate.push_back({feature, v.first / static_cast<double>(methods.size()), v.second});
  }
  std::sort(report.aggregate.begin(), report.aggregate.end(), [](const AggregateEntry& a, const AggregateEntry& b) {
    if (a.mean_rank != b.mean_rank) return a.mean_rank < b.mean_rank;
    return a.feature < b.feature;
  });
  for (const auto& e : report.aggregate) {
    if (params.mode == Aggregation::Borda) {
      if (report.selected.size() < params.top_k) report.selected.push_back(e.feature);
    } else if (e.votes >= params.min_votes) {
      report.selected.push_back(e.feature);
    }
  }
  report.methods = std::move(methods);
  return report;
}

SelectionReport select_features(const FeatureMatrix& matrix, const SelectionParams& params, std::uint64_t seed) {
  if (matrix.has_missing()) throw data_error("MissingValues", "selection needs an imputed feature matrix");
  std::vector<MethodTable> tables;
  for (auto m : all_methods()) tables.push_back(score_method(matrix, m, params, seed));
  auto report = aggregate(std::move(tables), params);
  report.seed = seed;
  return report;
}

std::string SelectionReport::to_json_text() const {
  nlohmann::ordered_json j;
  j["format_version"] = 1;
  j["seed"] = seed;
  j["params"] = {{"bins", params.bins},
                 {"relieff_k", params.relieff_k},
                 {"relieff_m", params.relieff_m},
                 {"top_k", params.top_k},
                 {"mode", params.mode == Aggregation::Borda ? "borda" : "vote"},
                 {"min_votes", params.min_votes}};
  j["methods"] = nlohmann::ordered_json::object();
  for (const auto& t : methods) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& s : t.scores) {
      nlohmann::ordered_json e;
      e["feature"] = s.feature;
      e["statistic"] = s.statistic;
      if (s.p_value) {
        e["p_value"] = *s.p_value;
      } else {
        e["p_value"] = nullptr;
      }
      e["rank"] = s.rank;
      arr.push_back(e);
    }
    j["methods"][std::string(method_name(t.method))] = arr;
  }
  j["aggregate"] = nlohmann::ordered_json::array();
  for (const auto& a : aggregate) j["aggregate"].push_back({{"feature", a.feature}, {"mean_rank", a.mean_rank}, {"votes", a.votes}});
  j["selected"] = selected;
  return j.dump(2) + "\n";
}

SelectionReport SelectionReport::from_json_text(std::string_view text) {
  SelectionReport r;
  try {
    const auto j = nlohmann::json::parse(text);
    r.seed = j.at("seed").get<std::uint64_t>();
    const auto& p = j.at("params");
    r.params.bins = p.at("bins").get<int>();
    r.params.relieff_k = p.at("relieff_k").get<int>();
    r.params.relieff_m = p.at("relieff_m").get<std::size_t>();
    r.params.top_k = p.at("top_k").get<std::size_t>();
    r.params.mode = p.at("mode").get<std::string>() == "vote" ? Aggregation::Vote : Aggregation::Borda;
    r.params.min_votes = p.at("min_votes").get<int>();
    for (auto m : all_methods()) {
      const std::string name(method_name(m));
      if (!j.at("methods").contains(name)) continue;
      MethodTable t{m, {}};
      for (const auto& e : j.at("methods").at(name)) {
        MethodScore s;
        s.feature = e.at("feature").get<std::string>();
        s.statistic = e.at("statistic").get<double>();
        if (!e.at("p_value").is_null()) s.p_value = e.at("p_value").get<double>();
        s.rank = e.at("rank").get<int>();
        t.scores.push_back(std::move(s));
      }
      r.methods.push_back(std::move(t));
    }
    for (const auto& e : j.at("aggregate")) {
      r.aggregate.push_back({e.at("feature").get<std::string>(), e.at("mean_rank").get<double>(), e.at("votes").get<int>()});
    }
    r.selected = j.at("selected").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw data_error("Malformed", std::string("bad selection report: ") + e.what());
  }
  return r;
}

}  // namespace textimpact
