#include "evseq/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include <Eigen/Dense>

#include "evseq/special.hpp"

namespace evseq {

// ---- Mean comparison -------------------------------------------------------

GroupSummary summarize_group(std::string label, const std::vector<double>& values) {
  GroupSummary g;
  g.label = std::move(label);
  g.n = values.size();
  if (values.empty()) return g;
  g.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(g.n);
  if (g.n >= 2) {
    double ss = 0;
    for (double v : values) ss += (v - g.mean) * (v - g.mean);
    g.sd = std::sqrt(ss / static_cast<double>(g.n - 1));
  }
  return g;
}

PairwiseTest welch_test(const GroupSummary& a, const GroupSummary& b) {
  if (a.n < 2 || b.n < 2) throw InsufficientDataError("Welch test needs at least two values per group");
  PairwiseTest t;
  t.group_a = a.label;
  t.group_b = b.label;
  const double va = a.sd * a.sd / static_cast<double>(a.n);
  const double vb = b.sd * b.sd / static_cast<double>(b.n);
  const double se2 = va + vb;
  const double diff = a.mean - b.mean;
  if (se2 <= 0.0) {
    // Both groups constant: the test degenerates to exact equality.
    t.df = static_cast<double>(a.n + b.n - 2);
    if (diff == 0.0) {
      t.t = 0.0;
      t.p = 1.0;
    } else {
      t.t = diff > 0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
      t.p = 0.0;
    }
    return t;
  }
  t.t = diff / std::sqrt(se2);
  t.df = se2 * se2 / (va * va / static_cast<double>(a.n - 1) + vb * vb / static_cast<double>(b.n - 1));
  t.p = t_two_sided_p(t.t, t.df);
  return t;
}

MeanTestTable mean_table(const std::string& response, const std::string& grouping,
                         const std::vector<std::pair<std::string, std::vector<double>>>& groups) {
  MeanTestTable table;
  table.response = response;
  table.grouping = grouping;
  for (const auto& [label, values] : groups) table.groups.push_back(summarize_group(label, values));
  std::vector<const GroupSummary*> testable;
  for (const auto& g : table.groups)
    if (g.n >= 2) testable.push_back(&g);
  if (testable.size() < 2)
    throw InsufficientDataError("mean comparison of '" + response + "' by '" + grouping +
                                "' needs at least two groups with n >= 2");
  for (std::size_t i = 0; i < testable.size(); ++i)
    for (std::size_t j = i + 1; j < testable.size(); ++j) table.tests.push_back(welch_test(*testable[i], *testable[j]));
  return table;
}

namespace {

Json finite_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(v > 0 ? "inf" : v < 0 ? "-inf" : "nan"); }

}  // namespace

Json MeanTestTable::to_json() const {
  Json g = Json::array();
  for (const auto& x : groups) g.push_back(Json{{"label", x.label}, {"n", x.n}, {"mean", x.mean}, {"sd", x.sd}});
  Json t = Json::array();
  for (const auto& x : tests)
    t.push_back(Json{{"group_a", x.group_a}, {"group_b", x.group_b}, {"t", finite_or_null(x.t)}, {"df", x.df}, {"p", x.p}});
  return Json{{"response", response}, {"grouping", grouping}, {"groups", g}, {"tests", t}, {"test", "welch"}};
}

// ---- Contingency -----------------------------------------------------------

ContingencyResult chi_square_test(std::vector<std::string> row_levels, std::vector<std::string> column_levels,
                                  std::vector<std::vector<double>> observed) {
  ContingencyResult r;
  if (observed.size() != row_levels.size()) throw ConfigError("contingency table row count mismatch");
  for (const auto& row : observed)
    if (row.size() != column_levels.size()) throw ConfigError("contingency table column count mismatch");

  std::vector<double> rs(row_levels.size(), 0.0), cs(column_levels.size(), 0.0);
  for (std::size_t i = 0; i < rs.size(); ++i)
    for (std::size_t j = 0; j < cs.size(); ++j) {
      if (observed[i][j] < 0) throw ConfigError("negative count in contingency table");
      rs[i] += observed[i][j];
      cs[j] += observed[i][j];
    }
  std::vector<std::size_t> keep_r, keep_c;
  for (std::size_t i = 0; i < rs.size(); ++i) {
    if (rs[i] > 0) keep_r.push_back(i);
    else r.notes.push_back("dropped empty row level '" + row_levels[i] + "'");
  }
  for (std::size_t j = 0; j < cs.size(); ++j) {
    if (cs[j] > 0) keep_c.push_back(j);
    else r.notes.push_back("dropped empty column level '" + column_levels[j] + "'");
  }
  if (keep_r.size() < 2 || keep_c.size() < 2)
    throw InsufficientDataError("contingency table needs at least two non-empty levels per attribute");

  for (auto i : keep_r) r.row_levels.push_back(row_levels[i]);
  for (auto j : keep_c) r.column_levels.push_back(column_levels[j]);
  double total = 0;
  for (auto i : keep_r) total += rs[i];
  r.observed.assign(keep_r.size(), std::vector<double>(keep_c.size()));
  r.expected.assign(keep_r.size(), std::vector<double>(keep_c.size()));
  double chi = 0;
  for (std::size_t a = 0; a < keep_r.size(); ++a)
    for (std::size_t b = 0; b < keep_c.size(); ++b) {
      const double o = observed[keep_r[a]][keep_c[b]];
      const double e = rs[keep_r[a]] * cs[keep_c[b]] / total;
      r.observed[a][b] = o;
      r.expected[a][b] = e;
      if (e < 5.0) r.low_expected_warning = true;
      chi += (o - e) * (o - e) / e;
    }
  r.chi_square = chi;
  r.df = (keep_r.size() - 1) * (keep_c.size() - 1);
  r.p = chisq_upper_p(chi, static_cast<double>(r.df));
  r.n = static_cast<std::size_t>(std::llround(total));
  if (r.low_expected_warning) r.notes.push_back("some expected counts are below 5; the chi-square approximation may be poor");
  return r;
}

Json ContingencyResult::to_json() const {
  return Json{{"row_attribute", row_attribute},
              {"column_attribute", column_attribute},
              {"row_levels", row_levels},
              {"column_levels", column_levels},
              {"observed", observed},
              {"expected", expected},
              {"chi_square", chi_square},
              {"df", df},
              {"p", p},
              {"n", n},
              {"low_expected_warning", low_expected_warning},
              {"notes", notes}};
}

// ---- Factorial ANOVA -------------------------------------------------------

namespace {

struct DesignColumn {
  std::size_t term;  // 0 = intercept
  std::string name;
};

void combinations(std::size_t n, std::size_t k, std::size_t start, std::vector<std::size_t>& cur,
                  std::vector<std::vector<std::size_t>>& out) {
  if (cur.size() == k) {
    out.push_back(cur);
    return;
  }
  for (std::size_t i = start; i < n; ++i) {
    cur.push_back(i);
    combinations(n, k, i + 1, cur, out);
    cur.pop_back();
  }
}

}  // namespace

AnovaReport anova_fit(const std::string& response, const std::vector<double>& y, const std::vector<FactorData>& factors,
                      std::size_t max_order) {
  AnovaReport rep;
  rep.response = response;
  rep.max_order = max_order;
  const std::size_t n = y.size();
  rep.n = n;
  if (factors.empty()) throw ConfigError("ANOVA needs at least one factor");
  if (max_order < 1 || max_order > factors.size())
    throw ConfigError("max_order must lie in [1, number of factors]");
  for (const auto& f : factors) {
    rep.factors.push_back(f.name);
    if (f.values.size() != n) throw ConfigError("factor '" + f.name + "' length does not match the response");
    if (f.levels.size() < 2) throw InsufficientDataError("factor '" + f.name + "' has fewer than two levels");
  }
  for (double v : y)
    if (!std::isfinite(v)) throw NumericError("non-finite response value");

  // Level index per unit and factor.
  std::vector<std::vector<std::size_t>> level(factors.size(), std::vector<std::size_t>(n));
  for (std::size_t f = 0; f < factors.size(); ++f) {
    std::map<std::string, std::size_t> idx;
    for (std::size_t l = 0; l < factors[f].levels.size(); ++l) idx[factors[f].levels[l]] = l;
    for (std::size_t i = 0; i < n; ++i) {
      auto it = idx.find(factors[f].values[i]);
      if (it == idx.end()) throw ConfigError("value '" + factors[f].values[i] + "' is not a level of '" + factors[f].name + "'");
      level[f][i] = it->second;
    }
  }

  // Terms in model order: main effects, then two-way, ... up to max_order.
  std::vector<std::vector<std::size_t>> terms;
  for (std::size_t order = 1; order <= max_order; ++order) {
    std::vector<std::size_t> cur;
    combinations(factors.size(), order, 0, cur, terms);
  }

  std::vector<DesignColumn> columns{{0, "(Intercept)"}};
  std::vector<std::vector<std::size_t>> column_levels{{}};  // per column, non-reference level per factor of its term
  for (std::size_t t = 0; t < terms.size(); ++t) {
    const auto& term = terms[t];
    std::vector<std::size_t> pick(term.size(), 1);
    while (true) {
      std::string name;
      for (std::size_t k = 0; k < term.size(); ++k) {
        if (k) name += " & ";
        name += factors[term[k]].name + ": " + factors[term[k]].levels[pick[k]];
      }
      columns.push_back({t + 1, name});
      column_levels.push_back(pick);
      // Odometer over non-reference levels, last factor fastest.
      std::size_t k = term.size();
      while (k > 0) {
        --k;
        if (++pick[k] < factors[term[k]].levels.size()) break;
        pick[k] = 1;
        if (k == 0) {
          k = term.size() + 1;
          break;
        }
      }
      if (k == term.size() + 1) break;
    }
  }
  const std::size_t p = columns.size();

  Eigen::MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
  for (std::size_t i = 0; i < n; ++i) {
    x(static_cast<Eigen::Index>(i), 0) = 1.0;
    for (std::size_t c = 1; c < p; ++c) {
      const auto& term = terms[columns[c].term - 1];
      double v = 1.0;
      for (std::size_t k = 0; k < term.size(); ++k)
        if (level[term[k]][i] != column_levels[c][k]) {
          v = 0.0;
          break;
        }
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = v;
    }
  }
  Eigen::VectorXd qty = Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(n));
  const double mean = qty.mean();
  rep.total_ss = (qty.array() - mean).square().sum();

  // Column-sequential Householder QR; a column whose residual (after the
  // kept columns before it) vanishes is aliased and dropped.
  std::vector<std::size_t> kept;
  Eigen::Index rank = 0;
  const auto rows = static_cast<Eigen::Index>(n);
  Eigen::VectorXd workspace(static_cast<Eigen::Index>(p));
  for (std::size_t c = 0; c < p; ++c) {
    const auto col = static_cast<Eigen::Index>(c);
    const double original = x.col(col).norm();
    if (rank >= rows) {
      rep.notes.push_back("dropped aliased column '" + columns[c].name + "'");
      continue;
    }
    auto tail = x.col(col).tail(rows - rank);
    if (original == 0.0 || tail.norm() <= 1e-9 * original) {
      rep.notes.push_back("dropped aliased column '" + columns[c].name + "'");
      continue;
    }
    double tau = 0, beta = 0;
    Eigen::VectorXd essential(rows - rank - 1);
    tail.makeHouseholder(essential, tau, beta);
    // Apply H to this column, later columns and y.
    x.col(col).tail(rows - rank).setZero();
    x(rank, col) = beta;
    if (c + 1 < p) {
      auto right = x.block(rank, col + 1, rows - rank, static_cast<Eigen::Index>(p - c - 1));
      right.applyHouseholderOnTheLeft(essential, tau, workspace.data());
    }
    qty.tail(rows - rank).applyHouseholderOnTheLeft(essential, tau, workspace.data());
    kept.push_back(c);
    ++rank;
  }

  const auto r = static_cast<std::size_t>(rank);
  if (n <= r) throw InsufficientDataError("ANOVA needs more observations (" + std::to_string(n) + ") than model df (" +
                                          std::to_string(r) + ")");
  rep.residual_df = n - r;
  rep.residual_ss = qty.tail(rows - rank).squaredNorm();
  rep.residual_ms = rep.residual_ss / static_cast<double>(rep.residual_df);

  std::vector<AnovaTerm> term_rows(terms.size());
  for (std::size_t t = 0; t < terms.size(); ++t) {
    std::string name;
    for (std::size_t k = 0; k < terms[t].size(); ++k) name += (k ? ":" : "") + factors[terms[t][k]].name;
    term_rows[t].name = name;
  }
  for (std::size_t k = 0; k < r; ++k) {
    const auto t = columns[kept[k]].term;
    if (t == 0) continue;
    term_rows[t - 1].df += 1;
    term_rows[t - 1].ss += qty(static_cast<Eigen::Index>(k)) * qty(static_cast<Eigen::Index>(k));
  }
  // Rounding leaves ~eps^2 |y|^2 behind in an exact fit.
  const double zero_ss = 1e-24 * std::max(1.0, std::accumulate(y.begin(), y.end(), 0.0, [](double a, double v) { return a + v * v; }));
  rep.degenerate = rep.residual_ss <= zero_ss;
  if (rep.degenerate) rep.notes.push_back("residual variance is zero; F statistics are degenerate");
  for (auto& term : term_rows) {
    if (term.df == 0) {
      rep.notes.push_back("term '" + term.name + "' has no estimable columns");
      rep.terms.push_back(term);
      continue;
    }
    term.ms = term.ss / static_cast<double>(term.df);
    if (rep.degenerate) {
      const bool effect = term.ss > zero_ss;
      term.f = effect ? std::numeric_limits<double>::infinity() : 0.0;
      term.p = effect ? 0.0 : 1.0;
    } else {
      term.f = term.ms / rep.residual_ms;
      term.p = f_upper_p(term.f, static_cast<double>(term.df), static_cast<double>(rep.residual_df));
    }
    rep.terms.push_back(term);
  }

  // Coefficients: beta = R^{-1} Q'y, Cov = sigma^2 (R'R)^{-1}.
  Eigen::MatrixXd rmat(rank, rank);
  for (Eigen::Index a = 0; a < rank; ++a)
    for (Eigen::Index b = 0; b < rank; ++b)
      rmat(a, b) = b >= a ? x(a, static_cast<Eigen::Index>(kept[static_cast<std::size_t>(b)])) : 0.0;
  const Eigen::VectorXd beta = rmat.triangularView<Eigen::Upper>().solve(qty.head(rank));
  const Eigen::MatrixXd rinv =
      rmat.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(rank, rank));
  for (Eigen::Index k = 0; k < rank; ++k) {
    AnovaCoefficient c;
    c.name = columns[kept[static_cast<std::size_t>(k)]].name;
    c.estimate = beta(k);
    c.se = std::sqrt(rep.residual_ms * rinv.row(k).squaredNorm());
    if (c.se > 0) {
      c.t = c.estimate / c.se;
      c.p = t_two_sided_p(c.t, static_cast<double>(rep.residual_df));
    } else {
      c.t = c.estimate == 0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), c.estimate);
      c.p = c.estimate == 0 ? 1.0 : 0.0;
    }
    rep.coefficients.push_back(std::move(c));
  }
  return rep;
}

Json AnovaReport::to_json() const {
  Json t = Json::array();
  for (const auto& x : terms)
    t.push_back(Json{{"name", x.name}, {"df", x.df}, {"ss", x.ss}, {"ms", x.ms}, {"f", finite_or_null(x.f)}, {"p", x.p}});
  Json c = Json::array();
  for (const auto& x : coefficients)
    c.push_back(Json{{"name", x.name}, {"estimate", x.estimate}, {"se", x.se}, {"t", finite_or_null(x.t)}, {"p", x.p}});
  return Json{{"response", response},
              {"factors", factors},
              {"max_order", max_order},
              {"n", n},
              {"sum_of_squares", "sequential (Type I), in factor order"},
              {"terms", t},
              {"residual", {{"df", residual_df}, {"ss", residual_ss}, {"ms", residual_ms}}},
              {"total_ss", total_ss},
              {"coefficients", c},
              {"degenerate", degenerate},
              {"notes", notes}};
}

// ---- Dataset-facing operations ---------------------------------------------

std::vector<std::string> natural_level_order(const std::string& attribute, std::vector<std::string> levels) {
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  if (attribute == kDayOfWeek) {
    std::stable_sort(levels.begin(), levels.end(), [](const std::string& a, const std::string& b) {
      return weekday_from_label(a).value_or(7) < weekday_from_label(b).value_or(7);
    });
  }
  return levels;
}

namespace {

std::vector<std::vector<AttributeValue>> collect_units(const Dataset& dataset, const SelectionSet& selection,
                                                       const std::vector<std::string>& attrs, const AnalysisScope& scope) {
  if (selection.dataset_version != dataset.version())
    throw StaleSelectionError("selection refers to a different dataset version");
  if (selection.empty()) throw InsufficientDataError("selection is empty");
  std::vector<AttributeAccessor> acc;
  bool sequence_units = !scope.event_type.has_value();
  for (const auto& a : attrs) {
    acc.emplace_back(dataset, a);
    if (acc.back().spec().level == AttributeLevel::event) sequence_units = false;
  }
  std::vector<std::vector<AttributeValue>> units;
  if (sequence_units) {
    for (const auto& id : selection.sequence_ids) {
      const auto* s = dataset.find_sequence(id);
      if (!s) throw NotFoundError("selected sequence '" + id + "' not in dataset");
      std::vector<AttributeValue> row;
      for (const auto& a : acc) row.push_back(a(*s));
      units.push_back(std::move(row));
    }
  } else {
    for (const auto& [id, _] : selection.occurrences) {
      auto loc = dataset.locate(id);
      if (!loc) throw NotFoundError("selected occurrence not in dataset");
      const auto& s = dataset.sequences()[loc->sequence_index];
      const auto& e = s.events[loc->event_index];
      if (scope.event_type && e.event_type != *scope.event_type) continue;
      std::vector<AttributeValue> row;
      for (const auto& a : acc) row.push_back(a(s, e));
      units.push_back(std::move(row));
    }
  }
  if (units.empty()) throw InsufficientDataError("no units of analysis in the selection");
  return units;
}

void require_numeric(const Dataset& dataset, const std::string& name) {
  if (dataset.schema().at(name).kind != AttributeKind::numerical)
    throw TypeError("attribute '" + name + "' must be numerical");
}

void require_categorical(const Dataset& dataset, const std::string& name) {
  if (dataset.schema().at(name).kind != AttributeKind::categorical)
    throw TypeError("attribute '" + name + "' must be categorical");
}

}  // namespace

MeanTestTable mean_comparison(const Dataset& dataset, const SelectionSet& selection, const std::string& response,
                              const std::string& grouping, const AnalysisScope& scope) {
  require_numeric(dataset, response);
  require_categorical(dataset, grouping);
  auto units = collect_units(dataset, selection, {response, grouping}, scope);
  std::map<std::string, std::vector<double>> by_group;
  for (const auto& u : units) {
    if (u[0].is_missing() || u[1].is_missing()) continue;
    by_group[u[1].category()].push_back(u[0].number());
  }
  std::vector<std::string> labels;
  for (const auto& [l, _] : by_group) labels.push_back(l);
  std::vector<std::pair<std::string, std::vector<double>>> groups;
  for (const auto& l : natural_level_order(grouping, labels)) groups.emplace_back(l, std::move(by_group[l]));
  return mean_table(response, grouping, groups);
}

ContingencyResult contingency(const Dataset& dataset, const SelectionSet& selection, const std::string& attr_a,
                              const std::string& attr_b, const AnalysisScope& scope) {
  require_categorical(dataset, attr_a);
  require_categorical(dataset, attr_b);
  auto units = collect_units(dataset, selection, {attr_a, attr_b}, scope);
  std::vector<std::string> ra, cb;
  std::size_t excluded = 0;
  for (const auto& u : units) {
    if (u[0].is_missing() || u[1].is_missing()) continue;
    ra.push_back(u[0].category());
    cb.push_back(u[1].category());
  }
  excluded = units.size() - ra.size();
  auto rows = natural_level_order(attr_a, ra);
  auto cols = natural_level_order(attr_b, cb);
  if (rows.size() < 2 || cols.size() < 2)
    throw InsufficientDataError("contingency of '" + attr_a + "' and '" + attr_b + "' needs two observed levels each");
  std::map<std::string, std::size_t> ri, ci;
  for (std::size_t i = 0; i < rows.size(); ++i) ri[rows[i]] = i;
  for (std::size_t j = 0; j < cols.size(); ++j) ci[cols[j]] = j;
  std::vector<std::vector<double>> obs(rows.size(), std::vector<double>(cols.size(), 0.0));
  for (std::size_t k = 0; k < ra.size(); ++k) obs[ri[ra[k]]][ci[cb[k]]] += 1.0;
  auto res = chi_square_test(rows, cols, std::move(obs));
  res.row_attribute = attr_a;
  res.column_attribute = attr_b;
  if (excluded) res.notes.push_back(std::to_string(excluded) + " units with a missing value excluded");
  return res;
}

AnovaReport anova(const Dataset& dataset, const SelectionSet& selection, const std::string& response,
                  const std::vector<std::string>& factors, std::size_t max_order, const AnalysisScope& scope) {
  require_numeric(dataset, response);
  for (const auto& f : factors) require_categorical(dataset, f);
  std::vector<std::string> attrs{response};
  attrs.insert(attrs.end(), factors.begin(), factors.end());
  auto units = collect_units(dataset, selection, attrs, scope);
  std::vector<double> y;
  std::vector<FactorData> data(factors.size());
  for (std::size_t f = 0; f < factors.size(); ++f) data[f].name = factors[f];
  std::size_t excluded = 0;
  for (const auto& u : units) {
    if (std::any_of(u.begin(), u.end(), [](const auto& v) { return v.is_missing(); })) {
      ++excluded;
      continue;
    }
    y.push_back(u[0].number());
    for (std::size_t f = 0; f < factors.size(); ++f) data[f].values.push_back(u[f + 1].category());
  }
  for (auto& f : data) f.levels = natural_level_order(f.name, f.values);
  auto rep = anova_fit(response, y, data, max_order);
  if (excluded) rep.notes.push_back(std::to_string(excluded) + " units with a missing value excluded");
  return rep;
}

}  // namespace evseq
