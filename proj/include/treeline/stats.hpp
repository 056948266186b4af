#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "treeline/binary_tree.hpp"
#include "treeline/error.hpp"
#include "treeline/tree_line.hpp"

namespace treeline {

namespace detail {

// Continued fraction for the incomplete beta function (modified Lentz).
inline double beta_cf(double a, double b, double x) {
  constexpr double kTiny = 1e-30;
  constexpr double kEps = 1e-15;
  constexpr int kMaxIter = 500;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) return h;
  }
  fail("numeric-error", "incomplete beta continued fraction did not converge");
}

}  // namespace detail

/// Regularized incomplete beta function I_x(a, b), a, b > 0, x in [0, 1].
inline double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) fail("invalid-argument", "beta parameters must be positive");
  if (std::isnan(x) || x < 0.0 || x > 1.0) {
    fail("invalid-argument", "incomplete beta argument outside [0, 1]");
  }
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double front = std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                                a * std::log(x) + b * std::log1p(-x));
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * detail::beta_cf(a, b, x) / a;
  }
  return 1.0 - front * detail::beta_cf(b, a, 1.0 - x) / b;
}

/// Two-sided tail probability P(|T| >= |t|) for Student's t with df degrees
/// of freedom, via I_x(df/2, 1/2) at x = df / (df + t^2).
inline double student_t_two_sided_p(double t, std::size_t df) {
  if (df == 0) fail("invalid-argument", "degrees of freedom must be positive");
  if (std::isnan(t)) fail("invalid-argument", "t statistic is NaN");
  if (std::isinf(t)) return 0.0;
  if (t == 0.0) return 1.0;
  const double nu = static_cast<double>(df);
  return regularized_incomplete_beta(nu / 2.0, 0.5, nu / (nu + t * t));
}

/// Ordinary least-squares fit of y on x with a slope significance test.
struct RegressionResult {
  double slope = 0.0;
  double intercept = 0.0;
  double t_stat = 0.0;
  std::size_t df = 0;
  double p_value = 1.0;
  bool exact_fit = false;  // residuals are (numerically) all zero
};

/// Simple linear regression of y on x. Requires n >= 3 matching samples and
/// nonconstant x. A constant y yields slope 0 and p-value 1; an exact affine
/// fit with nonzero slope yields p-value 0 with the exact_fit flag set.
inline RegressionResult linreg(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) fail("invalid-argument", "x and y must have equal length");
  const std::size_t n = x.size();
  if (n < 3) fail("invalid-argument", "regression needs at least 3 samples");
  for (double v : x) {
    if (!std::isfinite(v)) fail("invalid-argument", "non-finite covariate value");
  }
  for (double v : y) {
    if (!std::isfinite(v)) fail("invalid-argument", "non-finite response value");
  }
  const auto [x_min, x_max] = std::minmax_element(x.begin(), x.end());
  if (*x_min == *x_max) fail("no-variance", "covariate is constant; slope is undefined");

  RegressionResult res;
  res.df = n - 2;

  double mean_x = 0.0, mean_y = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mean_x += x[i];
    mean_y += y[i];
  }
  mean_x /= static_cast<double>(n);
  mean_y /= static_cast<double>(n);

  const auto [y_min, y_max] = std::minmax_element(y.begin(), y.end());
  if (*y_min == *y_max) {
    res.slope = 0.0;
    res.intercept = mean_y;
    res.t_stat = 0.0;
    res.p_value = 1.0;
    res.exact_fit = true;
    return res;
  }

  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mean_x;
    const double dy = y[i] - mean_y;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }

  res.slope = sxy / sxx;
  res.intercept = mean_y - res.slope * mean_x;
  const double ssr = std::max(0.0, syy - res.slope * sxy);
  res.exact_fit = ssr <= 1e-12 * syy;
  if (res.exact_fit) {
    if (res.slope == 0.0) {
      res.t_stat = 0.0;
      res.p_value = 1.0;
    } else {
      res.t_stat = std::copysign(std::numeric_limits<double>::infinity(), res.slope);
      res.p_value = 0.0;
    }
    return res;
  }
  const double se = std::sqrt(ssr / static_cast<double>(res.df) / sxx);
  res.t_stat = res.slope / se;
  res.p_value = student_t_two_sided_p(res.t_stat, res.df);
  return res;
}

/// One row per data tree: identity, covariates, per-component scores and
/// cumulative union scores for components 1..K.
struct ScoreRow {
  std::string subject_id;
  std::optional<double> age;
  std::string sex;
  std::vector<std::uint64_t> pc_scores;          // score on line k, k = 1..K
  std::vector<std::uint64_t> cumulative_scores;  // union score over lines 1..k
};

struct ScoreTable {
  std::size_t components = 0;
  std::vector<ScoreRow> rows;
};

/// Scores of every data tree on the first K component lines, individual and
/// cumulative. Subject ids fall back to tree-<ordinal> when the dataset
/// carries no per-tree info.
inline ScoreTable build_score_table(const TreeDataset& data, std::span<const TreeLine> lines,
                                    std::size_t k) {
  if (k < 1 || k > lines.size()) {
    fail("invalid-argument", "requested component count exceeds the available tree-lines");
  }
  ScoreTable table;
  table.components = k;
  table.rows.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    ScoreRow row;
    if (data.has_info()) {
      row.subject_id = data.info()[i].subject_id;
      row.age = data.info()[i].age;
      row.sex = data.info()[i].sex;
    } else {
      row.subject_id = "tree-" + std::to_string(i + 1);
    }
    const BinaryTree& t = data.tree(i);
    for (std::size_t j = 1; j <= k; ++j) {
      row.pc_scores.push_back(score(t, lines[j - 1]));
      row.cumulative_scores.push_back(union_score(t, lines.subspan(0, j)));
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

/// Regression of one component's scores against a covariate, plus how many
/// rows entered the fit and how many were dropped for a missing covariate.
struct ComponentRegression {
  std::string label;        // PC3, PC1u2u3, ...
  bool cumulative = false;  // individual score vs union score
  std::size_t k = 0;        // component (or prefix length) the scores came from
  RegressionResult fit;
  std::size_t n_used = 0;
  std::size_t n_dropped = 0;
};

inline std::string component_label(bool cumulative, std::size_t k) {
  if (!cumulative) return "PC" + std::to_string(k);
  std::string label = "PC1";
  for (std::size_t j = 2; j <= k; ++j) label += "u" + std::to_string(j);
  return label;
}

/// Score-versus-covariate regressions in report order: individual components
/// PC1..PCK first, then the cumulative unions PC1u2 .. PC1u..uK. Only the
/// age covariate exists in the dataset schema. Rows without the covariate
/// are dropped per fit.
inline std::vector<ComponentRegression> regress_components(const TreeDataset& data,
                                                           std::span<const TreeLine> lines,
                                                           std::size_t k,
                                                           const std::string& covariate) {
  if (covariate != "age") {
    fail("missing-covariate", "unknown covariate '" + covariate + "' (expected 'age')");
  }
  if (!data.has_info()) {
    fail("missing-covariate", "dataset carries no per-tree covariate records");
  }
  const ScoreTable table = build_score_table(data, lines, k);

  auto fit_one = [&](bool cumulative, std::size_t comp) {
    ComponentRegression out;
    out.label = component_label(cumulative, comp);
    out.cumulative = cumulative;
    out.k = comp;
    std::vector<double> xs, ys;
    xs.reserve(table.rows.size());
    ys.reserve(table.rows.size());
    for (const ScoreRow& row : table.rows) {
      if (!row.age.has_value()) {
        ++out.n_dropped;
        continue;
      }
      xs.push_back(*row.age);
      ys.push_back(static_cast<double>(cumulative ? row.cumulative_scores[comp - 1]
                                                  : row.pc_scores[comp - 1]));
    }
    out.n_used = xs.size();
    out.fit = linreg(xs, ys);
    return out;
  };

  std::vector<ComponentRegression> report;
  for (std::size_t comp = 1; comp <= k; ++comp) report.push_back(fit_one(false, comp));
  for (std::size_t comp = 2; comp <= k; ++comp) report.push_back(fit_one(true, comp));
  return report;
}

}  // namespace treeline
