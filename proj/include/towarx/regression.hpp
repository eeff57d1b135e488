#pragma once

// Ordinary least squares with classical inference statistics.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/special_functions/beta.hpp>

#include "towarx/error.hpp"
#include "towarx/features.hpp"

namespace towarx {

/// RSS at or below this fraction of y'y is treated as an exact fit (RSS = 0).
inline constexpr double kExactFitTolerance = 1e-24;

/// Two-sided tail probability of Student's t with `df` degrees of freedom,
/// P(|T| >= |t|) = I_{df/(df+t^2)}(df/2, 1/2).
inline double t_pvalue(double t, double df) {
  if (!(df >= 1.0)) throw InputError("t_pvalue: degrees of freedom must be >= 1");
  if (std::isnan(t)) return std::numeric_limits<double>::quiet_NaN();
  if (std::isinf(t)) return 0.0;
  const double t2 = t * t;
  if (t2 == 0.0) return 1.0;
  const double x = df / (df + t2);
  return std::clamp(boost::math::ibeta(df / 2.0, 0.5, x), 0.0, 1.0);
}

/// Upper tail P(F >= f) of the F distribution with (d1, d2) degrees of freedom.
inline double f_pvalue(double f, double d1, double d2) {
  if (!(d1 >= 1.0) || !(d2 >= 1.0)) throw InputError("f_pvalue: degrees of freedom must be >= 1");
  if (std::isnan(f)) return std::numeric_limits<double>::quiet_NaN();
  if (std::isinf(f)) return 0.0;
  if (f <= 0.0) return 1.0;
  const double x = d2 / (d2 + d1 * f);
  return std::clamp(boost::math::ibeta(d2 / 2.0, d1 / 2.0, x), 0.0, 1.0);
}

struct InformationCriteria {
  double aic = 0.0;
  double bic = 0.0;
};

/// Gaussian-likelihood criteria n ln(RSS/n) + 2k and n ln(RSS/n) + k ln n.
/// RSS = 0 yields negative infinity for both.
inline InformationCriteria information_criteria(double rss, std::size_t n, std::size_t k) {
  if (k < 1 || n <= k) throw InputError("information_criteria requires n > k >= 1");
  if (!(rss >= 0.0)) throw InputError("information_criteria requires RSS >= 0");
  if (rss == 0.0) {
    constexpr double ninf = -std::numeric_limits<double>::infinity();
    return {ninf, ninf};
  }
  const double nd = static_cast<double>(n);
  const double kd = static_cast<double>(k);
  const double fit = nd * std::log(rss / nd);
  return {fit + 2.0 * kd, fit + kd * std::log(nd)};
}

struct FittedModel {
  SegmentKey segment;
  Scenario scenario = Scenario::PlusIrradiation;
  LagSpec spec;
  std::vector<ColumnDescriptor> columns;         // retained columns, design order
  std::vector<ColumnDescriptor> dropped_columns; // removed as numerically dependent
  std::vector<double> coefficients;
  std::vector<double> std_errors;
  std::vector<double> t_values;
  std::vector<double> p_values;
  std::size_t n = 0;
  std::size_t k = 0;
  double rss = 0.0;
  double sigma2 = 0.0;
  double r2 = 0.0;
  double adj_r2 = 0.0;
  double f_stat = 0.0;
  double f_pvalue = 0.0;
  double aic = 0.0;
  double bic = 0.0;
  bool exact_fit = false;
  std::vector<double> residuals;
  std::vector<std::string> warnings;

  std::vector<HourOfWeek> dummies() const {
    std::vector<HourOfWeek> out;
    for (const auto& c : columns) {
      if (c.kind == ColumnKind::CalendarDummy) out.push_back(c.slot);
    }
    return out;
  }

  std::optional<std::size_t> find(const ColumnDescriptor& col) const {
    for (std::size_t i = 0; i < columns.size(); ++i) {
      if (columns[i] == col) return i;
    }
    return std::nullopt;
  }

  double coefficient(const ColumnDescriptor& col) const {
    const auto i = find(col);
    return i ? coefficients[*i] : 0.0;
  }
};

namespace detail {

struct QrSolution {
  Eigen::VectorXd beta;
  Eigen::VectorXd inv_gram_diag; // diag((X'X)^-1) in column order
  Eigen::Index rank = 0;
  std::vector<Eigen::Index> kept;
};

inline QrSolution solve_pivoted(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  const auto n = x.rows();
  const auto k = x.cols();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(n, k);
  qr.setThreshold(static_cast<double>(n) * std::numeric_limits<double>::epsilon());
  qr.compute(x);
  QrSolution sol;
  sol.rank = qr.rank();
  const auto& perm = qr.colsPermutation().indices();
  for (Eigen::Index j = 0; j < sol.rank; ++j) sol.kept.push_back(perm(j));
  std::sort(sol.kept.begin(), sol.kept.end());
  if (sol.rank < k) return sol;

  sol.beta = qr.solve(y);
  const Eigen::MatrixXd r = qr.matrixR().topLeftCorner(k, k).template triangularView<Eigen::Upper>();
  const Eigen::MatrixXd rinv =
      r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(k, k));
  sol.inv_gram_diag.resize(k);
  for (Eigen::Index j = 0; j < k; ++j) sol.inv_gram_diag(perm(j)) = rinv.row(j).squaredNorm();
  return sol;
}

} // namespace detail

/// Least squares fit by column-pivoted Householder QR. Columns that are
/// numerically dependent (|R_jj| <= n * eps * max column norm) are dropped,
/// recorded in `dropped_columns` and the remainder refitted.
inline FittedModel fit_ols(const DesignMatrix& dm) {
  const auto n = dm.x.rows();
  const auto k_all = dm.x.cols();
  if (static_cast<std::size_t>(k_all) != dm.columns.size() || dm.y.size() != n) {
    throw InputError("fit_ols: design matrix dimensions disagree");
  }
  if (std::find(dm.columns.begin(), dm.columns.end(), ColumnDescriptor::intercept()) == dm.columns.end()) {
    throw InputError("fit_ols: design matrix has no intercept column");
  }
  if (n <= k_all) {
    throw DataError("fit_ols: insufficient data (" + std::to_string(n) + " rows for " +
                    std::to_string(k_all) + " columns)");
  }

  FittedModel m;
  m.segment = dm.segment;
  m.scenario = dm.scenario;
  m.spec = dm.spec;

  auto sol = detail::solve_pivoted(dm.x, dm.y);
  Eigen::MatrixXd x_kept;
  const Eigen::MatrixXd* x = &dm.x;
  if (sol.rank < k_all) {
    std::vector<bool> keep(static_cast<std::size_t>(k_all), false);
    for (auto j : sol.kept) keep[static_cast<std::size_t>(j)] = true;
    std::string names;
    for (Eigen::Index j = 0; j < k_all; ++j) {
      const auto& c = dm.columns[static_cast<std::size_t>(j)];
      if (keep[static_cast<std::size_t>(j)]) {
        m.columns.push_back(c);
      } else {
        m.dropped_columns.push_back(c);
        names += (names.empty() ? "" : ", ") + c.label();
      }
    }
    m.warnings.push_back("rank-deficient design: dropped " + names);
    x_kept.resize(n, static_cast<Eigen::Index>(sol.kept.size()));
    for (std::size_t j = 0; j < sol.kept.size(); ++j) {
      x_kept.col(static_cast<Eigen::Index>(j)) = dm.x.col(sol.kept[j]);
    }
    x = &x_kept;
    sol = detail::solve_pivoted(x_kept, dm.y);
    if (sol.rank < x_kept.cols()) throw NumericalError("fit_ols: rank determination did not converge");
    if (!m.find(ColumnDescriptor::intercept())) {
      m.warnings.push_back("intercept column was dropped as dependent");
    }
  } else {
    m.columns = dm.columns;
  }

  if (!sol.beta.allFinite()) throw NumericalError("fit_ols: non-finite coefficients");
  const auto k = x->cols();
  m.n = static_cast<std::size_t>(n);
  m.k = static_cast<std::size_t>(k);
  const Eigen::VectorXd resid = dm.y - (*x) * sol.beta;
  double rss = resid.squaredNorm();
  const double yy = dm.y.squaredNorm();
  if (rss <= kExactFitTolerance * yy) {
    rss = 0.0;
    m.exact_fit = true;
  }
  m.rss = rss;
  m.sigma2 = rss / static_cast<double>(n - k);
  const double df = static_cast<double>(n - k);
  const double ynorm = std::sqrt(yy);

  m.coefficients.resize(static_cast<std::size_t>(k));
  m.std_errors.resize(static_cast<std::size_t>(k));
  m.t_values.resize(static_cast<std::size_t>(k));
  m.p_values.resize(static_cast<std::size_t>(k));
  for (Eigen::Index j = 0; j < k; ++j) {
    const auto u = static_cast<std::size_t>(j);
    const double b = sol.beta(j);
    const double se = std::sqrt(m.sigma2 * sol.inv_gram_diag(j));
    m.coefficients[u] = b;
    m.std_errors[u] = se;
    if (se > 0.0) {
      m.t_values[u] = b / se;
    } else {
      // Exact fit: a coefficient that moves the fit is infinitely significant.
      const bool contributes = std::abs(b) * x->col(j).norm() > 1e-8 * ynorm;
      m.t_values[u] = contributes ? std::copysign(std::numeric_limits<double>::infinity(), b) : 0.0;
    }
    m.p_values[u] = t_pvalue(m.t_values[u], df);
  }

  const double mean = dm.y.mean();
  const double tss = (dm.y.array() - mean).square().sum();
  if (tss > 0.0) {
    m.r2 = std::clamp(1.0 - rss / tss, 0.0, 1.0);
  } else {
    m.r2 = rss == 0.0 ? 1.0 : 0.0;
  }
  m.adj_r2 = 1.0 - (1.0 - m.r2) * static_cast<double>(n - 1) / df;
  if (k > 1) {
    const double d1 = static_cast<double>(k - 1);
    if (rss == 0.0) {
      m.f_stat = tss > 0.0 ? std::numeric_limits<double>::infinity()
                           : std::numeric_limits<double>::quiet_NaN();
    } else {
      m.f_stat = ((tss - rss) / d1) / (rss / df);
      if (m.f_stat < 0.0) m.f_stat = 0.0;
    }
    m.f_pvalue = f_pvalue(m.f_stat, d1, df);
  } else {
    m.f_stat = std::numeric_limits<double>::quiet_NaN();
    m.f_pvalue = std::numeric_limits<double>::quiet_NaN();
  }
  const auto ic = information_criteria(rss, m.n, m.k);
  m.aic = ic.aic;
  m.bic = ic.bic;
  m.residuals.assign(resid.data(), resid.data() + resid.size());
  return m;
}

/// Model prediction for one regressor row laid out as `model.columns`.
template <typename Row>
double predict_row(const FittedModel& model, const Row& row) {
  double acc = 0.0;
  for (std::size_t j = 0; j < model.coefficients.size(); ++j) acc += model.coefficients[j] * row[j];
  return acc;
}

} // namespace towarx
