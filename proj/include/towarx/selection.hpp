#pragma once

// Model identification: lag orders by BIC over an exhaustive grid, then
// hour-of-week indicators by p-value gated forward selection.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

#include "towarx/features.hpp"
#include "towarx/regression.hpp"

namespace towarx {

struct SelectionConfig {
  double p_entry = 0.05;
  double variance_threshold = 1e-12;
  int max_dummies = 12;
  int na_min = 1, na_max = kMaxLoadLag;
  int nb_min = 0, nb_max = kMaxWeatherLag;
  int nc_min = 0, nc_max = kMaxWeatherLag;
  // Extra lag searches run with the admitted dummies held in the model.
  int max_refinements = 3;

  void validate() const {
    if (!(p_entry > 0.0 && p_entry < 1.0)) throw InputError("p_entry must lie in (0, 1)");
    if (!(variance_threshold >= 0.0)) throw InputError("variance_threshold must be >= 0");
    if (max_dummies < 0) throw InputError("max_dummies must be >= 0");
    if (max_refinements < 0) throw InputError("max_refinements must be >= 0");
    if (na_min < 1 || na_max > kMaxLoadLag || na_min > na_max) throw InputError("invalid na pool");
    if (nb_min < 0 || nb_max > kMaxWeatherLag || nb_min > nb_max) throw InputError("invalid nb pool");
    if (nc_min < 0 || nc_max > kMaxWeatherLag || nc_min > nc_max) throw InputError("invalid nc pool");
  }
};

/// Columns whose sample variance reaches the threshold; the intercept is
/// always kept.
inline std::vector<ColumnDescriptor> variance_filter(const DesignMatrix& dm, double threshold) {
  std::vector<ColumnDescriptor> kept;
  const auto n = dm.x.rows();
  for (Eigen::Index j = 0; j < dm.x.cols(); ++j) {
    const auto& col = dm.columns[static_cast<std::size_t>(j)];
    if (col.kind == ColumnKind::Intercept) {
      kept.push_back(col);
      continue;
    }
    double var = 0.0;
    if (n > 1) {
      const double mean = dm.x.col(j).mean();
      var = (dm.x.col(j).array() - mean).square().sum() / static_cast<double>(n - 1);
    }
    if (var >= threshold) kept.push_back(col);
  }
  return kept;
}

// ---------------------------------------------------------------------------
// Lag order search

struct LagCandidate {
  LagSpec spec;
  std::size_t k = 0; // parameters incl. intercept, after removing dependent columns
  double rss = 0.0;
  double bic = 0.0;
};

struct LagSearchResult {
  LagSpec best;
  std::size_t rows = 0;               // common row count
  std::vector<LagCandidate> candidates; // every spec evaluated
};

namespace detail {

/// RSS of the least squares fit on every leading column block of `x`:
/// result[p] is the RSS using columns [0, p). Columns numerically dependent
/// on their predecessors add nothing to the fit and are reported in
/// `dependent`; the factorisation is redone without them, since a Householder
/// step on a dependent column reflects along an arbitrary direction.
inline std::vector<double> prefix_rss(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                      std::vector<bool>& dependent) {
  const auto n = x.rows();
  const auto k = x.cols();
  dependent.assign(static_cast<std::size_t>(k), false);
  double max_norm = 0.0;
  for (Eigen::Index j = 0; j < k; ++j) max_norm = std::max(max_norm, x.col(j).norm());
  const double tol = static_cast<double>(n) * std::numeric_limits<double>::epsilon() * max_norm;

  std::vector<Eigen::Index> kept;
  Eigen::VectorXd qty;
  while (true) {
    kept.clear();
    for (Eigen::Index j = 0; j < k; ++j) {
      if (!dependent[static_cast<std::size_t>(j)]) kept.push_back(j);
    }
    Eigen::MatrixXd sub(n, static_cast<Eigen::Index>(kept.size()));
    for (std::size_t j = 0; j < kept.size(); ++j) sub.col(static_cast<Eigen::Index>(j)) = x.col(kept[j]);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(sub);
    const auto& r = qr.matrixQR();
    std::optional<std::size_t> first_dep;
    for (std::size_t j = 0; j < kept.size(); ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      if (std::abs(r(jj, jj)) <= tol) {
        first_dep = j;
        break;
      }
    }
    if (first_dep) {
      dependent[static_cast<std::size_t>(kept[*first_dep])] = true;
      continue;
    }
    qty = y;
    qty.applyOnTheLeft(qr.householderQ().adjoint());
    break;
  }

  // Kept column j contributes qty_j^2; RSS over a prefix is what remains.
  std::vector<double> out(static_cast<std::size_t>(k) + 1, 0.0);
  const auto m = static_cast<Eigen::Index>(kept.size());
  double tail = qty.tail(n - m).squaredNorm();
  std::vector<double> contrib(static_cast<std::size_t>(k), 0.0);
  for (Eigen::Index j = 0; j < m; ++j) contrib[static_cast<std::size_t>(kept[static_cast<std::size_t>(j)])] = qty(j) * qty(j);
  out[static_cast<std::size_t>(k)] = tail;
  for (Eigen::Index p = k - 1; p >= 0; --p) {
    tail += contrib[static_cast<std::size_t>(p)];
    out[static_cast<std::size_t>(p)] = tail;
  }
  return out;
}

inline Eigen::MatrixXd select_columns(const Eigen::MatrixXd& x, const std::vector<Eigen::Index>& cols) {
  Eigen::MatrixXd out(x.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = x.col(cols[j]);
  return out;
}

inline bool better(const LagCandidate& a, const LagCandidate& b) {
  if (a.bic != b.bic) return a.bic < b.bic;
  if (a.k != b.k) return a.k < b.k;
  return std::tie(a.spec.na, a.spec.nb, a.spec.nc) < std::tie(b.spec.na, b.spec.nb, b.spec.nc);
}

} // namespace detail

/// Evaluates every lag spec in the configured pools on the rows that are
/// valid at the largest spec, so all candidates see the same data, and picks
/// the minimum BIC. Ties go to fewer parameters, then the smallest
/// (na, nb, nc). `fixed_dummies` are included in every candidate.
inline LagSearchResult lag_search(const SeriesIndex& idx, const SegmentKey& segment, Scenario scenario,
                                  const SelectionConfig& config, RowFilter filter = RowFilter::Train,
                                  std::span<const HourOfWeek> fixed_dummies = {}) {
  config.validate();
  if (scenario == Scenario::PlusCalendar) {
    throw InputError("lag search runs on load-only, plus-temperature or plus-irradiation");
  }
  const bool with_t = uses_temperature(scenario);
  const bool with_i = uses_irradiation(scenario);
  const LagSpec widest{config.na_max, with_t ? config.nb_max : 0, with_i ? config.nc_max : 0};
  auto cols = design_columns(widest, scenario);
  const auto d0 = static_cast<Eigen::Index>(cols.size());
  for (const auto& slot : fixed_dummies) {
    if (slot.daytype() != segment.daytype) {
      throw InputError("dummy " + slot.label() + " does not belong to segment " + segment.name());
    }
    cols.push_back(ColumnDescriptor::dummy(slot));
  }
  const auto rows = eligible_rows(idx, segment, cols, filter);
  if (rows.empty()) {
    // Delegate for a descriptive error.
    (void)build_design_matrix(idx, segment, LagSpec{config.na_min, 0, 0}, Scenario::LoadOnly, {}, filter);
  }
  if (rows.size() <= cols.size() + 1) {
    throw DataError("segment " + segment.name() + ": only " + std::to_string(rows.size()) +
                    " rows are valid at the largest lag spec (" + std::to_string(cols.size()) +
                    " columns); reduce the lag pools");
  }
  const auto dm = assemble(idx, rows, cols);
  const double yy = dm.y.squaredNorm();
  const auto n = rows.size();

  // Column positions inside dm.x
  const Eigen::Index q0 = 1;
  const Eigen::Index t0 = q0 + widest.na;
  const Eigen::Index i0 = t0 + (with_t ? widest.nb + 1 : 0);

  LagSearchResult result;
  result.rows = n;
  std::optional<LagCandidate> best;
  const auto consider = [&](const LagSpec& spec, std::size_t k_nominal, double rss, std::size_t n_dependent) {
    LagCandidate c;
    c.spec = spec;
    c.k = k_nominal - n_dependent;
    c.rss = rss <= kExactFitTolerance * yy ? 0.0 : rss;
    c.bic = information_criteria(c.rss, n, c.k).bic;
    result.candidates.push_back(c);
    if (!best || detail::better(c, *best)) best = c;
  };

  std::vector<bool> dependent;
  for (int na = config.na_min; na <= config.na_max; ++na) {
    const int nb_lo = with_t ? config.nb_min : 0;
    const int nb_hi = with_t ? config.nb_max : 0;
    for (int nb = nb_lo; nb <= nb_hi; ++nb) {
      // The innermost varying block sits last so one QR covers all its sizes.
      std::vector<Eigen::Index> layout{0};
      for (Eigen::Index d = 0; d < static_cast<Eigen::Index>(fixed_dummies.size()); ++d) layout.push_back(d0 + d);
      for (int q = 1; q <= na; ++q) layout.push_back(q0 + q - 1);
      std::size_t fixed = layout.size();
      if (with_t && with_i) {
        for (int t = 0; t <= nb; ++t) layout.push_back(t0 + t);
        fixed = layout.size();
        for (int c = 0; c <= widest.nc; ++c) layout.push_back(i0 + c);
      } else if (with_t) {
        for (int t = 0; t <= widest.nb; ++t) layout.push_back(t0 + t);
      }
      const auto sub = detail::select_columns(dm.x, layout);
      const auto rss = detail::prefix_rss(sub, dm.y, dependent);
      const auto dep_before = [&](std::size_t p) {
        return static_cast<std::size_t>(std::count(dependent.begin(), dependent.begin() + static_cast<long>(p), true));
      };
      if (with_t && with_i) {
        for (int nc = config.nc_min; nc <= config.nc_max; ++nc) {
          const auto p = fixed + static_cast<std::size_t>(nc) + 1;
          consider({na, nb, nc}, p, rss[p], dep_before(p));
        }
      } else if (with_t) {
        for (int t = config.nb_min; t <= config.nb_max; ++t) {
          const auto p = fixed + static_cast<std::size_t>(t) + 1;
          consider({na, t, 0}, p, rss[p], dep_before(p));
        }
        break; // nb handled by the prefix sweep
      } else {
        consider({na, 0, 0}, fixed, rss[fixed], dep_before(fixed));
        break;
      }
    }
  }
  result.best = best->spec;
  return result;
}

inline LagSpec select_lag_orders(const SeriesIndex& idx, const SegmentKey& segment, Scenario scenario,
                                 const SelectionConfig& config, RowFilter filter = RowFilter::Train,
                                 std::span<const HourOfWeek> fixed_dummies = {}) {
  return lag_search(idx, segment, scenario, config, filter, fixed_dummies).best;
}

// ---------------------------------------------------------------------------
// Forward selection of hour-of-week indicators

struct TraceEntry {
  int step = 0;
  std::string candidate;
  double p_value = 1.0;
  double t_value = 0.0;
  double bic = 0.0; // BIC of the model with this candidate added
  bool accepted = false;
};

struct SelectionTrace {
  double p_entry = 0.05;
  int max_dummies = 12;
  std::vector<std::string> candidates; // after variance filtering, canonical order
  std::vector<TraceEntry> entries;
  std::vector<std::string> admitted; // admission order
  std::string stop_reason;
};

struct ForwardSelection {
  FittedModel model;
  SelectionTrace trace;
};

namespace detail {

struct CandidateScore {
  double coef = 0.0;
  double t = 0.0;
  double p = 1.0;
  double bic = std::numeric_limits<double>::infinity();
};

/// Effect of appending column `d` to a fitted least squares model: by
/// Frisch-Waugh-Lovell the new coefficient is r'e / r'r with r the part of
/// `d` orthogonal to the current columns and e the current residual.
inline CandidateScore score_candidate(const Eigen::HouseholderQR<Eigen::MatrixXd>& qr, Eigen::Index k,
                                      const Eigen::VectorXd& resid, const Eigen::VectorXd& d, double yy,
                                      double ynorm) {
  const auto n = d.size();
  Eigen::VectorXd v = d;
  v.applyOnTheLeft(qr.householderQ().adjoint());
  v.head(k).setZero();
  v.applyOnTheLeft(qr.householderQ());
  const double rr = v.squaredNorm();
  CandidateScore s;
  const double dd = d.squaredNorm();
  const double eps = std::numeric_limits<double>::epsilon();
  if (rr <= static_cast<double>(n) * eps * dd || dd == 0.0) return s; // dependent: no information
  s.coef = v.dot(resid) / rr;
  const Eigen::VectorXd e_new = resid - s.coef * v;
  double rss = e_new.squaredNorm();
  if (rss <= kExactFitTolerance * yy) rss = 0.0;
  const auto k_new = static_cast<std::size_t>(k + 1);
  const double df = static_cast<double>(n) - static_cast<double>(k_new);
  const double se = std::sqrt(rss / df / rr);
  if (se > 0.0) {
    s.t = s.coef / se;
  } else {
    const bool contributes = std::abs(s.coef) * std::sqrt(rr) > 1e-8 * ynorm;
    s.t = contributes ? std::copysign(std::numeric_limits<double>::infinity(), s.coef) : 0.0;
  }
  s.p = t_pvalue(s.t, df);
  s.bic = information_criteria(rss, static_cast<std::size_t>(n), k_new).bic;
  return s;
}

inline Eigen::MatrixXd columns_of(const DesignMatrix& dm, const std::vector<ColumnDescriptor>& cols) {
  Eigen::MatrixXd out(dm.x.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) {
    const auto it = std::find(dm.columns.begin(), dm.columns.end(), cols[j]);
    out.col(static_cast<Eigen::Index>(j)) = dm.x.col(it - dm.columns.begin());
  }
  return out;
}

inline DesignMatrix with_columns(const DesignMatrix& full, std::vector<ColumnDescriptor> cols) {
  DesignMatrix dm;
  dm.segment = full.segment;
  dm.scenario = full.scenario;
  dm.spec = full.spec;
  dm.x = columns_of(full, cols);
  dm.y = full.y;
  dm.row_times = full.row_times;
  dm.columns = std::move(cols);
  return dm;
}

} // namespace detail

/// Starting from the intercept + lag model, repeatedly adds the eligible
/// hour-of-week indicator with the smallest entry p-value while that p-value
/// is below `p_entry` and fewer than `max_dummies` have been admitted. Each
/// step re-evaluates every remaining candidate against the current model.
inline ForwardSelection forward_select_calendar(const SeriesIndex& idx, const SegmentKey& segment,
                                                const LagSpec& spec, const SelectionConfig& config,
                                                RowFilter filter = RowFilter::Train) {
  config.validate();
  const auto eligible = eligible_hours(segment.daytype);
  auto all_cols = design_columns(spec, Scenario::PlusCalendar, eligible);
  const auto rows = eligible_rows(idx, segment, all_cols, filter);
  if (rows.empty()) {
    // Delegate for a descriptive error.
    (void)build_design_matrix(idx, segment, spec, Scenario::PlusCalendar, {}, filter);
  }
  DesignMatrix full = assemble(idx, rows, all_cols);
  full.segment = segment;
  full.scenario = Scenario::PlusCalendar;
  full.spec = spec;

  ForwardSelection out;
  auto& trace = out.trace;
  trace.p_entry = config.p_entry;
  trace.max_dummies = config.max_dummies;

  std::vector<HourOfWeek> candidates;
  for (const auto& c : variance_filter(full, config.variance_threshold)) {
    if (c.kind == ColumnKind::CalendarDummy) {
      candidates.push_back(c.slot);
      trace.candidates.push_back(c.label());
    }
  }

  std::vector<HourOfWeek> admitted;
  const auto fit_with = [&](std::vector<HourOfWeek> dummies) {
    std::sort(dummies.begin(), dummies.end());
    return fit_ols(detail::with_columns(full, design_columns(spec, Scenario::PlusCalendar, dummies)));
  };
  FittedModel current = fit_with({});
  const double yy = full.y.squaredNorm();
  const double ynorm = std::sqrt(yy);

  int step = 0;
  while (true) {
    if (static_cast<int>(admitted.size()) >= config.max_dummies) {
      trace.stop_reason = "maximum number of calendar dummies reached";
      break;
    }
    if (current.exact_fit) {
      trace.stop_reason = "current model fits the training data exactly";
      break;
    }
    std::vector<HourOfWeek> remaining;
    for (auto c : candidates) {
      if (std::find(admitted.begin(), admitted.end(), c) == admitted.end()) remaining.push_back(c);
    }
    if (remaining.empty()) {
      trace.stop_reason = "no candidates left";
      break;
    }
    ++step;
    const Eigen::MatrixXd xc = detail::columns_of(full, current.columns);
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(xc);
    const Eigen::Map<const Eigen::VectorXd> resid(current.residuals.data(),
                                                  static_cast<Eigen::Index>(current.residuals.size()));
    std::optional<std::size_t> best;
    std::vector<detail::CandidateScore> scores;
    const std::size_t first_entry = trace.entries.size();
    for (std::size_t c = 0; c < remaining.size(); ++c) {
      const auto it = std::find(full.columns.begin(), full.columns.end(), ColumnDescriptor::dummy(remaining[c]));
      const Eigen::VectorXd d = full.x.col(it - full.columns.begin());
      const auto s = detail::score_candidate(qr, xc.cols(), resid, d, yy, ynorm);
      scores.push_back(s);
      trace.entries.push_back({step, remaining[c].label(), s.p, s.t, s.bic, false});
      if (!best || s.p < scores[*best].p ||
          (s.p == scores[*best].p && std::abs(s.t) > std::abs(scores[*best].t))) {
        best = c;
      }
    }
    if (!(scores[*best].p < config.p_entry)) {
      trace.stop_reason = "no candidate below the entry threshold";
      break;
    }
    trace.entries[first_entry + *best].accepted = true;
    admitted.push_back(remaining[*best]);
    trace.admitted.push_back(remaining[*best].label());
    current = fit_with(admitted);
  }
  current.scenario = Scenario::PlusCalendar;
  out.model = std::move(current);
  return out;
}

struct ModelSelection {
  std::vector<LagSearchResult> lag_searches; // first without dummies, then one per refinement
  ForwardSelection forward;
};

/// Lag orders by BIC, then dummies by forward selection. Unmodelled calendar
/// effects can pull the lag search towards longer lags, so the search is
/// repeated with the admitted dummies held in; when that changes the lag
/// orders the dummies are selected afresh. Stops once the orders are stable.
inline ModelSelection select_model(const SeriesIndex& idx, const SegmentKey& segment,
                                   const SelectionConfig& config, RowFilter filter = RowFilter::Train) {
  ModelSelection out;
  out.lag_searches.push_back(lag_search(idx, segment, Scenario::PlusIrradiation, config, filter));
  LagSpec spec = out.lag_searches.back().best;
  out.forward = forward_select_calendar(idx, segment, spec, config, filter);
  for (int round = 0; round < config.max_refinements; ++round) {
    std::vector<HourOfWeek> admitted;
    for (const auto& label : out.forward.trace.admitted) admitted.push_back(parse_hour_of_week(label));
    if (admitted.empty()) break;
    std::sort(admitted.begin(), admitted.end());
    out.lag_searches.push_back(lag_search(idx, segment, Scenario::PlusIrradiation, config, filter, admitted));
    const LagSpec next = out.lag_searches.back().best;
    if (next == spec) break;
    spec = next;
    out.forward = forward_select_calendar(idx, segment, spec, config, filter);
  }
  return out;
}

/// Q{na}_T{nb}_I{nc} followed by the indicators grouped per day, Monday
/// first, e.g. `Q3_T1_I1 (MON_8h_TUE_1h_WED_3,7h)`. Load-only models render
/// as Q{na}, temperature models as Q{na}_T{nb}.
inline std::string model_name(const FittedModel& model) {
  std::string name = "Q" + std::to_string(model.spec.na);
  if (uses_temperature(model.scenario)) name += "_T" + std::to_string(model.spec.nb);
  if (uses_irradiation(model.scenario)) name += "_I" + std::to_string(model.spec.nc);
  auto dummies = model.dummies();
  for (const auto& c : model.dropped_columns) {
    if (c.kind == ColumnKind::CalendarDummy) dummies.push_back(c.slot);
  }
  if (dummies.empty()) return name;
  std::sort(dummies.begin(), dummies.end());
  std::string groups;
  for (std::size_t i = 0; i < dummies.size();) {
    const int dow = dummies[i].dow();
    std::string hours;
    for (; i < dummies.size() && dummies[i].dow() == dow; ++i) {
      hours += (hours.empty() ? "" : ",") + std::to_string(dummies[i].hour());
    }
    groups += (groups.empty() ? "" : "_") + std::string(kDayNames[static_cast<std::size_t>(dow)]) + "_" +
              hours + "h";
  }
  return name + " (" + groups + ")";
}

} // namespace towarx
