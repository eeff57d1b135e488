#pragma once

// Forecast error battery: MAE, RMSE, MAPE, ME, error quantiles, hour-of-day
// profiles, monthly summaries and scenario comparisons.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "towarx/calendar.hpp"
#include "towarx/features.hpp"
#include "towarx/forecast.hpp"
#include "towarx/quantile.hpp"
#include "towarx/regression.hpp"

namespace towarx {

/// Actual loads below this magnitude (kWh) are left out of MAPE.
inline constexpr double kMapeFloor = 0.1;

struct ErrorSample {
  Timestamp ts;
  double actual = 0.0;
  double predicted = 0.0;

  /// Positive means the forecast was too high.
  double error() const { return predicted - actual; }
};

struct MetricSet {
  double mae = 0.0;
  double rmse = 0.0;
  double mape = std::numeric_limits<double>::quiet_NaN(); // percent; NaN when undefined
  double me = 0.0;
  std::size_t n = 0;
  std::size_t n_mape_excluded = 0;

  bool mape_defined() const { return !std::isnan(mape); }
};

inline MetricSet metrics(std::span<const ErrorSample> samples) {
  if (samples.empty()) throw InputError("metrics of an empty sample");
  MetricSet m;
  m.n = samples.size();
  double abs_sum = 0.0, sq_sum = 0.0, sum = 0.0, pct_sum = 0.0;
  std::size_t pct_n = 0;
  for (const auto& s : samples) {
    const double e = s.error();
    abs_sum += std::abs(e);
    sq_sum += e * e;
    sum += e;
    if (std::abs(s.actual) >= kMapeFloor) {
      pct_sum += std::abs(e) / std::abs(s.actual);
      ++pct_n;
    }
  }
  const double nd = static_cast<double>(m.n);
  m.mae = abs_sum / nd;
  m.rmse = std::sqrt(sq_sum / nd);
  m.me = sum / nd;
  m.n_mape_excluded = m.n - pct_n;
  if (pct_n > 0) m.mape = 100.0 * pct_sum / static_cast<double>(pct_n);
  return m;
}

inline std::vector<double> error_quantiles(std::span<const double> errors, std::span<const double> probs) {
  if (errors.empty()) throw InputError("error_quantiles of an empty sample");
  std::vector<double> sorted(errors.begin(), errors.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> out;
  out.reserve(probs.size());
  for (double p : probs) out.push_back(quantile_sorted(sorted, p));
  return out;
}

inline std::vector<double> errors_of(std::span<const ErrorSample> samples) {
  std::vector<double> e;
  e.reserve(samples.size());
  for (const auto& s : samples) e.push_back(s.error());
  return e;
}

/// Metrics per hour of day; hours without samples are nullopt.
inline std::array<std::optional<MetricSet>, 24> hourly_profile(std::span<const ErrorSample> samples) {
  std::array<std::vector<ErrorSample>, 24> groups;
  for (const auto& s : samples) groups[static_cast<std::size_t>(s.ts.hour)].push_back(s);
  std::array<std::optional<MetricSet>, 24> out;
  for (std::size_t h = 0; h < 24; ++h) {
    if (!groups[h].empty()) out[h] = metrics(groups[h]);
  }
  return out;
}

inline constexpr std::array<double, 4> kSummaryQuantiles{0.10, 0.90, 0.01, 0.99};

struct MonthlySummaryRow {
  std::string model_id;
  int month = 1;
  std::size_t n = 0;
  double rmse = 0.0;
  double me = 0.0;
  double q10 = 0.0;
  double q90 = 0.0;
  double q01 = 0.0;
  double q99 = 0.0;
};

/// One row per calendar month present, ascending month.
inline std::vector<MonthlySummaryRow> monthly_summary(std::span<const ErrorSample> samples,
                                                      const std::string& model_id) {
  std::map<int, std::vector<ErrorSample>> by_month;
  for (const auto& s : samples) by_month[s.ts.month].push_back(s);
  std::vector<MonthlySummaryRow> rows;
  for (const auto& [month, group] : by_month) {
    const auto m = metrics(group);
    const auto q = error_quantiles(errors_of(group), kSummaryQuantiles);
    rows.push_back({model_id, month, m.n, m.rmse, m.me, q[0], q[1], q[2], q[3]});
  }
  return rows;
}

/// In-sample style scoring: each eligible row is predicted from actual lagged
/// loads.
inline std::vector<ErrorSample> one_step_predictions(const FittedModel& model, const SeriesIndex& idx,
                                                     RowFilter filter = RowFilter::Test) {
  const auto rows = eligible_rows(idx, model.segment, model.columns, filter);
  std::vector<ErrorSample> out;
  out.reserve(rows.size());
  const auto load_at = [&](std::int64_t h) { return idx.load(h); };
  const auto temp_at = [&](std::int64_t h) { return idx.temperature(h); };
  const auto irr_at = [&](std::int64_t h) { return idx.irradiation(h); };
  for (auto r : rows) {
    const auto& o = idx.rows()[r];
    const auto h = hour_index(o.ts);
    double acc = 0.0;
    for (std::size_t j = 0; j < model.columns.size(); ++j) {
      acc += model.coefficients[j] * *regressor_value(model.columns[j], h, load_at, temp_at, irr_at);
    }
    out.push_back({o.ts, *o.load.value, acc});
  }
  return out;
}

/// Multi-step scoring: every selected day of the segment is forecast from its
/// 00:00 hour for `horizon` hours (capped at the end of the segment run)
/// using only loads before the origin. Days whose history or weather is
/// incomplete are skipped.
inline std::vector<ErrorSample> recursive_predictions(const FittedModel& model, const SeriesIndex& idx,
                                                      RowFilter filter = RowFilter::Test, int horizon = 24) {
  if (horizon < 1) throw InputError("horizon must be >= 1");
  std::vector<ErrorSample> out;
  auto exog = ExogenousSeries::from_observations(idx.rows());
  const int na = max_load_lag(model);
  for (const auto& o : idx.rows()) {
    if (o.ts.hour != 0 || !passes(filter, o.ts) || !model.segment.contains(o.ts)) continue;
    const auto origin = hour_index(o.ts);
    int len = 0;
    while (len < horizon && model.segment.contains(from_hour_index(origin + len)) &&
           passes(filter, from_hour_index(origin + len))) {
      ++len;
    }
    ForecastRequest req;
    req.origin = o.ts;
    req.horizon = len;
    req.exogenous = std::move(exog); // lent for the call, taken back below
    ForecastResult res;
    bool ok = true;
    try {
      req.load_history = history_before(idx, o.ts, na);
      res = forecast_recursive(model, req);
    } catch (const DataError&) {
      ok = false;
    }
    exog = std::move(req.exogenous);
    if (!ok) continue;
    for (std::size_t i = 0; i < res.times.size(); ++i) {
      const auto actual = idx.load(hour_index(res.times[i]));
      if (actual) out.push_back({res.times[i], *actual, res.predicted[i]});
    }
  }
  return out;
}

enum class EvaluationMode { OneStep, Recursive };

inline std::string_view to_string(EvaluationMode m) {
  return m == EvaluationMode::OneStep ? "one-step" : "recursive";
}

inline EvaluationMode parse_evaluation_mode(std::string_view s) {
  if (s == "one-step") return EvaluationMode::OneStep;
  if (s == "recursive") return EvaluationMode::Recursive;
  throw InputError("unknown evaluation mode '" + std::string(s) + "' (expected one-step or recursive)");
}

inline std::vector<ErrorSample> test_predictions(const FittedModel& model, const SeriesIndex& idx,
                                                 EvaluationMode mode, int horizon = 24) {
  return mode == EvaluationMode::OneStep ? one_step_predictions(model, idx, RowFilter::Test)
                                         : recursive_predictions(model, idx, RowFilter::Test, horizon);
}

struct ScenarioCell {
  SegmentKey segment;
  Scenario scenario = Scenario::LoadOnly;
  std::optional<MetricSet> metrics; // absent: no model or no test rows
};

using ModelTable = std::map<std::pair<SegmentKey, Scenario>, FittedModel>;

/// Test-set errors for every (segment, scenario) cell, segments in canonical
/// order and scenarios from load-only upwards.
inline std::vector<ScenarioCell> scenario_comparison(const ModelTable& models, const SeriesIndex& idx,
                                                     EvaluationMode mode = EvaluationMode::OneStep,
                                                     int horizon = 24) {
  std::vector<ScenarioCell> out;
  for (const auto& seg : kAllSegments) {
    for (auto sc : kAllScenarios) {
      ScenarioCell cell{seg, sc, std::nullopt};
      const auto it = models.find({seg, sc});
      if (it != models.end()) {
        const auto samples = test_predictions(it->second, idx, mode, horizon);
        if (!samples.empty()) cell.metrics = metrics(samples);
      }
      out.push_back(cell);
    }
  }
  return out;
}

} // namespace towarx
