#pragma once

// Recursive multi-step forecasting: load lags beyond the end of the history
// are replaced by earlier predictions; weather comes from the caller.

#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "towarx/calendar.hpp"
#include "towarx/features.hpp"
#include "towarx/regression.hpp"

namespace towarx {

/// Hourly temperature and irradiation starting at `start`; nullopt marks a
/// missing hour.
struct ExogenousSeries {
  Timestamp start;
  std::vector<std::optional<double>> temperature;
  std::vector<std::optional<double>> irradiation;

  std::optional<double> temperature_at(std::int64_t h) const { return at(temperature, h); }
  std::optional<double> irradiation_at(std::int64_t h) const { return at(irradiation, h); }

  static ExogenousSeries from_observations(std::span<const HourlyObservation> obs) {
    ExogenousSeries ex;
    if (obs.empty()) return ex;
    ex.start = obs.front().ts;
    const auto h0 = hour_index(ex.start);
    const auto len = static_cast<std::size_t>(hour_index(obs.back().ts) - h0 + 1);
    ex.temperature.assign(len, std::nullopt);
    ex.irradiation.assign(len, std::nullopt);
    for (const auto& o : obs) {
      const auto i = static_cast<std::size_t>(hour_index(o.ts) - h0);
      if (o.temperature.usable()) ex.temperature[i] = o.temperature.value;
      if (o.irradiation.usable()) ex.irradiation[i] = o.irradiation.value;
    }
    return ex;
  }

private:
  std::optional<double> at(const std::vector<std::optional<double>>& v, std::int64_t h) const {
    const auto i = h - hour_index(start);
    if (i < 0 || i >= static_cast<std::int64_t>(v.size())) return std::nullopt;
    return v[static_cast<std::size_t>(i)];
  }
};

struct ForecastRequest {
  Timestamp origin;                 ///< first predicted hour
  int horizon = 24;                 ///< hours
  std::vector<double> load_history; ///< consecutive loads ending at origin - 1, oldest first
  ExogenousSeries exogenous;
};

enum class LagSource { Actual, Mixed, Predicted };

inline std::string_view to_string(LagSource s) {
  switch (s) {
  case LagSource::Actual: return "actual";
  case LagSource::Mixed: return "mixed";
  case LagSource::Predicted: return "predicted";
  }
  return "?";
}

struct ForecastResult {
  std::vector<Timestamp> times;
  std::vector<double> predicted;
  std::vector<LagSource> lag_sources;
};

/// Deepest load lag among the model's columns.
inline int max_load_lag(const FittedModel& model) { return lag_window(model.columns).load; }

namespace detail {

/// The recursion itself, without the segment-membership check.
inline ForecastResult recurse(const FittedModel& model, const ForecastRequest& req) {
  if (req.horizon < 1) throw InputError("forecast horizon must be >= 1");
  require_valid(req.origin);
  const auto window = lag_window(model.columns);
  const int na = window.load;
  if (static_cast<int>(req.load_history.size()) < na) {
    throw DataError("load history has " + std::to_string(req.load_history.size()) + " values; the model needs " +
                    std::to_string(na));
  }
  const auto origin = hour_index(req.origin);
  const auto hist_start = origin - static_cast<std::int64_t>(req.load_history.size());
  for (std::size_t i = 0; i < req.load_history.size(); ++i) {
    if (!std::isfinite(req.load_history[i])) {
      throw DataError("load history has a gap at " + format_timestamp(from_hour_index(hist_start + static_cast<std::int64_t>(i))));
    }
  }

  ForecastResult out;
  out.times.reserve(static_cast<std::size_t>(req.horizon));
  out.predicted.reserve(static_cast<std::size_t>(req.horizon));
  const auto need_exog = [&](std::int64_t h, bool temp) {
    const auto v = temp ? req.exogenous.temperature_at(h) : req.exogenous.irradiation_at(h);
    if (!v) {
      throw DataError(std::string("exogenous ") + (temp ? "temperature" : "irradiation") + " missing at " +
                      format_timestamp(from_hour_index(h)));
    }
    return *v;
  };
  // Check coverage up front so the first missing hour is reported.
  for (std::int64_t h = origin - std::max(window.temp, window.irr); h < origin + req.horizon; ++h) {
    if (window.temp >= 0 && h >= origin - window.temp) (void)need_exog(h, true);
    if (window.irr >= 0 && h >= origin - window.irr) (void)need_exog(h, false);
  }

  const auto load_at = [&](std::int64_t h) -> std::optional<double> {
    if (h < origin) return req.load_history[static_cast<std::size_t>(h - hist_start)];
    return out.predicted[static_cast<std::size_t>(h - origin)];
  };
  const auto temp_at = [&](std::int64_t h) -> std::optional<double> { return need_exog(h, true); };
  const auto irr_at = [&](std::int64_t h) -> std::optional<double> { return need_exog(h, false); };

  for (int step = 0; step < req.horizon; ++step) {
    const auto h = origin + step;
    double acc = 0.0;
    for (std::size_t j = 0; j < model.columns.size(); ++j) {
      acc += model.coefficients[j] * *regressor_value(model.columns[j], h, load_at, temp_at, irr_at);
    }
    int actual = 0, predicted = 0;
    for (const auto& c : model.columns) {
      if (c.kind != ColumnKind::LoadLag) continue;
      (h - c.lag < origin ? actual : predicted) += 1;
    }
    out.times.push_back(from_hour_index(h));
    out.predicted.push_back(acc);
    out.lag_sources.push_back(predicted == 0 ? LagSource::Actual
                              : actual == 0  ? LagSource::Predicted
                                             : LagSource::Mixed);
  }
  return out;
}

} // namespace detail

/// Evaluates the model forward from `req.origin`, substituting its own
/// predictions for load lags past the end of the history. The noise term is
/// replaced by its zero mean. Every forecast hour must lie in the model's
/// segment.
inline ForecastResult forecast_recursive(const FittedModel& model, const ForecastRequest& req) {
  if (req.horizon < 1) throw InputError("forecast horizon must be >= 1");
  require_valid(req.origin);
  const auto origin = hour_index(req.origin);
  for (int step = 0; step < req.horizon; ++step) {
    const auto ts = from_hour_index(origin + step);
    if (!model.segment.contains(ts)) {
      throw InputError("forecast hour " + format_timestamp(ts) + " is outside the model segment " +
                       model.segment.name());
    }
  }
  return detail::recurse(model, req);
}

/// The `count` consecutive usable loads immediately before `origin`.
inline std::vector<double> history_before(const SeriesIndex& idx, const Timestamp& origin, int count) {
  std::vector<double> out;
  const auto h0 = hour_index(origin);
  for (int k = count; k >= 1; --k) {
    const auto v = idx.load(h0 - k);
    if (!v) throw DataError("load history has a gap at " + format_timestamp(from_hour_index(h0 - k)));
    out.push_back(*v);
  }
  return out;
}

inline void write_forecast_csv(std::ostream& out, const ForecastResult& r) {
  out << "timestamp,predicted_kwh,lag_source\n";
  for (std::size_t i = 0; i < r.times.size(); ++i) {
    out << format_timestamp(r.times[i]) << ',' << format_double(r.predicted[i]) << ','
        << to_string(r.lag_sources[i]) << '\n';
  }
}

} // namespace towarx
