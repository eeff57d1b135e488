#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "towarx/towarx.hpp"

namespace testing_util {

using namespace towarx;

inline HourlyObservation obs(const Timestamp& ts, std::optional<double> load, std::optional<double> temp = 0.0,
                             std::optional<double> irr = 0.0) {
  HourlyObservation o;
  o.ts = ts;
  o.load = load ? Field::observed(*load) : Field::missing();
  o.temperature = temp ? Field::observed(*temp) : Field::missing();
  o.irradiation = irr ? Field::observed(*irr) : Field::missing();
  return o;
}

/// Hourly series starting at `start`, values produced by f(i, ts).
template <typename F>
std::vector<HourlyObservation> series(const Timestamp& start, std::size_t hours, F&& f) {
  std::vector<HourlyObservation> out;
  out.reserve(hours);
  for (std::size_t i = 0; i < hours; ++i) {
    const auto ts = add_hours(start, static_cast<std::int64_t>(i));
    out.push_back(f(i, ts));
  }
  return out;
}

/// Independent normal-equations least squares.
inline Eigen::VectorXd normal_equations(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  const Eigen::MatrixXd g = x.transpose() * x;
  return g.ldlt().solve(x.transpose() * y);
}

inline double rel_diff(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1.0});
  return std::abs(a - b) / scale;
}

/// Design matrix over a dense random regressor matrix with an intercept
/// column first.
inline DesignMatrix random_design(std::mt19937_64& rng, int n, int k, double noise) {
  std::normal_distribution<double> normal(0.0, 1.0);
  DesignMatrix dm;
  dm.x.resize(n, k);
  dm.y.resize(n);
  dm.columns.push_back(ColumnDescriptor::intercept());
  for (int j = 1; j < k; ++j) dm.columns.push_back(ColumnDescriptor::temp_lag(j - 1));
  Eigen::VectorXd beta(k);
  for (int j = 0; j < k; ++j) beta(j) = normal(rng) * 3.0;
  for (int i = 0; i < n; ++i) {
    dm.x(i, 0) = 1.0;
    for (int j = 1; j < k; ++j) dm.x(i, j) = normal(rng);
  }
  dm.y = dm.x * beta;
  for (int i = 0; i < n; ++i) dm.y(i) += noise * normal(rng);
  return dm;
}

/// Aligned hourly series from generator output, as `clean` would ingest it.
inline std::vector<HourlyObservation> observations(const GeneratedData& d) {
  const auto weather = resample_weather(d.weather);
  return align(d.load, weather);
}

/// Small zero-noise generator configuration over a winter window.
inline GeneratorConfig winter_config(std::uint64_t seed = 1) {
  GeneratorConfig g;
  g.seed = seed;
  g.start = {2019, 1, 1, 0};
  g.end = {2019, 3, 1, 0};
  g.noise_sd = 0.0;
  return g;
}

} // namespace testing_util
