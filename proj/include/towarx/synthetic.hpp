#pragma once

// Seeded generator of district-heating-like hourly data from a known
// time-of-week ARX process. Weather is produced at 15-minute steps; the
// process is driven by the hourly means the ingest path will compute.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <ostream>
#include <random>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "towarx/calendar.hpp"
#include "towarx/config.hpp"
#include "towarx/features.hpp"
#include "towarx/ingest.hpp"
#include "towarx/preprocess.hpp"

namespace towarx {

struct GeneratorConfig {
  std::uint64_t seed = 1;
  Timestamp start{2015, 1, 1, 0};
  Timestamp end{2022, 1, 1, 0}; // exclusive

  // True process
  double intercept = 10.0;
  std::vector<double> load_coefs{0.5, 0.15, 0.1};   // a_1..a_na
  std::vector<double> temp_coefs{-0.3, -0.1};       // b_0..b_nb
  std::vector<double> irr_coefs{-0.015, -0.01};      // c_0..c_nc, per W/m2
  std::vector<std::pair<HourOfWeek, double>> dummies{
      {HourOfWeek::from(1, 1), 3.0},
      {HourOfWeek::from(2, 3), 3.0},
      {HourOfWeek::from(2, 7), 4.0},
      {HourOfWeek::from(0, 8), 5.0},
  };
  double noise_sd = 1.0; // kWh

  // Weather
  double temp_mean = 6.0;          // degC
  double temp_seasonal_amp = 11.0; // coldest around mid January
  double temp_daily_amp = 3.0;     // warmest around 15:00
  double temp_noise_sd = 2.0;      // hourly AR(1) innovation scale (stationary sd)
  double temp_noise_phi = 0.9;
  double quarter_jitter_sd = 0.2;  // per 15-minute sample
  double irr_peak = 700.0;         // W/m2 at a clear noon, before the seasonal factor
  double irr_winter_strength = 0.3; // seasonal factor in mid January
  double irr_summer_strength = 0.4; // and in mid July

  // Data defects
  double outlier_rate = 0.0;
  double outlier_magnitude_sd = 8.0; // spike height above the bin mean, in bin sds
  double gap_rate = 0.0;             // per load hour and per weather sample

  void validate() const {
    if (!is_valid(start) || !is_valid(end) || !(start < end)) throw InputError("generator: invalid date range");
    double a = 0.0;
    for (double v : load_coefs) a += std::abs(v);
    if (!(a < 1.0)) throw InputError("generator: unstable AR part (sum |a| = " + format_double(a) + " >= 1)");
    if (load_coefs.size() > static_cast<std::size_t>(kMaxLoadLag)) throw InputError("generator: too many load lags");
    if (temp_coefs.size() > static_cast<std::size_t>(kMaxWeatherLag + 1) ||
        irr_coefs.size() > static_cast<std::size_t>(kMaxWeatherLag + 1)) {
      throw InputError("generator: too many weather lags");
    }
    if (!(noise_sd >= 0.0) || !(temp_noise_sd >= 0.0) || !(quarter_jitter_sd >= 0.0)) {
      throw InputError("generator: standard deviations must be >= 0");
    }
    if (!(std::abs(temp_noise_phi) < 1.0)) throw InputError("generator: temp_noise_phi must lie in (-1, 1)");
    if (!(outlier_rate >= 0.0 && outlier_rate <= 1.0) || !(gap_rate >= 0.0 && gap_rate <= 1.0)) {
      throw InputError("generator: rates must lie in [0, 1]");
    }
  }

  /// Reads `key = value` settings; absent keys keep their defaults.
  /// dummies are written as `MON_8h:5, TUE_1h:3`.
  static GeneratorConfig from(const KeyValueConfig& kv) {
    GeneratorConfig g;
    g.seed = kv.unsigned_integer("seed", g.seed);
    if (auto s = kv.get("start")) g.start = parse_date(*s);
    if (auto s = kv.get("end")) g.end = parse_date(*s);
    g.intercept = kv.number("intercept", g.intercept);
    g.load_coefs = kv.numbers("load_coefs", g.load_coefs);
    g.temp_coefs = kv.numbers("temp_coefs", g.temp_coefs);
    g.irr_coefs = kv.numbers("irr_coefs", g.irr_coefs);
    if (auto s = kv.get("dummies")) {
      g.dummies.clear();
      if (!trim(*s).empty()) {
        for (auto part : split(*s)) {
          part = trim(part);
          const auto colon = part.find(':');
          if (colon == std::string_view::npos) throw InputError("dummies entry '" + std::string(part) + "' lacks ':'");
          const auto v = parse_double(part.substr(colon + 1));
          if (!v) throw InputError("dummies entry '" + std::string(part) + "' has no numeric offset");
          g.dummies.emplace_back(parse_hour_of_week(trim(part.substr(0, colon))), *v);
        }
      }
    }
    g.noise_sd = kv.number("noise_sd", g.noise_sd);
    g.temp_mean = kv.number("temp_mean", g.temp_mean);
    g.temp_seasonal_amp = kv.number("temp_seasonal_amp", g.temp_seasonal_amp);
    g.temp_daily_amp = kv.number("temp_daily_amp", g.temp_daily_amp);
    g.temp_noise_sd = kv.number("temp_noise_sd", g.temp_noise_sd);
    g.temp_noise_phi = kv.number("temp_noise_phi", g.temp_noise_phi);
    g.quarter_jitter_sd = kv.number("quarter_jitter_sd", g.quarter_jitter_sd);
    g.irr_peak = kv.number("irr_peak", g.irr_peak);
    g.irr_winter_strength = kv.number("irr_winter_strength", g.irr_winter_strength);
    g.irr_summer_strength = kv.number("irr_summer_strength", g.irr_summer_strength);
    g.outlier_rate = kv.number("outlier_rate", g.outlier_rate);
    g.outlier_magnitude_sd = kv.number("outlier_magnitude_sd", g.outlier_magnitude_sd);
    g.gap_rate = kv.number("gap_rate", g.gap_rate);
    g.validate();
    return g;
  }

  LagSpec spec() const {
    return LagSpec{static_cast<int>(std::max<std::size_t>(load_coefs.size(), 1)),
                   std::max(static_cast<int>(temp_coefs.size()) - 1, 0),
                   std::max(static_cast<int>(irr_coefs.size()) - 1, 0)};
  }

  static Timestamp parse_date(std::string_view s) {
    s = trim(s);
    if (s.size() == 10) return parse_timestamp(std::string(s) + "T00:00");
    return parse_timestamp(s);
  }
};

struct GeneratedData {
  std::vector<RawLoadRecord> load;        // observed loads (with spikes, without gap hours)
  std::vector<RawWeatherRecord> weather;  // quarter-hour samples (without dropped samples)
  std::vector<Timestamp> hours;           // every simulated hour
  std::vector<double> clean_load;         // process output per hour
  std::vector<double> temperature;        // hourly driving temperature
  std::vector<double> irradiation;        // hourly driving irradiation
  std::set<Timestamp> outlier_hours;      // hours whose observed load was replaced by a spike
  std::set<Timestamp> load_gap_hours;     // hours absent from the load file
  std::size_t weather_samples_dropped = 0;
};

namespace detail {

inline std::mt19937_64 stream(std::uint64_t seed, std::uint64_t id) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(id), 0x5eedu};
  return std::mt19937_64(seq);
}

inline double day_of_year(const Timestamp& ts) {
  const auto jan1 = hour_index(Timestamp{ts.year, 1, 1, 0});
  return static_cast<double>(hour_index(ts) - jan1) / 24.0;
}

} // namespace detail

/// Simulates the configured process hour by hour. Identical configs produce
/// identical output.
inline GeneratedData generate(const GeneratorConfig& cfg) {
  cfg.validate();
  using std::numbers::pi;
  auto rng_weather = detail::stream(cfg.seed, 1);
  auto rng_noise = detail::stream(cfg.seed, 2);
  auto rng_outlier = detail::stream(cfg.seed, 3);
  auto rng_gap = detail::stream(cfg.seed, 4);
  std::normal_distribution<double> weather_normal(0.0, 1.0);
  std::normal_distribution<double> noise_normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  const std::int64_t h_start = hour_index(cfg.start);
  const std::int64_t h_end = hour_index(cfg.end);
  const int burn_in = 24 * 14;
  const auto total = static_cast<std::size_t>(h_end - h_start + burn_in);

  std::vector<double> temp(total), irr(total), load(total);
  std::vector<std::array<double, 4>> q_temp(total), q_irr(total);
  const double innov_sd = cfg.temp_noise_sd * std::sqrt(1.0 - cfg.temp_noise_phi * cfg.temp_noise_phi);
  double ar_state = 0.0;
  double cloud = 1.0;
  for (std::size_t i = 0; i < total; ++i) {
    const auto ts = from_hour_index(h_start - burn_in + static_cast<std::int64_t>(i));
    if (ts.hour == 0 || i == 0) cloud = 0.3 + 0.7 * unif(rng_weather);
    ar_state = cfg.temp_noise_phi * ar_state + innov_sd * weather_normal(rng_weather);
    const double doy = detail::day_of_year(ts);
    const double season_c = std::cos(2.0 * pi * (doy - 15.0) / 365.25); // +1 mid January
    double t_sum = 0.0, i_sum = 0.0;
    for (int q = 0; q < 4; ++q) {
      const double hod = ts.hour + q / 4.0;
      const double t = cfg.temp_mean - cfg.temp_seasonal_amp * season_c +
                       cfg.temp_daily_amp * std::cos(2.0 * pi * (hod - 15.0) / 24.0) + ar_state +
                       cfg.quarter_jitter_sd * weather_normal(rng_weather);
      const double day_len = 12.0 - 5.0 * season_c; // hours of daylight
      const double sunrise = 12.0 - day_len / 2.0;
      const double elev = std::sin(pi * (hod - sunrise) / day_len);
      const double strength = 0.5 * (cfg.irr_winter_strength + cfg.irr_summer_strength) -
                              0.5 * (cfg.irr_summer_strength - cfg.irr_winter_strength) * season_c;
      const double irr_q = (hod >= sunrise && hod <= sunrise + day_len)
                               ? std::max(0.0, cfg.irr_peak * strength * cloud * elev)
                               : 0.0;
      q_temp[i][static_cast<std::size_t>(q)] = t;
      q_irr[i][static_cast<std::size_t>(q)] = irr_q;
      t_sum += t;
      i_sum += irr_q;
    }
    // Same reduction as resample_weather: running sum in minute order / count.
    temp[i] = t_sum / 4.0;
    irr[i] = i_sum / 4.0;
  }

  double a_sum = 0.0, b_sum = 0.0;
  for (double a : cfg.load_coefs) a_sum += a;
  for (double b : cfg.temp_coefs) b_sum += b;
  const double start_level = (cfg.intercept + b_sum * temp[0]) / (1.0 - a_sum);
  std::map<int, double> dummy_offset;
  for (const auto& [slot, v] : cfg.dummies) dummy_offset[slot.index] += v;

  for (std::size_t i = 0; i < total; ++i) {
    const auto ts = from_hour_index(h_start - burn_in + static_cast<std::int64_t>(i));
    double v = cfg.intercept;
    for (std::size_t k = 1; k <= cfg.load_coefs.size(); ++k) {
      v += cfg.load_coefs[k - 1] * (i >= k ? load[i - k] : start_level);
    }
    for (std::size_t k = 0; k < cfg.temp_coefs.size(); ++k) {
      v += cfg.temp_coefs[k] * temp[i >= k ? i - k : 0];
    }
    for (std::size_t k = 0; k < cfg.irr_coefs.size(); ++k) {
      v += cfg.irr_coefs[k] * irr[i >= k ? i - k : 0];
    }
    if (const auto it = dummy_offset.find(hour_of_week(ts).index); it != dummy_offset.end()) v += it->second;
    if (cfg.noise_sd > 0.0) v += cfg.noise_sd * noise_normal(rng_noise);
    load[i] = v;
  }

  GeneratedData out;
  const std::size_t first = static_cast<std::size_t>(burn_in);
  const std::size_t n = total - first;
  out.hours.reserve(n);
  for (std::size_t i = first; i < total; ++i) {
    out.hours.push_back(from_hour_index(h_start - burn_in + static_cast<std::int64_t>(i)));
    out.clean_load.push_back(load[i]);
    out.temperature.push_back(temp[i]);
    out.irradiation.push_back(irr[i]);
  }

  // Spike heights relative to the spread of clean loads in the same 2.5 degC bin.
  std::map<int, std::pair<double, double>> bin_stats; // mean, sd
  {
    std::map<int, std::vector<double>> members;
    for (std::size_t i = 0; i < n; ++i) members[temperature_bin(out.temperature[i])].push_back(out.clean_load[i]);
    for (const auto& [bin, vals] : members) {
      double mean = 0.0;
      for (double v : vals) mean += v;
      mean /= static_cast<double>(vals.size());
      double ss = 0.0;
      for (double v : vals) ss += (v - mean) * (v - mean);
      const double sd = vals.size() > 1 ? std::sqrt(ss / static_cast<double>(vals.size() - 1)) : 0.0;
      bin_stats[bin] = {mean, sd};
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    const auto& ts = out.hours[i];
    double observed = out.clean_load[i];
    if (cfg.outlier_rate > 0.0 && unif(rng_outlier) < cfg.outlier_rate) {
      const auto [mean, sd] = bin_stats[temperature_bin(out.temperature[i])];
      observed = mean + cfg.outlier_magnitude_sd * sd;
      out.outlier_hours.insert(ts);
    }
    if (cfg.gap_rate > 0.0 && unif(rng_gap) < cfg.gap_rate) {
      out.load_gap_hours.insert(ts);
      out.outlier_hours.erase(ts);
    } else {
      out.load.push_back({ts, observed});
    }
    for (int q = 0; q < 4; ++q) {
      if (cfg.gap_rate > 0.0 && unif(rng_gap) < cfg.gap_rate) {
        ++out.weather_samples_dropped;
        continue;
      }
      out.weather.push_back({ts, 15 * q, q_temp[first + i][static_cast<std::size_t>(q)],
                             q_irr[first + i][static_cast<std::size_t>(q)]});
    }
  }
  return out;
}

inline void write_load_csv(std::ostream& out, std::span<const RawLoadRecord> load) {
  out << "timestamp,load_kwh\n";
  for (const auto& r : load) out << format_timestamp(r.ts) << ',' << format_double(r.load_kwh) << '\n';
}

inline void write_weather_csv(std::ostream& out, std::span<const RawWeatherRecord> weather) {
  out << "timestamp,temp_c,irr_wm2\n";
  for (const auto& r : weather) {
    out << format_timestamp(r.hour, r.minute) << ',';
    if (r.temp_c) out << format_double(*r.temp_c);
    out << ',';
    if (r.irr_wm2) out << format_double(*r.irr_wm2);
    out << '\n';
  }
}

} // namespace towarx
