#pragma once

// Load outlier detection within 2.5 degC temperature bins (IQR rule) and
// short-gap interpolation of the weather variables.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "towarx/ingest.hpp"
#include "towarx/quantile.hpp"

namespace towarx {

inline constexpr double kTemperatureBinWidth = 2.5;
inline constexpr double kIqrFactor = 1.5;
inline constexpr std::size_t kMinBinPopulation = 8;
inline constexpr int kMaxImputeGapHours = 3;

/// Bin number of a temperature; bin b covers [2.5 b, 2.5 (b + 1)).
inline int temperature_bin(double temp_c) {
  return static_cast<int>(std::floor(temp_c / kTemperatureBinWidth));
}

struct BinStatistics {
  double lower = 0.0; // inclusive, degC
  double upper = 0.0; // exclusive, degC
  std::size_t count = 0;
  bool populated = false; // count >= kMinBinPopulation; only populated bins flag
  double q1 = 0.0;
  double q3 = 0.0;
  double iqr = 0.0;
  double lower_fence = 0.0;
  double upper_fence = 0.0;
  std::size_t flagged = 0;
  std::vector<std::size_t> rows;
};

struct OutlierReport {
  std::vector<std::size_t> flagged_rows; // ascending
  std::vector<BinStatistics> bins;       // ascending temperature
  std::size_t load_rows = 0;             // rows with a load value
  double flagged_fraction = 0.0;         // flagged_rows / load_rows
};

/// Rows with both a usable load and a usable temperature take part; each is
/// tested against the fences of its own temperature bin.
inline OutlierReport detect_outliers_iqr(std::span<const HourlyObservation> obs) {
  OutlierReport report;
  std::map<int, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    if (obs[i].load.value) ++report.load_rows;
    if (obs[i].load.usable() && obs[i].temperature.usable()) {
      members[temperature_bin(*obs[i].temperature.value)].push_back(i);
    }
  }
  for (auto& [bin, rows] : members) {
    BinStatistics st;
    st.lower = bin * kTemperatureBinWidth;
    st.upper = (bin + 1) * kTemperatureBinWidth;
    st.count = rows.size();
    st.populated = rows.size() >= kMinBinPopulation;
    std::vector<double> loads;
    loads.reserve(rows.size());
    for (auto r : rows) loads.push_back(*obs[r].load.value);
    std::sort(loads.begin(), loads.end());
    st.q1 = quantile_sorted(loads, 0.25);
    st.q3 = quantile_sorted(loads, 0.75);
    st.iqr = st.q3 - st.q1;
    st.lower_fence = st.q1 - kIqrFactor * st.iqr;
    st.upper_fence = st.q3 + kIqrFactor * st.iqr;
    if (st.populated) {
      for (auto r : rows) {
        const double v = *obs[r].load.value;
        if (v < st.lower_fence || v > st.upper_fence) {
          report.flagged_rows.push_back(r);
          ++st.flagged;
        }
      }
    }
    st.rows = std::move(rows);
    report.bins.push_back(std::move(st));
  }
  std::sort(report.flagged_rows.begin(), report.flagged_rows.end());
  report.flagged_fraction =
      report.load_rows == 0 ? 0.0
                            : static_cast<double>(report.flagged_rows.size()) / report.load_rows;
  return report;
}

inline void mark_outliers(std::vector<HourlyObservation>& obs, const OutlierReport& report) {
  for (auto r : report.flagged_rows) obs.at(r).load.quality = Quality::Outlier;
}

namespace detail {

inline void interpolate_field(std::vector<HourlyObservation>& obs, Field HourlyObservation::*member) {
  std::size_t prev = obs.size(); // last usable row
  for (std::size_t i = 0; i < obs.size(); ++i) {
    if (!(obs[i].*member).usable()) continue;
    if (prev != obs.size() && i > prev + 1) {
      const auto h0 = hour_index(obs[prev].ts);
      const auto h1 = hour_index(obs[i].ts);
      const auto gap = h1 - h0 - 1;
      if (gap >= 1 && gap <= kMaxImputeGapHours) {
        const double v0 = *(obs[prev].*member).value;
        const double v1 = *(obs[i].*member).value;
        for (std::size_t j = prev + 1; j < i; ++j) {
          const double w = static_cast<double>(hour_index(obs[j].ts) - h0) / static_cast<double>(h1 - h0);
          auto& f = obs[j].*member;
          if (f.quality == Quality::Missing) f = Field{v0 + w * (v1 - v0), Quality::Imputed};
        }
      }
    }
    prev = i;
  }
}

} // namespace detail

/// Fills temperature and irradiation gaps of at most three consecutive hours
/// by linear interpolation between the flanking usable values. Load is never
/// imputed.
inline std::vector<HourlyObservation> impute(std::vector<HourlyObservation> obs) {
  detail::interpolate_field(obs, &HourlyObservation::temperature);
  detail::interpolate_field(obs, &HourlyObservation::irradiation);
  return obs;
}

struct CleanResult {
  std::vector<HourlyObservation> series;
  OutlierReport outliers;
};

/// Outlier detection followed by imputation.
inline CleanResult clean(std::vector<HourlyObservation> obs) {
  CleanResult result;
  result.outliers = detect_outliers_iqr(obs);
  mark_outliers(obs, result.outliers);
  result.series = impute(std::move(obs));
  return result;
}

} // namespace towarx
