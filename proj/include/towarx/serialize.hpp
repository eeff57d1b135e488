#pragma once

// JSON encodings. Doubles are written in shortest round-trip form; values
// that JSON cannot carry (inf, nan) are written as the strings "inf", "-inf"
// and "nan".

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "json.hpp"

#include "towarx/evaluation.hpp"
#include "towarx/preprocess.hpp"
#include "towarx/regression.hpp"
#include "towarx/selection.hpp"
#include "towarx/synthetic.hpp"

namespace towarx {

using json = nlohmann::ordered_json;

inline constexpr const char* kModelFormat = "towarx-model/1";

inline json number_json(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

inline double number_from_json(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
  }
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  throw DataError("expected a number, got " + j.dump());
}

inline json numbers_json(const std::vector<double>& v) {
  json arr = json::array();
  for (double x : v) arr.push_back(number_json(x));
  return arr;
}

inline std::vector<double> numbers_from_json(const json& j) {
  std::vector<double> out;
  for (const auto& x : j) out.push_back(number_from_json(x));
  return out;
}

inline json labels_json(const std::vector<ColumnDescriptor>& cols) {
  json arr = json::array();
  for (const auto& c : cols) arr.push_back(c.label());
  return arr;
}

inline std::vector<ColumnDescriptor> labels_from_json(const json& j) {
  std::vector<ColumnDescriptor> out;
  for (const auto& x : j) out.push_back(ColumnDescriptor::parse(x.get<std::string>()));
  return out;
}

inline json to_json(const FittedModel& m) {
  json j;
  j["format"] = kModelFormat;
  j["name"] = model_name(m);
  j["segment"] = m.segment.name();
  j["scenario"] = std::string(to_string(m.scenario));
  j["lag_spec"] = {{"na", m.spec.na}, {"nb", m.spec.nb}, {"nc", m.spec.nc}};
  j["columns"] = labels_json(m.columns);
  j["dropped_columns"] = labels_json(m.dropped_columns);
  j["coefficients"] = numbers_json(m.coefficients);
  j["std_errors"] = numbers_json(m.std_errors);
  j["t_values"] = numbers_json(m.t_values);
  j["p_values"] = numbers_json(m.p_values);
  j["n"] = m.n;
  j["k"] = m.k;
  j["rss"] = number_json(m.rss);
  j["sigma2"] = number_json(m.sigma2);
  j["r2"] = number_json(m.r2);
  j["adj_r2"] = number_json(m.adj_r2);
  j["f_stat"] = number_json(m.f_stat);
  j["f_pvalue"] = number_json(m.f_pvalue);
  j["aic"] = number_json(m.aic);
  j["bic"] = number_json(m.bic);
  j["exact_fit"] = m.exact_fit;
  j["warnings"] = m.warnings;
  j["residuals"] = numbers_json(m.residuals);
  return j;
}

inline FittedModel model_from_json(const json& j) {
  try {
    if (j.at("format").get<std::string>() != kModelFormat) {
      throw DataError("unsupported model format '" + j.at("format").get<std::string>() + "'");
    }
    FittedModel m;
    m.segment = parse_segment(j.at("segment").get<std::string>());
    m.scenario = parse_scenario(j.at("scenario").get<std::string>());
    m.spec = {j.at("lag_spec").at("na").get<int>(), j.at("lag_spec").at("nb").get<int>(),
              j.at("lag_spec").at("nc").get<int>()};
    m.columns = labels_from_json(j.at("columns"));
    m.dropped_columns = labels_from_json(j.at("dropped_columns"));
    m.coefficients = numbers_from_json(j.at("coefficients"));
    m.std_errors = numbers_from_json(j.at("std_errors"));
    m.t_values = numbers_from_json(j.at("t_values"));
    m.p_values = numbers_from_json(j.at("p_values"));
    m.n = j.at("n").get<std::size_t>();
    m.k = j.at("k").get<std::size_t>();
    m.rss = number_from_json(j.at("rss"));
    m.sigma2 = number_from_json(j.at("sigma2"));
    m.r2 = number_from_json(j.at("r2"));
    m.adj_r2 = number_from_json(j.at("adj_r2"));
    m.f_stat = number_from_json(j.at("f_stat"));
    m.f_pvalue = number_from_json(j.at("f_pvalue"));
    m.aic = number_from_json(j.at("aic"));
    m.bic = number_from_json(j.at("bic"));
    m.exact_fit = j.at("exact_fit").get<bool>();
    m.warnings = j.at("warnings").get<std::vector<std::string>>();
    m.residuals = numbers_from_json(j.at("residuals"));
    if (m.coefficients.size() != m.columns.size()) {
      throw DataError("model has " + std::to_string(m.columns.size()) + " columns but " +
                      std::to_string(m.coefficients.size()) + " coefficients");
    }
    return m;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed model JSON: ") + e.what());
  } catch (const InputError& e) {
    throw DataError(std::string("malformed model JSON: ") + e.what());
  }
}

inline json to_json(const SelectionTrace& t) {
  json j;
  j["p_entry"] = t.p_entry;
  j["max_dummies"] = t.max_dummies;
  j["candidates"] = t.candidates;
  j["admitted"] = t.admitted;
  j["stop_reason"] = t.stop_reason;
  json entries = json::array();
  for (const auto& e : t.entries) {
    entries.push_back({{"step", e.step},
                       {"candidate", e.candidate},
                       {"p_value", number_json(e.p_value)},
                       {"t_value", number_json(e.t_value)},
                       {"bic", number_json(e.bic)},
                       {"accepted", e.accepted}});
  }
  j["entries"] = std::move(entries);
  return j;
}

inline json to_json(const LagSearchResult& r) {
  json j;
  j["best"] = {{"na", r.best.na}, {"nb", r.best.nb}, {"nc", r.best.nc}};
  j["rows"] = r.rows;
  j["candidates_evaluated"] = r.candidates.size();
  return j;
}

inline json to_json(const OutlierReport& r) {
  json j;
  j["load_rows"] = r.load_rows;
  j["flagged"] = r.flagged_rows.size();
  j["flagged_fraction"] = number_json(r.flagged_fraction);
  j["bin_width_c"] = kTemperatureBinWidth;
  j["min_bin_population"] = kMinBinPopulation;
  json bins = json::array();
  for (const auto& b : r.bins) {
    bins.push_back({{"lower_c", b.lower},
                    {"upper_c", b.upper},
                    {"count", b.count},
                    {"populated", b.populated},
                    {"q1", number_json(b.q1)},
                    {"q3", number_json(b.q3)},
                    {"iqr", number_json(b.iqr)},
                    {"lower_fence", number_json(b.lower_fence)},
                    {"upper_fence", number_json(b.upper_fence)},
                    {"flagged", b.flagged}});
  }
  j["bins"] = std::move(bins);
  return j;
}

inline json to_json(const MetricSet& m) {
  return {{"n", m.n},
          {"mae", number_json(m.mae)},
          {"rmse", number_json(m.rmse)},
          {"mape_pct", m.mape_defined() ? number_json(m.mape) : json(nullptr)},
          {"me", number_json(m.me)},
          {"n_mape_excluded", m.n_mape_excluded}};
}

inline json to_json(const GeneratorConfig& g, const GeneratedData& d) {
  json j;
  j["seed"] = g.seed;
  j["start"] = format_timestamp(g.start);
  j["end"] = format_timestamp(g.end);
  const auto spec = g.spec();
  j["lag_spec"] = {{"na", spec.na}, {"nb", spec.nb}, {"nc", spec.nc}};
  j["intercept"] = g.intercept;
  j["load_coefs"] = g.load_coefs;
  j["temp_coefs"] = g.temp_coefs;
  j["irr_coefs"] = g.irr_coefs;
  json dummies = json::object();
  for (const auto& [slot, v] : g.dummies) dummies[slot.label()] = v;
  j["dummies"] = std::move(dummies);
  j["noise_sd"] = g.noise_sd;
  j["outlier_rate"] = g.outlier_rate;
  j["outlier_magnitude_sd"] = g.outlier_magnitude_sd;
  j["gap_rate"] = g.gap_rate;
  json outliers = json::array();
  for (const auto& ts : d.outlier_hours) outliers.push_back(format_timestamp(ts));
  j["outlier_hours"] = std::move(outliers);
  json gaps = json::array();
  for (const auto& ts : d.load_gap_hours) gaps.push_back(format_timestamp(ts));
  j["load_gap_hours"] = std::move(gaps);
  j["weather_samples_dropped"] = d.weather_samples_dropped;
  return j;
}

} // namespace towarx
