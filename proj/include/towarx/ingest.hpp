#pragma once

// Heat-meter and weather CSV ingestion, quarter-hour to hourly resampling and
// alignment into one hourly observation series.
//
//   load CSV:     timestamp,load_kwh          (hourly)
//   weather CSV:  timestamp,temp_c,irr_wm2    (15-minute steps; empty field = absent sample)
//   cleaned CSV:  timestamp,load_kwh,load_flag,temp_c,temp_flag,irr_wm2,irr_flag

#include <algorithm>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "towarx/calendar.hpp"
#include "towarx/error.hpp"
#include "towarx/text.hpp"

namespace towarx {

enum class Quality { Observed, Resampled, Imputed, Missing, Outlier };

inline std::string_view to_string(Quality q) {
  switch (q) {
  case Quality::Observed: return "observed";
  case Quality::Resampled: return "resampled";
  case Quality::Imputed: return "imputed";
  case Quality::Missing: return "missing";
  case Quality::Outlier: return "outlier";
  }
  return "?";
}

inline Quality parse_quality(std::string_view s) {
  for (auto q : {Quality::Observed, Quality::Resampled, Quality::Imputed, Quality::Missing,
                 Quality::Outlier}) {
    if (to_string(q) == s) return q;
  }
  throw InputError("unknown quality flag '" + std::string(s) + "'");
}

/// A value with its source flag. Outlier values are kept for reporting but are
/// not usable for modelling.
struct Field {
  std::optional<double> value;
  Quality quality = Quality::Missing;

  bool usable() const {
    return value.has_value() && quality != Quality::Missing && quality != Quality::Outlier;
  }

  static Field observed(double v) { return {v, Quality::Observed}; }
  static Field resampled(double v) { return {v, Quality::Resampled}; }
  static Field missing() { return {}; }
};

struct RawLoadRecord {
  Timestamp ts;
  double load_kwh = 0.0;
};

struct RawWeatherRecord {
  Timestamp hour;
  int minute = 0;
  std::optional<double> temp_c;
  std::optional<double> irr_wm2;
};

struct HourlyWeather {
  Timestamp ts;
  Field temperature;
  Field irradiation;
};

struct HourlyObservation {
  Timestamp ts;
  Field load;
  Field temperature;
  Field irradiation;
};

namespace detail {

inline bool next_line(std::istream& in, std::string& line, std::size_t& line_no) {
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) return true;
  }
  return false;
}

inline void expect_header(std::istream& in, std::string_view expected, std::size_t& line_no) {
  std::string line;
  if (!next_line(in, line, line_no)) {
    throw ParseError(line_no == 0 ? 1 : line_no, "missing header '" + std::string(expected) + "'");
  }
  if (clean_header(line) != expected) {
    throw ParseError(line_no, "expected header '" + std::string(expected) + "', got '" +
                                  std::string(clean_header(line)) + "'");
  }
}

inline std::pair<Timestamp, int> parse_ts_field(std::string_view field, std::size_t line_no) {
  try {
    return parse_timestamp_minute(trim(field));
  } catch (const InputError& e) {
    throw ParseError(line_no, e.what());
  }
}

inline std::optional<double> parse_optional_number(std::string_view field, std::string_view name,
                                                   std::size_t line_no) {
  const auto t = trim(field);
  if (t.empty()) return std::nullopt;
  const auto v = parse_double(t);
  if (!v) {
    throw ParseError(line_no, "unparsable " + std::string(name) + " '" + std::string(t) + "'");
  }
  return v;
}

} // namespace detail

/// Parses a hourly heat-meter export. Rows are returned in file order.
inline std::vector<RawLoadRecord> parse_load_csv(std::istream& in) {
  std::size_t line_no = 0;
  detail::expect_header(in, "timestamp,load_kwh", line_no);
  std::vector<RawLoadRecord> out;
  std::set<Timestamp> seen;
  std::string line;
  while (detail::next_line(in, line, line_no)) {
    const auto fields = split(trim(line));
    if (fields.size() != 2) {
      throw ParseError(line_no, "expected 2 fields, got " + std::to_string(fields.size()));
    }
    const auto [ts, minute] = detail::parse_ts_field(fields[0], line_no);
    if (minute != 0) throw ParseError(line_no, "load timestamp is not on the hour");
    const auto load = parse_double(fields[1]);
    if (!load) {
      throw ParseError(line_no, "unparsable load_kwh '" + std::string(trim(fields[1])) + "'");
    }
    if (!seen.insert(ts).second) {
      throw ParseError(line_no, "duplicate timestamp " + format_timestamp(ts));
    }
    out.push_back({ts, *load});
  }
  return out;
}

inline std::vector<RawWeatherRecord> parse_weather_csv(std::istream& in) {
  std::size_t line_no = 0;
  detail::expect_header(in, "timestamp,temp_c,irr_wm2", line_no);
  std::vector<RawWeatherRecord> out;
  std::set<std::pair<Timestamp, int>> seen;
  std::string line;
  while (detail::next_line(in, line, line_no)) {
    const auto fields = split(trim(line));
    if (fields.size() != 3) {
      throw ParseError(line_no, "expected 3 fields, got " + std::to_string(fields.size()));
    }
    const auto key = detail::parse_ts_field(fields[0], line_no);
    if (!seen.insert(key).second) {
      throw ParseError(line_no, "duplicate timestamp " + format_timestamp(key.first, key.second));
    }
    out.push_back({key.first, key.second,
                   detail::parse_optional_number(fields[1], "temp_c", line_no),
                   detail::parse_optional_number(fields[2], "irr_wm2", line_no)});
  }
  return out;
}

/// Minimum number of quarter-hour samples (out of 4) for an hourly value.
inline constexpr int kMinQuarterSamples = 3;

/// Reduces quarter-hour samples to hourly means. A sample at minute m in
/// {0, 15, 30, 45} belongs to the hour that contains it; other minutes are
/// ignored. Temperature and irradiation are counted independently.
inline std::vector<HourlyWeather> resample_weather(std::span<const RawWeatherRecord> records) {
  struct Accum {
    double temp_sum = 0.0, irr_sum = 0.0;
    int temp_n = 0, irr_n = 0;
  };
  std::map<Timestamp, Accum> hours;
  std::vector<const RawWeatherRecord*> sorted;
  sorted.reserve(records.size());
  for (const auto& r : records) sorted.push_back(&r);
  std::stable_sort(sorted.begin(), sorted.end(), [](const auto* a, const auto* b) {
    return std::tie(a->hour, a->minute) < std::tie(b->hour, b->minute);
  });
  for (const auto* r : sorted) {
    if (r->minute % 15 != 0) continue;
    auto& acc = hours[r->hour];
    if (r->temp_c) {
      acc.temp_sum += *r->temp_c;
      ++acc.temp_n;
    }
    if (r->irr_wm2) {
      acc.irr_sum += *r->irr_wm2;
      ++acc.irr_n;
    }
  }
  std::vector<HourlyWeather> out;
  out.reserve(hours.size());
  for (const auto& [ts, acc] : hours) {
    HourlyWeather w{ts, {}, {}};
    if (acc.temp_n >= kMinQuarterSamples) w.temperature = Field::resampled(acc.temp_sum / acc.temp_n);
    if (acc.irr_n >= kMinQuarterSamples) w.irradiation = Field::resampled(acc.irr_sum / acc.irr_n);
    out.push_back(w);
  }
  return out;
}

/// Full outer join of load and weather on the hour, sorted ascending.
inline std::vector<HourlyObservation> align(std::span<const RawLoadRecord> load,
                                            std::span<const HourlyWeather> weather) {
  std::map<Timestamp, HourlyObservation> rows;
  for (const auto& r : load) {
    auto& row = rows[r.ts];
    row.ts = r.ts;
    row.load = Field::observed(r.load_kwh);
  }
  for (const auto& w : weather) {
    auto& row = rows[w.ts];
    row.ts = w.ts;
    row.temperature = w.temperature;
    row.irradiation = w.irradiation;
  }
  std::vector<HourlyObservation> out;
  out.reserve(rows.size());
  for (auto& [ts, row] : rows) out.push_back(row);
  return out;
}

// ---------------------------------------------------------------------------
// Cleaned series CSV

inline void write_observations_csv(std::ostream& out, std::span<const HourlyObservation> obs) {
  out << "timestamp,load_kwh,load_flag,temp_c,temp_flag,irr_wm2,irr_flag\n";
  const auto put = [&](const Field& f) {
    if (f.value) out << format_double(*f.value);
    out << ',' << to_string(f.quality);
  };
  for (const auto& o : obs) {
    out << format_timestamp(o.ts) << ',';
    put(o.load);
    out << ',';
    put(o.temperature);
    out << ',';
    put(o.irradiation);
    out << '\n';
  }
}

inline std::vector<HourlyObservation> read_observations_csv(std::istream& in) {
  std::size_t line_no = 0;
  detail::expect_header(in, "timestamp,load_kwh,load_flag,temp_c,temp_flag,irr_wm2,irr_flag", line_no);
  std::vector<HourlyObservation> out;
  std::string line;
  const auto field = [&](std::string_view value, std::string_view flag, std::string_view name) {
    Field f;
    f.value = detail::parse_optional_number(value, name, line_no);
    try {
      f.quality = parse_quality(trim(flag));
    } catch (const InputError& e) {
      throw ParseError(line_no, e.what());
    }
    return f;
  };
  while (detail::next_line(in, line, line_no)) {
    const auto fs = split(trim(line));
    if (fs.size() != 7) {
      throw ParseError(line_no, "expected 7 fields, got " + std::to_string(fs.size()));
    }
    const auto [ts, minute] = detail::parse_ts_field(fs[0], line_no);
    if (minute != 0) throw ParseError(line_no, "timestamp is not on the hour");
    if (!out.empty() && !(out.back().ts < ts)) {
      throw ParseError(line_no, "timestamps must be strictly increasing");
    }
    out.push_back({ts, field(fs[1], fs[2], "load_kwh"), field(fs[3], fs[4], "temp_c"),
                   field(fs[5], fs[6], "irr_wm2")});
  }
  return out;
}

} // namespace towarx
