#pragma once

// Design matrix for the time-of-week ARX model:
//
//   L(t) = c + sum_k a_k L(t-k) + sum_k b_k T(t-k) + sum_k c_k I(t-k) + sum_s e_s D_s(t) + w(t)
//
// with load lags 1..na, temperature lags 0..nb, irradiation lags 0..nc and
// hour-of-week indicators D_s.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "towarx/calendar.hpp"
#include "towarx/ingest.hpp"
#include "towarx/text.hpp"

namespace towarx {

inline constexpr int kMaxLoadLag = 12;
inline constexpr int kMaxWeatherLag = 24;

struct LagSpec {
  int na = 1; ///< load lags 1..na
  int nb = 0; ///< temperature lags 0..nb
  int nc = 0; ///< irradiation lags 0..nc

  friend auto operator<=>(const LagSpec&, const LagSpec&) = default;

  void validate() const {
    if (na < 1 || na > kMaxLoadLag || nb < 0 || nb > kMaxWeatherLag || nc < 0 || nc > kMaxWeatherLag) {
      throw InputError("lag spec out of range: na=" + std::to_string(na) + " nb=" + std::to_string(nb) +
                       " nc=" + std::to_string(nc));
    }
  }
};

/// Nested regressor sets; each level contains the previous one.
enum class Scenario { LoadOnly, PlusTemperature, PlusIrradiation, PlusCalendar };

inline constexpr std::array<Scenario, 4> kAllScenarios{Scenario::LoadOnly, Scenario::PlusTemperature,
                                                       Scenario::PlusIrradiation, Scenario::PlusCalendar};

inline std::string_view to_string(Scenario s) {
  switch (s) {
  case Scenario::LoadOnly: return "load-only";
  case Scenario::PlusTemperature: return "plus-temperature";
  case Scenario::PlusIrradiation: return "plus-irradiation";
  case Scenario::PlusCalendar: return "plus-calendar";
  }
  return "?";
}

inline Scenario parse_scenario(std::string_view s) {
  for (auto sc : kAllScenarios) {
    if (to_string(sc) == s) return sc;
  }
  throw InputError("unknown scenario '" + std::string(s) +
                   "' (expected load-only, plus-temperature, plus-irradiation or plus-calendar)");
}

inline bool uses_temperature(Scenario s) { return s != Scenario::LoadOnly; }
inline bool uses_irradiation(Scenario s) {
  return s == Scenario::PlusIrradiation || s == Scenario::PlusCalendar;
}

enum class ColumnKind { Intercept, LoadLag, TempLag, IrrLag, CalendarDummy };

struct ColumnDescriptor {
  ColumnKind kind = ColumnKind::Intercept;
  int lag = 0;
  HourOfWeek slot{};

  friend bool operator==(const ColumnDescriptor&, const ColumnDescriptor&) = default;

  static ColumnDescriptor intercept() { return {}; }
  static ColumnDescriptor load_lag(int k) { return {ColumnKind::LoadLag, k, {}}; }
  static ColumnDescriptor temp_lag(int k) { return {ColumnKind::TempLag, k, {}}; }
  static ColumnDescriptor irr_lag(int k) { return {ColumnKind::IrrLag, k, {}}; }
  static ColumnDescriptor dummy(HourOfWeek s) { return {ColumnKind::CalendarDummy, 0, s}; }

  /// const, Q<k>, T<k>, I<k> or a slot label such as MON_8h.
  std::string label() const {
    switch (kind) {
    case ColumnKind::Intercept: return "const";
    case ColumnKind::LoadLag: return "Q" + std::to_string(lag);
    case ColumnKind::TempLag: return "T" + std::to_string(lag);
    case ColumnKind::IrrLag: return "I" + std::to_string(lag);
    case ColumnKind::CalendarDummy: return slot.label();
    }
    return "?";
  }

  static ColumnDescriptor parse(std::string_view label) {
    if (label == "const") return intercept();
    if (label.size() >= 2 && (label[0] == 'Q' || label[0] == 'T' || label[0] == 'I') &&
        label.find('_') == std::string_view::npos) {
      int k = -1;
      const auto digits = label.substr(1);
      const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), k);
      if (ec != std::errc{} || ptr != digits.data() + digits.size()) {
        throw InputError("invalid column label '" + std::string(label) + "'");
      }
      if (label[0] == 'Q' && k >= 1 && k <= kMaxLoadLag) return load_lag(k);
      if (label[0] == 'T' && k >= 0 && k <= kMaxWeatherLag) return temp_lag(k);
      if (label[0] == 'I' && k >= 0 && k <= kMaxWeatherLag) return irr_lag(k);
      throw InputError("column lag out of range in '" + std::string(label) + "'");
    }
    return dummy(parse_hour_of_week(label));
  }
};

/// Regressor columns for a scenario: intercept, load lags, then weather lags
/// as the scenario allows, then the given dummies in the order supplied.
inline std::vector<ColumnDescriptor> design_columns(const LagSpec& spec, Scenario scenario,
                                                    std::span<const HourOfWeek> dummies = {}) {
  spec.validate();
  std::vector<ColumnDescriptor> cols{ColumnDescriptor::intercept()};
  for (int k = 1; k <= spec.na; ++k) cols.push_back(ColumnDescriptor::load_lag(k));
  if (uses_temperature(scenario)) {
    for (int k = 0; k <= spec.nb; ++k) cols.push_back(ColumnDescriptor::temp_lag(k));
  }
  if (uses_irradiation(scenario)) {
    for (int k = 0; k <= spec.nc; ++k) cols.push_back(ColumnDescriptor::irr_lag(k));
  }
  if (scenario == Scenario::PlusCalendar) {
    for (auto s : dummies) cols.push_back(ColumnDescriptor::dummy(s));
  }
  return cols;
}

struct LagWindow {
  int load = 0; // deepest load lag (0 = none)
  int temp = -1; // deepest temperature lag (-1 = none)
  int irr = -1;
};

inline LagWindow lag_window(std::span<const ColumnDescriptor> cols) {
  LagWindow w;
  for (const auto& c : cols) {
    if (c.kind == ColumnKind::LoadLag) w.load = std::max(w.load, c.lag);
    if (c.kind == ColumnKind::TempLag) w.temp = std::max(w.temp, c.lag);
    if (c.kind == ColumnKind::IrrLag) w.irr = std::max(w.irr, c.lag);
  }
  return w;
}

/// One-hot over the slots eligible for a day type (Monday-first order).
inline std::vector<double> calendar_dummies(const Timestamp& ts, DayType daytype) {
  if (classify_daytype(ts) != daytype) {
    throw InputError(format_timestamp(ts) + " is not a " + std::string(to_string(daytype)));
  }
  const auto slots = eligible_hours(daytype);
  const auto current = hour_of_week(ts);
  std::vector<double> out(slots.size(), 0.0);
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (slots[i] == current) out[i] = 1.0;
  }
  return out;
}

/// Hourly observation series with constant-time lookup by hour.
class SeriesIndex {
public:
  explicit SeriesIndex(std::span<const HourlyObservation> obs) : obs_(obs) {
    if (obs.empty()) return;
    first_ = hour_index(obs.front().ts);
    const auto last = hour_index(obs.back().ts);
    if (last < first_) throw DataError("observation series is not sorted");
    slots_.assign(static_cast<std::size_t>(last - first_ + 1), npos);
    std::int64_t prev = first_ - 1;
    for (std::size_t i = 0; i < obs.size(); ++i) {
      const auto h = hour_index(obs[i].ts);
      if (h <= prev) {
        throw DataError("observation timestamps must be strictly increasing (at " +
                        format_timestamp(obs[i].ts) + ")");
      }
      slots_[static_cast<std::size_t>(h - first_)] = i;
      prev = h;
    }
  }

  std::span<const HourlyObservation> rows() const { return obs_; }
  std::size_t size() const { return obs_.size(); }

  const HourlyObservation* at_hour(std::int64_t h) const {
    if (h < first_ || h - first_ >= static_cast<std::int64_t>(slots_.size())) return nullptr;
    const auto i = slots_[static_cast<std::size_t>(h - first_)];
    return i == npos ? nullptr : &obs_[i];
  }

  std::optional<double> load(std::int64_t h) const { return usable(h, &HourlyObservation::load); }
  std::optional<double> temperature(std::int64_t h) const {
    return usable(h, &HourlyObservation::temperature);
  }
  std::optional<double> irradiation(std::int64_t h) const {
    return usable(h, &HourlyObservation::irradiation);
  }

private:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  std::optional<double> usable(std::int64_t h, Field HourlyObservation::*member) const {
    const auto* o = at_hour(h);
    if (o == nullptr || !(o->*member).usable()) return std::nullopt;
    return (o->*member).value;
  }

  std::span<const HourlyObservation> obs_;
  std::int64_t first_ = 0;
  std::vector<std::size_t> slots_;
};

/// Value of one regressor at target hour `h`, or nullopt when the required
/// input is unavailable.
template <typename LoadAt, typename TempAt, typename IrrAt>
std::optional<double> regressor_value(const ColumnDescriptor& col, std::int64_t h, LoadAt&& load_at,
                                      TempAt&& temp_at, IrrAt&& irr_at) {
  switch (col.kind) {
  case ColumnKind::Intercept: return 1.0;
  case ColumnKind::LoadLag: return load_at(h - col.lag);
  case ColumnKind::TempLag: return temp_at(h - col.lag);
  case ColumnKind::IrrLag: return irr_at(h - col.lag);
  case ColumnKind::CalendarDummy:
    return hour_of_week(from_hour_index(h)) == col.slot ? 1.0 : 0.0;
  }
  return std::nullopt;
}

struct DesignMatrix {
  SegmentKey segment;
  Scenario scenario = Scenario::PlusIrradiation;
  LagSpec spec;
  std::vector<ColumnDescriptor> columns;
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  std::vector<Timestamp> row_times;

  std::size_t rows() const { return static_cast<std::size_t>(x.rows()); }
  std::size_t cols() const { return columns.size(); }
};

/// Whether target hour `h` has a usable load and a complete, gap-free lag
/// window for the given columns.
inline bool row_available(const SeriesIndex& idx, std::int64_t h, const LagWindow& w) {
  if (!idx.load(h)) return false;
  for (int k = 1; k <= w.load; ++k) {
    if (!idx.load(h - k)) return false;
  }
  for (int k = 0; k <= w.temp; ++k) {
    if (!idx.temperature(h - k)) return false;
  }
  for (int k = 0; k <= w.irr; ++k) {
    if (!idx.irradiation(h - k)) return false;
  }
  return true;
}

/// Indices (into idx.rows()) of usable target rows for a segment.
inline std::vector<std::size_t> eligible_rows(const SeriesIndex& idx, const SegmentKey& segment,
                                              std::span<const ColumnDescriptor> cols,
                                              RowFilter filter = RowFilter::All) {
  const auto w = lag_window(cols);
  std::vector<std::size_t> out;
  const auto rows = idx.rows();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& ts = rows[i].ts;
    if (!passes(filter, ts) || !segment.contains(ts)) continue;
    if (row_available(idx, hour_index(ts), w)) out.push_back(i);
  }
  return out;
}

/// Fills X and y for the given target rows, which must already be eligible.
inline DesignMatrix assemble(const SeriesIndex& idx, std::span<const std::size_t> rows,
                             std::vector<ColumnDescriptor> cols) {
  DesignMatrix dm;
  dm.columns = std::move(cols);
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto k = static_cast<Eigen::Index>(dm.columns.size());
  dm.x.resize(n, k);
  dm.y.resize(n);
  dm.row_times.reserve(rows.size());
  const auto load_at = [&](std::int64_t h) { return idx.load(h); };
  const auto temp_at = [&](std::int64_t h) { return idx.temperature(h); };
  const auto irr_at = [&](std::int64_t h) { return idx.irradiation(h); };
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto& obs = idx.rows()[rows[static_cast<std::size_t>(r)]];
    const auto h = hour_index(obs.ts);
    for (Eigen::Index c = 0; c < k; ++c) {
      const auto v = regressor_value(dm.columns[static_cast<std::size_t>(c)], h, load_at, temp_at, irr_at);
      if (!v) throw DataError("missing regressor value at " + format_timestamp(obs.ts));
      dm.x(r, c) = *v;
    }
    dm.y(r) = *obs.load.value;
    dm.row_times.push_back(obs.ts);
  }
  return dm;
}

/// Design matrix of one segment under a scenario. Dummies must belong to the
/// segment's day type.
inline DesignMatrix build_design_matrix(const SeriesIndex& idx, const SegmentKey& segment,
                                        const LagSpec& spec, Scenario scenario,
                                        std::span<const HourOfWeek> dummies = {},
                                        RowFilter filter = RowFilter::All) {
  if (segment.season == Season::Summer) throw InputError("summer is not a modelled segment");
  for (auto s : dummies) {
    if (s.daytype() != segment.daytype) {
      throw InputError("dummy " + s.label() + " is not eligible for " + segment.name());
    }
  }
  auto cols = design_columns(spec, scenario, dummies);
  const auto rows = eligible_rows(idx, segment, cols, filter);
  if (rows.empty()) {
    std::size_t in_segment = 0;
    for (const auto& o : idx.rows()) {
      if (passes(filter, o.ts) && segment.contains(o.ts)) ++in_segment;
    }
    if (in_segment == 0) {
      throw EmptySegmentError("segment " + segment.name() + ": no observations fall in the segment");
    }
    throw EmptySegmentError("segment " + segment.name() + ": none of the " + std::to_string(in_segment) +
                            " segment rows has a usable load with a complete lag window");
  }
  auto dm = assemble(idx, rows, std::move(cols));
  dm.segment = segment;
  dm.scenario = scenario;
  dm.spec = spec;
  return dm;
}

inline void write_design_csv(std::ostream& out, const DesignMatrix& dm) {
  out << "timestamp,y";
  for (const auto& c : dm.columns) out << ',' << c.label();
  out << '\n';
  for (Eigen::Index r = 0; r < dm.x.rows(); ++r) {
    out << format_timestamp(dm.row_times[static_cast<std::size_t>(r)]) << ',' << format_double(dm.y(r));
    for (Eigen::Index c = 0; c < dm.x.cols(); ++c) out << ',' << format_double(dm.x(r, c));
    out << '\n';
  }
}

} // namespace towarx
