#pragma once

// Timestamp semantics: seasons, day types, hour-of-week slots and the
// odd/even day train/test split. Timestamps are naive local clock time at
// hourly resolution; no DST handling.

#include <array>
#include <charconv>
#include <chrono>
#include <compare>
#include <cstdint>
#include <cstdio>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "towarx/error.hpp"

namespace towarx {

struct Timestamp {
  int year = 1970;
  int month = 1;
  int day = 1;
  int hour = 0;

  friend auto operator<=>(const Timestamp&, const Timestamp&) = default;
};

inline std::chrono::year_month_day civil_date(const Timestamp& ts) {
  return std::chrono::year_month_day{std::chrono::year{ts.year},
                                     std::chrono::month{static_cast<unsigned>(ts.month)},
                                     std::chrono::day{static_cast<unsigned>(ts.day)}};
}

inline bool is_valid(const Timestamp& ts) {
  if (ts.month < 1 || ts.month > 12 || ts.day < 1 || ts.day > 31) return false;
  if (ts.hour < 0 || ts.hour > 23) return false;
  return civil_date(ts).ok();
}

inline void require_valid(const Timestamp& ts);

/// Hours elapsed since 1970-01-01T00:00. Consecutive hours differ by one.
inline std::int64_t hour_index(const Timestamp& ts) {
  const auto days = std::chrono::sys_days{civil_date(ts)}.time_since_epoch().count();
  return static_cast<std::int64_t>(days) * 24 + ts.hour;
}

inline Timestamp from_hour_index(std::int64_t index) {
  std::int64_t days = index / 24;
  std::int64_t hour = index % 24;
  if (hour < 0) {
    hour += 24;
    days -= 1;
  }
  const std::chrono::year_month_day ymd{
      std::chrono::sys_days{std::chrono::days{static_cast<int>(days)}}};
  return Timestamp{static_cast<int>(ymd.year()), static_cast<int>(static_cast<unsigned>(ymd.month())),
                   static_cast<int>(static_cast<unsigned>(ymd.day())), static_cast<int>(hour)};
}

inline Timestamp add_hours(const Timestamp& ts, std::int64_t hours) {
  return from_hour_index(hour_index(ts) + hours);
}

/// 0 = Monday ... 6 = Sunday.
inline int day_of_week(const Timestamp& ts) {
  const std::chrono::weekday wd{std::chrono::sys_days{civil_date(ts)}};
  return static_cast<int>(wd.iso_encoding()) - 1;
}

enum class Season { Winter, Shoulder, Summer };
enum class DayType { Workday, Weekend };

inline Season classify_season(int month) {
  if (month < 1 || month > 12) {
    throw InputError("month out of range: " + std::to_string(month));
  }
  switch (month) {
  case 12: case 1: case 2: return Season::Winter;
  case 6: case 7: case 8: return Season::Summer;
  default: return Season::Shoulder;
  }
}

inline Season classify_season(const Timestamp& ts) { return classify_season(ts.month); }

inline DayType classify_daytype(const Timestamp& ts) {
  require_valid(ts);
  return day_of_week(ts) < 5 ? DayType::Workday : DayType::Weekend;
}

inline std::string_view to_string(Season s) {
  switch (s) {
  case Season::Winter: return "winter";
  case Season::Shoulder: return "shoulder";
  case Season::Summer: return "summer";
  }
  return "?";
}

inline std::string_view to_string(DayType d) {
  return d == DayType::Workday ? "workday" : "weekend";
}

/// One of the four modelled (season, day-type) segments. Summer is never a
/// valid segment season.
struct SegmentKey {
  Season season = Season::Winter;
  DayType daytype = DayType::Workday;

  friend auto operator<=>(const SegmentKey&, const SegmentKey&) = default;

  bool contains(const Timestamp& ts) const {
    return classify_season(ts) == season && classify_daytype(ts) == daytype;
  }

  std::string name() const {
    return std::string(to_string(season)) + "-" + std::string(to_string(daytype));
  }
};

inline constexpr std::array<SegmentKey, 4> kAllSegments{{
    {Season::Winter, DayType::Workday},
    {Season::Winter, DayType::Weekend},
    {Season::Shoulder, DayType::Workday},
    {Season::Shoulder, DayType::Weekend},
}};

inline SegmentKey parse_segment(std::string_view text) {
  for (const auto& seg : kAllSegments) {
    if (seg.name() == text) return seg;
  }
  throw InputError("unknown segment '" + std::string(text) +
                   "' (expected winter-workday, winter-weekend, shoulder-workday or shoulder-weekend)");
}

inline constexpr std::array<std::string_view, 7> kDayNames{"MON", "TUE", "WED", "THU",
                                                          "FRI", "SAT", "SUN"};

/// Slot within the week, index = 24 * day_of_week + hour with Monday 00:00 at 0.
struct HourOfWeek {
  int index = 0;

  friend auto operator<=>(const HourOfWeek&, const HourOfWeek&) = default;

  static HourOfWeek from(int dow, int hour) {
    if (dow < 0 || dow > 6 || hour < 0 || hour > 23) {
      throw InputError("invalid hour-of-week (" + std::to_string(dow) + ", " +
                       std::to_string(hour) + ")");
    }
    return HourOfWeek{24 * dow + hour};
  }

  int dow() const { return index / 24; }
  int hour() const { return index % 24; }
  DayType daytype() const { return dow() < 5 ? DayType::Workday : DayType::Weekend; }

  /// e.g. MON_8h
  std::string label() const {
    return std::string(kDayNames[static_cast<std::size_t>(dow())]) + "_" + std::to_string(hour()) + "h";
  }
};

inline HourOfWeek hour_of_week(const Timestamp& ts) {
  require_valid(ts);
  return HourOfWeek::from(day_of_week(ts), ts.hour);
}

inline HourOfWeek parse_hour_of_week(std::string_view label) {
  const auto bad = [&] { return InputError("invalid hour-of-week label '" + std::string(label) + "'"); };
  if (label.size() < 6 || label[3] != '_' || label.back() != 'h') throw bad();
  int dow = -1;
  for (std::size_t d = 0; d < kDayNames.size(); ++d) {
    if (label.substr(0, 3) == kDayNames[d]) dow = static_cast<int>(d);
  }
  if (dow < 0) throw bad();
  const auto digits = label.substr(4, label.size() - 5);
  if (digits.empty() || digits.size() > 2) throw bad();
  int hour = 0;
  const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), hour);
  if (ec != std::errc{} || ptr != digits.data() + digits.size() || hour > 23) throw bad();
  return HourOfWeek::from(dow, hour);
}

/// Hour-of-week slots belonging to a day type, Monday-first: 120 workday slots
/// or 48 weekend slots.
inline std::vector<HourOfWeek> eligible_hours(DayType daytype) {
  std::vector<HourOfWeek> out;
  const int first = daytype == DayType::Workday ? 0 : 5;
  const int last = daytype == DayType::Workday ? 5 : 7;
  for (int d = first; d < last; ++d) {
    for (int h = 0; h < 24; ++h) out.push_back(HourOfWeek::from(d, h));
  }
  return out;
}

inline bool is_training_day(const Timestamp& ts) { return ts.day % 2 == 1; }

struct TrainTestMasks {
  std::vector<bool> train;
  std::vector<bool> test;
};

/// Odd days of the month train, even days test.
inline TrainTestMasks split_train_test(std::span<const Timestamp> timestamps) {
  TrainTestMasks masks;
  masks.train.reserve(timestamps.size());
  masks.test.reserve(timestamps.size());
  for (const auto& ts : timestamps) {
    const bool train = is_training_day(ts);
    masks.train.push_back(train);
    masks.test.push_back(!train);
  }
  return masks;
}

/// Which rows of a series an operation uses.
enum class RowFilter { All, Train, Test };

inline bool passes(RowFilter filter, const Timestamp& ts) {
  switch (filter) {
  case RowFilter::All: return true;
  case RowFilter::Train: return is_training_day(ts);
  case RowFilter::Test: return !is_training_day(ts);
  }
  return false;
}

// ---------------------------------------------------------------------------
// Text form: YYYY-MM-DDTHH:MM

inline std::string format_timestamp(const Timestamp& ts, int minute = 0) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d", ts.year, ts.month, ts.day, ts.hour,
                minute);
  return buf;
}

inline void require_valid(const Timestamp& ts) {
  if (!is_valid(ts)) throw InputError("invalid timestamp " + format_timestamp(ts));
}

/// Parses `YYYY-MM-DDTHH:MM` and returns the hour plus the minute field.
inline std::pair<Timestamp, int> parse_timestamp_minute(std::string_view text) {
  const auto bad = [&] { return InputError("invalid timestamp '" + std::string(text) + "'"); };
  if (text.size() != 16 || text[4] != '-' || text[7] != '-' || (text[10] != 'T' && text[10] != ' ') ||
      text[13] != ':') {
    throw bad();
  }
  const auto field = [&](std::size_t pos, std::size_t len) {
    int v = 0;
    const char* first = text.data() + pos;
    const auto [ptr, ec] = std::from_chars(first, first + len, v);
    if (ec != std::errc{} || ptr != first + len) throw bad();
    return v;
  };
  Timestamp ts{field(0, 4), field(5, 2), field(8, 2), field(11, 2)};
  const int minute = field(14, 2);
  if (!is_valid(ts) || minute < 0 || minute > 59) throw bad();
  return {ts, minute};
}

/// Parses an hourly `YYYY-MM-DDTHH:00` timestamp.
inline Timestamp parse_timestamp(std::string_view text) {
  const auto [ts, minute] = parse_timestamp_minute(text);
  if (minute != 0) {
    throw InputError("timestamp '" + std::string(text) + "' is not on the hour");
  }
  return ts;
}

} // namespace towarx
