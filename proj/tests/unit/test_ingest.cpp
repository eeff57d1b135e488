#include <gtest/gtest.h>

#include <sstream>

#include "helpers.hpp"

using namespace towarx;

namespace {

std::vector<RawLoadRecord> load_from(const std::string& text) {
  std::istringstream in(text);
  return parse_load_csv(in);
}

std::vector<RawWeatherRecord> weather_from(const std::string& text) {
  std::istringstream in(text);
  return parse_weather_csv(in);
}

RawWeatherRecord quarter(Timestamp hour, int minute, std::optional<double> t, std::optional<double> i = 0.0) {
  return {hour, minute, t, i};
}

} // namespace

TEST(Ingest, ParsesLoadRow) {
  const auto rows = load_from("timestamp,load_kwh\n2019-01-01T00:00,23.5\n");
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].ts, (Timestamp{2019, 1, 1, 0}));
  EXPECT_DOUBLE_EQ(rows[0].load_kwh, 23.5);
}

TEST(Ingest, UnparsableLoadNamesTheLine) {
  try {
    load_from("timestamp,load_kwh\n2019-01-01T00:00,abc\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_NE(std::string(e.what()).find("abc"), std::string::npos);
  }
}

TEST(Ingest, RejectsDuplicatesHeaderAndBadTimestamps) {
  EXPECT_THROW(load_from("timestamp,load_kwh\n2019-01-01T00:00,1\n2019-01-01T00:00,2\n"), ParseError);
  EXPECT_THROW(load_from("time,load\n2019-01-01T00:00,1\n"), ParseError);
  EXPECT_THROW(load_from("timestamp,load_kwh\n2019-01-01T00:15,1\n"), ParseError);
  EXPECT_THROW(load_from("timestamp,load_kwh\n2019-13-01T00:00,1\n"), ParseError);
  EXPECT_THROW(load_from("timestamp,load_kwh\n2019-01-01T00:00\n"), ParseError);
  EXPECT_THROW(weather_from("timestamp,temp_c,irr_wm2\n2019-01-01T00:15,1,0\n2019-01-01T00:15,2,0\n"),
               ParseError);
}

TEST(Ingest, WeatherAllowsEmptyFields) {
  const auto rows = weather_from("timestamp,temp_c,irr_wm2\n2019-01-01T00:15,,12\n2019-01-01T00:30,-1.5,\n");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].minute, 15);
  EXPECT_FALSE(rows[0].temp_c);
  EXPECT_DOUBLE_EQ(*rows[0].irr_wm2, 12.0);
  EXPECT_DOUBLE_EQ(*rows[1].temp_c, -1.5);
  EXPECT_FALSE(rows[1].irr_wm2);
  EXPECT_THROW(weather_from("timestamp,temp_c,irr_wm2\n2019-01-01T00:15,x,0\n"), ParseError);
}

TEST(Ingest, ResampleMeans) {
  const Timestamp h{2019, 1, 1, 0};
  const std::vector<RawWeatherRecord> four{quarter(h, 0, 1), quarter(h, 15, 2), quarter(h, 30, 3), quarter(h, 45, 4)};
  const auto a = resample_weather(four);
  ASSERT_EQ(a.size(), 1u);
  EXPECT_DOUBLE_EQ(*a[0].temperature.value, 2.5);
  EXPECT_EQ(a[0].temperature.quality, Quality::Resampled);

  const std::vector<RawWeatherRecord> three{quarter(h, 0, 1), quarter(h, 15, 2), quarter(h, 30, 3)};
  EXPECT_DOUBLE_EQ(*resample_weather(three)[0].temperature.value, 2.0);

  const std::vector<RawWeatherRecord> two{quarter(h, 0, 1), quarter(h, 15, 2)};
  const auto c = resample_weather(two);
  EXPECT_EQ(c[0].temperature.quality, Quality::Missing);
  EXPECT_FALSE(c[0].temperature.usable());
}

TEST(Ingest, ResampleCountsFieldsIndependently) {
  const Timestamp h{2019, 1, 1, 5};
  const std::vector<RawWeatherRecord> recs{quarter(h, 0, 1, std::nullopt), quarter(h, 15, 1, std::nullopt),
                                           quarter(h, 30, 1, 100), quarter(h, 45, 1, 200)};
  const auto r = resample_weather(recs);
  EXPECT_TRUE(r[0].temperature.usable());
  EXPECT_FALSE(r[0].irradiation.usable());
}

TEST(Ingest, AlignIsAnOuterJoin) {
  const std::vector<RawLoadRecord> load{{{2019, 1, 1, 0}, 10.0}, {{2019, 1, 1, 2}, 12.0}};
  const std::vector<HourlyWeather> weather{
      {{2019, 1, 1, 1}, Field::resampled(1.0), Field::resampled(0.0)},
      {{2019, 1, 1, 2}, Field::resampled(2.0), Field::resampled(5.0)},
  };
  const auto rows = align(load, weather);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_TRUE(rows[0].load.usable());
  EXPECT_FALSE(rows[0].temperature.usable());
  EXPECT_FALSE(rows[1].load.usable());
  EXPECT_DOUBLE_EQ(*rows[1].temperature.value, 1.0);
  EXPECT_DOUBLE_EQ(*rows[2].load.value, 12.0);
  EXPECT_DOUBLE_EQ(*rows[2].irradiation.value, 5.0);
}

TEST(Ingest, EmptyWeatherLeavesWeatherMissing) {
  const std::vector<RawLoadRecord> load{{{2019, 1, 1, 0}, 10.0}};
  const auto rows = align(load, std::vector<HourlyWeather>{});
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].temperature.quality, Quality::Missing);
  EXPECT_EQ(rows[0].irradiation.quality, Quality::Missing);
}

TEST(Ingest, ObservationCsvRoundTrip) {
  std::vector<HourlyObservation> rows{
      testing_util::obs({2019, 1, 1, 0}, 10.25, -3.5, 0.0),
      testing_util::obs({2019, 1, 1, 1}, std::nullopt, 1.0 / 3.0, std::nullopt),
  };
  rows[1].temperature.quality = Quality::Imputed;
  rows[0].load.quality = Quality::Outlier;
  std::stringstream buf;
  write_observations_csv(buf, rows);
  const auto back = read_observations_csv(buf);
  ASSERT_EQ(back.size(), 2u);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(back[i].ts, rows[i].ts);
    EXPECT_EQ(back[i].load.value, rows[i].load.value);
    EXPECT_EQ(back[i].load.quality, rows[i].load.quality);
    EXPECT_EQ(back[i].temperature.value, rows[i].temperature.value);
    EXPECT_EQ(back[i].temperature.quality, rows[i].temperature.quality);
    EXPECT_EQ(back[i].irradiation.quality, rows[i].irradiation.quality);
  }
}
