#pragma once

// Figure data and static SVG charts built from evaluation outputs:
//   fig3_pred_vs_actual     predicted vs actual scatter
//   fig3_residual_vs_pred   error vs predicted scatter
//   fig4_scenario_errors    RMSE / MAE per segment and scenario level
//   fig5_hourly_profiles    error metrics per month and hour of day
//   fig6_histograms         monthly error histograms (1 kWh bins centred on 0)
//   fig6_quantiles          10% / 90% markers for the histograms

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "towarx/calendar.hpp"
#include "towarx/evaluation.hpp"
#include "towarx/ingest.hpp"
#include "towarx/text.hpp"

namespace towarx {

struct ResidualRow {
  std::string segment;
  ErrorSample sample;
};

struct ComparisonRow {
  std::string segment;
  std::string scenario;
  std::size_t n = 0;
  std::optional<double> mae;
  std::optional<double> rmse;
};

namespace detail {

inline double required_number(std::string_view field, std::size_t line_no, std::string_view name) {
  const auto v = parse_double(field);
  if (!v) throw ParseError(line_no, "invalid " + std::string(name) + " '" + std::string(field) + "'");
  return *v;
}

} // namespace detail

inline std::vector<ResidualRow> read_residuals_csv(std::istream& in) {
  std::size_t line_no = 0;
  detail::expect_header(in, "segment,timestamp,actual_kwh,predicted_kwh,error_kwh", line_no);
  std::vector<ResidualRow> rows;
  std::string line;
  while (detail::next_line(in, line, line_no)) {
    const auto f = split(line);
    if (f.size() != 5) throw ParseError(line_no, "expected 5 fields");
    ResidualRow r;
    r.segment = std::string(trim(f[0]));
    r.sample.ts = detail::parse_ts_field(f[1], line_no).first;
    r.sample.actual = detail::required_number(f[2], line_no, "actual_kwh");
    r.sample.predicted = detail::required_number(f[3], line_no, "predicted_kwh");
    rows.push_back(std::move(r));
  }
  return rows;
}

inline std::vector<ComparisonRow> read_comparison_csv(std::istream& in) {
  std::size_t line_no = 0;
  detail::expect_header(in, "segment,scenario,n,mae,rmse,mape_pct,me", line_no);
  std::vector<ComparisonRow> rows;
  std::string line;
  while (detail::next_line(in, line, line_no)) {
    const auto f = split(line);
    if (f.size() != 7) throw ParseError(line_no, "expected 7 fields");
    ComparisonRow r;
    r.segment = std::string(trim(f[0]));
    r.scenario = std::string(trim(f[1]));
    r.n = static_cast<std::size_t>(detail::required_number(f[2], line_no, "n"));
    if (!trim(f[3]).empty()) r.mae = detail::required_number(f[3], line_no, "mae");
    if (!trim(f[4]).empty()) r.rmse = detail::required_number(f[4], line_no, "rmse");
    rows.push_back(std::move(r));
  }
  return rows;
}

/// Bin index of an error on the 1 kWh grid centred on 0: bin b covers
/// [b - 0.5, b + 0.5).
inline long histogram_bin(double error) { return static_cast<long>(std::floor(error + 0.5)); }

struct HistogramBin {
  long index = 0;
  std::size_t count = 0;
  double lower() const { return static_cast<double>(index) - 0.5; }
  double upper() const { return static_cast<double>(index) + 0.5; }
};

/// Contiguous bins from the lowest to the highest occupied one.
inline std::vector<HistogramBin> error_histogram(std::span<const double> errors) {
  std::map<long, std::size_t> counts;
  for (double e : errors) ++counts[histogram_bin(e)];
  std::vector<HistogramBin> out;
  if (counts.empty()) return out;
  for (long b = counts.begin()->first; b <= counts.rbegin()->first; ++b) {
    const auto it = counts.find(b);
    out.push_back({b, it == counts.end() ? 0 : it->second});
  }
  return out;
}

// ---------------------------------------------------------------------------
// SVG

namespace svg {

inline constexpr double kWidth = 800.0;
inline constexpr double kHeight = 600.0;
inline constexpr std::array<const char*, 6> kPalette{"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
    case '&': out += "&amp;"; break;
    case '<': out += "&lt;"; break;
    case '>': out += "&gt;"; break;
    case '"': out += "&quot;"; break;
    default: out += c;
    }
  }
  return out;
}

struct Range {
  double lo = 0.0, hi = 1.0;
  void widen() {
    if (!(hi > lo)) {
      lo -= 0.5;
      hi += 0.5;
    }
  }
};

inline Range range_of(std::span<const double> v) {
  Range r{0.0, 0.0};
  if (v.empty()) return {0.0, 1.0};
  const auto [mn, mx] = std::minmax_element(v.begin(), v.end());
  r = {*mn, *mx};
  r.widen();
  return r;
}

/// Plot area inside a panel, with linear mapping of data to pixels.
struct Frame {
  double x0, y0, w, h;
  Range xr, yr;
  double px(double x) const { return x0 + (x - xr.lo) / (xr.hi - xr.lo) * w; }
  double py(double y) const { return y0 + h - (y - yr.lo) / (yr.hi - yr.lo) * h; }
};

class Document {
public:
  explicit Document(std::string_view title) {
    out_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"600\" viewBox=\"0 0 800 600\" "
            "font-family=\"sans-serif\">\n"
         << "<rect width=\"800\" height=\"600\" fill=\"white\"/>\n";
    text(kWidth / 2, 24, title, 16, "middle");
  }

  void text(double x, double y, std::string_view s, int size = 11, std::string_view anchor = "start") {
    out_ << "<text x=\"" << num(x) << "\" y=\"" << num(y) << "\" font-size=\"" << size << "\" text-anchor=\""
         << anchor << "\">" << escape(s) << "</text>\n";
  }

  void line(double x1, double y1, double x2, double y2, std::string_view stroke, double width = 1.0,
            std::string_view dash = "") {
    out_ << "<line x1=\"" << num(x1) << "\" y1=\"" << num(y1) << "\" x2=\"" << num(x2) << "\" y2=\"" << num(y2)
         << "\" stroke=\"" << stroke << "\" stroke-width=\"" << num(width) << "\"";
    if (!dash.empty()) out_ << " stroke-dasharray=\"" << dash << "\"";
    out_ << "/>\n";
  }

  void rect(double x, double y, double w, double h, std::string_view fill) {
    out_ << "<rect x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\"" << num(std::max(w, 0.0))
         << "\" height=\"" << num(std::max(h, 0.0)) << "\" fill=\"" << fill << "\"/>\n";
  }

  void dot(double x, double y, std::string_view fill) {
    out_ << "<circle cx=\"" << num(x) << "\" cy=\"" << num(y) << "\" r=\"1.5\" fill=\"" << fill
         << "\" fill-opacity=\"0.5\"/>\n";
  }

  /// Box, axis extremes and labels.
  void axes(const Frame& f, std::string_view xlabel, std::string_view ylabel, int size = 11) {
    out_ << "<rect x=\"" << num(f.x0) << "\" y=\"" << num(f.y0) << "\" width=\"" << num(f.w) << "\" height=\""
         << num(f.h) << "\" fill=\"none\" stroke=\"#444\"/>\n";
    text(f.x0, f.y0 + f.h + size + 2, num(f.xr.lo), size - 1, "start");
    text(f.x0 + f.w, f.y0 + f.h + size + 2, num(f.xr.hi), size - 1, "end");
    text(f.x0 - 3, f.y0 + f.h, num(f.yr.lo), size - 1, "end");
    text(f.x0 - 3, f.y0 + size, num(f.yr.hi), size - 1, "end");
    if (!xlabel.empty()) text(f.x0 + f.w / 2, f.y0 + f.h + 2 * size + 4, xlabel, size, "middle");
    if (!ylabel.empty()) {
      out_ << "<text x=\"" << num(f.x0 - 40) << "\" y=\"" << num(f.y0 + f.h / 2) << "\" font-size=\"" << size
           << "\" text-anchor=\"middle\" transform=\"rotate(-90 " << num(f.x0 - 40) << ' ' << num(f.y0 + f.h / 2)
           << ")\">" << escape(ylabel) << "</text>\n";
    }
  }

  void legend(const std::vector<std::string>& names, double x, double y) {
    for (std::size_t i = 0; i < names.size(); ++i) {
      const double yy = y + 16.0 * static_cast<double>(i);
      rect(x, yy - 9, 10, 10, kPalette[i % kPalette.size()]);
      text(x + 14, yy, names[i]);
    }
  }

  std::string finish() {
    out_ << "</svg>\n";
    return out_.str();
  }

private:
  std::ostringstream out_;
};

} // namespace svg

namespace detail {

inline std::vector<std::string> segment_order(const std::vector<ResidualRow>& rows) {
  std::vector<std::string> names;
  for (const auto& r : rows) {
    if (std::find(names.begin(), names.end(), r.segment) == names.end()) names.push_back(r.segment);
  }
  return names;
}

inline std::string scatter_svg(const std::vector<ResidualRow>& rows, bool residual) {
  svg::Document doc(residual ? "Error vs predicted load (test set)" : "Predicted vs actual load (test set)");
  std::vector<double> xs, ys;
  for (const auto& r : rows) {
    xs.push_back(r.sample.predicted);
    ys.push_back(residual ? r.sample.error() : r.sample.actual);
  }
  svg::Range xr = svg::range_of(xs), yr = svg::range_of(ys);
  if (!residual) {
    xr = yr = {std::min(xr.lo, yr.lo), std::max(xr.hi, yr.hi)};
  }
  const svg::Frame f{90, 50, 560, 480, xr, yr};
  const auto names = segment_order(rows);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto c = static_cast<std::size_t>(std::find(names.begin(), names.end(), rows[i].segment) - names.begin());
    doc.dot(f.px(xs[i]), f.py(ys[i]), svg::kPalette[c % svg::kPalette.size()]);
  }
  if (residual) {
    if (yr.lo < 0 && yr.hi > 0) doc.line(f.x0, f.py(0), f.x0 + f.w, f.py(0), "#000", 1, "4 3");
  } else {
    doc.line(f.px(xr.lo), f.py(xr.lo), f.px(xr.hi), f.py(xr.hi), "#000", 1, "4 3");
  }
  doc.axes(f, "predicted (kWh/h)", residual ? "error = predicted - actual (kWh/h)" : "actual (kWh/h)");
  doc.legend(names, 665, 70);
  return doc.finish();
}

inline std::string scenario_svg(const std::vector<ComparisonRow>& rows) {
  svg::Document doc("Test RMSE and MAE per segment and data scenario");
  std::vector<std::string> segments, scenarios;
  double ymax = 0.0;
  for (const auto& r : rows) {
    if (std::find(segments.begin(), segments.end(), r.segment) == segments.end()) segments.push_back(r.segment);
    if (std::find(scenarios.begin(), scenarios.end(), r.scenario) == scenarios.end()) scenarios.push_back(r.scenario);
    ymax = std::max({ymax, r.rmse.value_or(0.0), r.mae.value_or(0.0)});
  }
  const svg::Frame f{90, 50, 540, 460, {0, 1}, {0, ymax > 0 ? ymax * 1.05 : 1.0}};
  const double group_w = f.w / static_cast<double>(std::max<std::size_t>(segments.size(), 1));
  const double bar_w = group_w * 0.8 / static_cast<double>(std::max<std::size_t>(scenarios.size(), 1));
  for (const auto& r : rows) {
    const auto g = static_cast<double>(std::find(segments.begin(), segments.end(), r.segment) - segments.begin());
    const auto s = static_cast<std::size_t>(std::find(scenarios.begin(), scenarios.end(), r.scenario) -
                                            scenarios.begin());
    const double x = f.x0 + g * group_w + group_w * 0.1 + static_cast<double>(s) * bar_w;
    if (r.rmse) doc.rect(x, f.py(*r.rmse), bar_w * 0.9, f.py(0) - f.py(*r.rmse), svg::kPalette[s % svg::kPalette.size()]);
    if (r.mae) doc.line(x, f.py(*r.mae), x + bar_w * 0.9, f.py(*r.mae), "#000", 2);
  }
  for (std::size_t g = 0; g < segments.size(); ++g) {
    doc.text(f.x0 + (static_cast<double>(g) + 0.5) * group_w, f.y0 + f.h + 16, segments[g], 10, "middle");
  }
  doc.axes(f, "", "kWh/h (bars: RMSE, black ticks: MAE)");
  doc.legend(scenarios, 645, 70);
  return doc.finish();
}

} // namespace detail

/// Every report file keyed by name, in a fixed order.
inline std::vector<std::pair<std::string, std::string>> build_report(const std::vector<ResidualRow>& rows,
                                                                     const std::vector<ComparisonRow>& comparison) {
  std::vector<std::pair<std::string, std::string>> files;

  // Fig. 3
  {
    std::ostringstream a, b;
    a << "segment,timestamp,actual_kwh,predicted_kwh\n";
    b << "segment,timestamp,predicted_kwh,error_kwh\n";
    for (const auto& r : rows) {
      a << r.segment << ',' << format_timestamp(r.sample.ts) << ',' << format_double(r.sample.actual) << ','
        << format_double(r.sample.predicted) << '\n';
      b << r.segment << ',' << format_timestamp(r.sample.ts) << ',' << format_double(r.sample.predicted) << ','
        << format_double(r.sample.error()) << '\n';
    }
    files.emplace_back("fig3_pred_vs_actual.csv", a.str());
    files.emplace_back("fig3_pred_vs_actual.svg", detail::scatter_svg(rows, false));
    files.emplace_back("fig3_residual_vs_pred.csv", b.str());
    files.emplace_back("fig3_residual_vs_pred.svg", detail::scatter_svg(rows, true));
  }

  // Fig. 4
  {
    std::ostringstream a;
    a << "segment,scenario,n,rmse,mae\n";
    for (const auto& r : comparison) {
      a << r.segment << ',' << r.scenario << ',' << r.n << ',' << (r.rmse ? format_double(*r.rmse) : "") << ','
        << (r.mae ? format_double(*r.mae) : "") << '\n';
    }
    files.emplace_back("fig4_scenario_errors.csv", a.str());
    files.emplace_back("fig4_scenario_errors.svg", detail::scenario_svg(comparison));
  }

  // Groups per (segment, month), segments in first-seen order.
  const auto segments = detail::segment_order(rows);
  std::vector<std::pair<std::string, int>> keys;
  std::map<std::pair<std::string, int>, std::vector<ErrorSample>> groups;
  for (const auto& seg : segments) {
    std::map<int, std::vector<ErrorSample>> by_month;
    for (const auto& r : rows) {
      if (r.segment == seg) by_month[r.sample.ts.month].push_back(r.sample);
    }
    for (auto& [month, samples] : by_month) {
      keys.emplace_back(seg, month);
      groups[{seg, month}] = std::move(samples);
    }
  }

  // Fig. 5
  {
    std::ostringstream a;
    a << "segment,month,hour,n,mae,rmse,me\n";
    svg::Document doc("Hourly test RMSE per month");
    double ymax = 0.0;
    std::vector<std::pair<std::string, std::array<std::optional<MetricSet>, 24>>> profiles;
    for (const auto& key : keys) {
      const auto prof = hourly_profile(groups[key]);
      for (int h = 0; h < 24; ++h) {
        const auto& m = prof[static_cast<std::size_t>(h)];
        if (!m) continue;
        a << key.first << ',' << key.second << ',' << h << ',' << m->n << ',' << format_double(m->mae) << ','
          << format_double(m->rmse) << ',' << format_double(m->me) << '\n';
        ymax = std::max(ymax, m->rmse);
      }
      profiles.emplace_back(key.first + " month " + std::to_string(key.second), prof);
    }
    const svg::Frame f{90, 50, 520, 480, {0, 23}, {0, ymax > 0 ? ymax * 1.05 : 1.0}};
    std::vector<std::string> names;
    for (std::size_t i = 0; i < profiles.size(); ++i) {
      const char* colour = svg::kPalette[i % svg::kPalette.size()];
      for (int h = 0; h < 24; ++h) {
        const auto& m = profiles[i].second[static_cast<std::size_t>(h)];
        if (m) doc.dot(f.px(h), f.py(m->rmse), colour);
      }
      names.push_back(profiles[i].first);
    }
    doc.axes(f, "hour of day", "RMSE (kWh/h)");
    if (names.size() > 30) names.resize(30);
    doc.legend(names, 630, 60);
    files.emplace_back("fig5_hourly_profiles.csv", a.str());
    files.emplace_back("fig5_hourly_profiles.svg", doc.finish());
  }

  // Fig. 6
  {
    std::ostringstream hist, quant;
    hist << "segment,month,bin_center,bin_lower,bin_upper,count\n";
    quant << "segment,month,n,q10,q90,q01,q99\n";
    svg::Document doc("Monthly test error histograms with 10% / 90% quantiles");
    const std::size_t panels = keys.size();
    const std::size_t cols = panels <= 4 ? std::max<std::size_t>(panels, 1) : 4;
    const std::size_t rows_n = (panels + cols - 1) / std::max<std::size_t>(cols, 1);
    const double pw = 760.0 / static_cast<double>(cols);
    const double ph = 540.0 / static_cast<double>(std::max<std::size_t>(rows_n, 1));
    for (std::size_t p = 0; p < panels; ++p) {
      const auto& key = keys[p];
      const auto errors = errors_of(groups[key]);
      const auto bins = error_histogram(errors);
      const auto q = error_quantiles(errors, kSummaryQuantiles);
      for (const auto& b : bins) {
        hist << key.first << ',' << key.second << ',' << b.index << ',' << format_double(b.lower()) << ','
             << format_double(b.upper()) << ',' << b.count << '\n';
      }
      quant << key.first << ',' << key.second << ',' << errors.size() << ',' << format_double(q[0]) << ','
            << format_double(q[1]) << ',' << format_double(q[2]) << ',' << format_double(q[3]) << '\n';

      std::size_t cmax = 1;
      for (const auto& b : bins) cmax = std::max(cmax, b.count);
      const double px0 = 20.0 + static_cast<double>(p % cols) * pw;
      const double py0 = 45.0 + static_cast<double>(p / cols) * ph;
      const svg::Frame f{px0 + 30, py0 + 16, pw - 45, ph - 40,
                         {bins.front().lower(), bins.back().upper()}, {0, static_cast<double>(cmax)}};
      for (const auto& b : bins) {
        doc.rect(f.px(b.lower()), f.py(static_cast<double>(b.count)), f.px(b.upper()) - f.px(b.lower()),
                 f.py(0) - f.py(static_cast<double>(b.count)), "#1f77b4");
      }
      doc.line(f.px(q[0]), f.y0, f.px(q[0]), f.y0 + f.h, "#d62728", 1.5, "4 2");
      doc.line(f.px(q[1]), f.y0, f.px(q[1]), f.y0 + f.h, "#d62728", 1.5, "4 2");
      doc.text(f.x0, py0 + 10, key.first + " month " + std::to_string(key.second), 10);
      doc.axes(f, "", "", 9);
    }
    files.emplace_back("fig6_histograms.csv", hist.str());
    files.emplace_back("fig6_histograms.svg", doc.finish());
    files.emplace_back("fig6_quantiles.csv", quant.str());
  }
  return files;
}

} // namespace towarx
