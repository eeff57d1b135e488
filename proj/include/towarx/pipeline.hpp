#pragma once

// End-to-end stages behind the command-line tool. Each stage reads its
// inputs, writes its artifacts through an ArtifactWriter and finishes with a
// manifest.

#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "towarx/config.hpp"
#include "towarx/evaluation.hpp"
#include "towarx/forecast.hpp"
#include "towarx/ingest.hpp"
#include "towarx/manifest.hpp"
#include "towarx/preprocess.hpp"
#include "towarx/report.hpp"
#include "towarx/selection.hpp"
#include "towarx/serialize.hpp"
#include "towarx/synthetic.hpp"

namespace towarx {

namespace fs = std::filesystem;

struct PipelineConfig {
  fs::path out_dir = ".";
  fs::path load_csv;     // clean
  fs::path weather_csv;  // clean; forecast exogenous override
  fs::path cleaned_csv;  // fit / forecast / evaluate; default <out>/cleaned.csv
  fs::path model_dir;    // evaluate; default <out>
  fs::path model_path;   // forecast
  fs::path eval_dir;     // report; default <out>
  SelectionConfig selection;
  Scenario scenario = Scenario::PlusCalendar;
  std::vector<SegmentKey> segments{kAllSegments.begin(), kAllSegments.end()};
  int horizon = 24;
  EvaluationMode mode = EvaluationMode::OneStep;
  std::optional<Timestamp> origin; // forecast

  fs::path cleaned() const { return cleaned_csv.empty() ? out_dir / "cleaned.csv" : cleaned_csv; }
  fs::path models() const { return model_dir.empty() ? out_dir : model_dir; }
  fs::path evaluation() const { return eval_dir.empty() ? out_dir : eval_dir; }

  void validate() const {
    selection.validate();
    if (horizon < 1) throw InputError("horizon must be >= 1");
    if (segments.empty()) throw InputError("segment filter selects no segment");
  }

  /// Applies the keys this config understands; others are left for the
  /// generator or reported as unused by the caller.
  void apply(const KeyValueConfig& kv) {
    if (auto v = kv.get("out_dir")) out_dir = *v;
    if (auto v = kv.get("load_csv")) load_csv = *v;
    if (auto v = kv.get("weather_csv")) weather_csv = *v;
    if (auto v = kv.get("cleaned_csv")) cleaned_csv = *v;
    if (auto v = kv.get("model_dir")) model_dir = *v;
    if (auto v = kv.get("model")) model_path = *v;
    if (auto v = kv.get("eval_dir")) eval_dir = *v;
    if (auto v = kv.get("scenario")) scenario = parse_scenario(*v);
    if (auto v = kv.get("segments")) segments = parse_segments(*v);
    horizon = static_cast<int>(kv.integer("horizon", horizon));
    if (auto v = kv.get("evaluation_mode")) mode = parse_evaluation_mode(*v);
    if (auto v = kv.get("origin")) origin = parse_timestamp(*v);
    auto& s = selection;
    s.p_entry = kv.number("p_entry", s.p_entry);
    s.variance_threshold = kv.number("variance_threshold", s.variance_threshold);
    s.max_dummies = static_cast<int>(kv.integer("max_dummies", s.max_dummies));
    s.max_refinements = static_cast<int>(kv.integer("max_refinements", s.max_refinements));
    s.na_min = static_cast<int>(kv.integer("na_min", s.na_min));
    s.na_max = static_cast<int>(kv.integer("na_max", s.na_max));
    s.nb_min = static_cast<int>(kv.integer("nb_min", s.nb_min));
    s.nb_max = static_cast<int>(kv.integer("nb_max", s.nb_max));
    s.nc_min = static_cast<int>(kv.integer("nc_min", s.nc_min));
    s.nc_max = static_cast<int>(kv.integer("nc_max", s.nc_max));
  }

  /// "all" or a comma list such as `winter-workday, shoulder-weekend`.
  static std::vector<SegmentKey> parse_segments(std::string_view text) {
    if (trim(text) == "all") return {kAllSegments.begin(), kAllSegments.end()};
    std::vector<SegmentKey> out;
    for (auto part : split(text)) {
      const auto seg = parse_segment(trim(part));
      if (std::find(out.begin(), out.end(), seg) == out.end()) out.push_back(seg);
    }
    return out;
  }
};

inline std::string to_text(const nlohmann::ordered_json& j) { return j.dump(2) + "\n"; }

template <typename F>
std::string render(F&& f) {
  std::ostringstream ss;
  f(ss);
  return ss.str();
}

inline std::vector<HourlyObservation> load_cleaned(const fs::path& path) {
  auto in = open_input(path);
  try {
    return read_observations_csv(in);
  } catch (const ParseError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// synth

struct SynthOutcome {
  GeneratedData data;
  std::string manifest;
};

inline SynthOutcome run_synth(const GeneratorConfig& g, const fs::path& out_dir) {
  ArtifactWriter w(out_dir, "synth");
  SynthOutcome o;
  o.data = generate(g);
  w.write("load.csv", render([&](std::ostream& s) { write_load_csv(s, o.data.load); }));
  w.write("weather.csv", render([&](std::ostream& s) { write_weather_csv(s, o.data.weather); }));
  w.write("truth.json", to_text(to_json(g, o.data)));
  o.manifest = w.finish();
  return o;
}

// ---------------------------------------------------------------------------
// clean

struct CleanOutcome {
  CleanResult result;
  std::string manifest;
};

inline CleanOutcome run_clean(const PipelineConfig& cfg) {
  if (cfg.load_csv.empty()) throw InputError("clean: no load CSV given (--load or load_csv)");
  if (cfg.weather_csv.empty()) throw InputError("clean: no weather CSV given (--weather or weather_csv)");
  ArtifactWriter w(cfg.out_dir, "clean");
  std::vector<RawLoadRecord> load;
  std::vector<RawWeatherRecord> weather;
  {
    auto in = open_input(cfg.load_csv);
    try {
      load = parse_load_csv(in);
    } catch (const ParseError& e) {
      throw DataError(cfg.load_csv.string() + ": " + e.what());
    }
  }
  {
    auto in = open_input(cfg.weather_csv);
    try {
      weather = parse_weather_csv(in);
    } catch (const ParseError& e) {
      throw DataError(cfg.weather_csv.string() + ": " + e.what());
    }
  }
  w.record_input(cfg.load_csv);
  w.record_input(cfg.weather_csv);
  CleanOutcome o;
  o.result = clean(align(load, resample_weather(weather)));
  w.write("cleaned.csv", render([&](std::ostream& s) { write_observations_csv(s, o.result.series); }));
  w.write("outlier_report.json", to_text(to_json(o.result.outliers)));
  o.manifest = w.finish();
  return o;
}

// ---------------------------------------------------------------------------
// fit

inline std::string model_file(const SegmentKey& seg) { return "model_" + seg.name() + ".json"; }
inline std::string trace_file(const SegmentKey& seg) { return "trace_" + seg.name() + ".json"; }
inline std::string scenario_model_file(const SegmentKey& seg, Scenario sc) {
  return "models/" + seg.name() + "_" + std::string(to_string(sc)) + ".json";
}

struct SegmentFit {
  SegmentKey segment;
  std::optional<FittedModel> model; // at the configured scenario
  std::vector<FittedModel> levels;  // every scenario up to the configured one
  std::string warning;
};

struct FitOutcome {
  std::vector<SegmentFit> segments;
  std::string manifest;
  std::size_t failures() const {
    std::size_t n = 0;
    for (const auto& s : segments) n += s.model ? 0 : 1;
    return n;
  }
};

inline json fit_trace_json(const std::vector<LagSearchResult>& searches, const SelectionTrace* forward) {
  json j;
  json rounds = json::array();
  for (const auto& ls : searches) rounds.push_back(to_json(ls));
  j["lag_searches"] = std::move(rounds);
  j["forward_selection"] = forward ? to_json(*forward) : json(nullptr);
  return j;
}

/// Lag search per scenario level, forward selection of dummies at the
/// calendar level, then the final fit on training rows.
inline SegmentFit fit_segment(const SeriesIndex& idx, const SegmentKey& seg, const PipelineConfig& cfg,
                              json& trace) {
  SegmentFit out{seg, std::nullopt, {}, {}};
  std::vector<LagSearchResult> searches;
  const SelectionTrace* forward_trace = nullptr;
  ModelSelection selection;
  for (auto sc : kAllScenarios) {
    if (sc > cfg.scenario) break;
    if (sc == Scenario::PlusCalendar) {
      selection = select_model(idx, seg, cfg.selection);
      for (const auto& ls : selection.lag_searches) searches.push_back(ls);
      forward_trace = &selection.forward.trace;
      out.levels.push_back(selection.forward.model);
    } else {
      auto ls = lag_search(idx, seg, sc, cfg.selection);
      const auto dm = build_design_matrix(idx, seg, ls.best, sc, {}, RowFilter::Train);
      out.levels.push_back(fit_ols(dm));
      if (sc == cfg.scenario) searches.push_back(std::move(ls));
    }
  }
  trace = fit_trace_json(searches, forward_trace);
  out.model = out.levels.back();
  return out;
}

inline void write_fit_summary(std::ostream& out, const std::vector<SegmentFit>& fits) {
  out << "segment,scenario,name,n,k,r2,adj_r2,f_stat,f_pvalue,aic,bic,exact_fit\n";
  for (const auto& f : fits) {
    for (const auto& m : f.levels) {
      out << f.segment.name() << ',' << to_string(m.scenario) << ",\"" << model_name(m) << "\"," << m.n << ','
          << m.k << ',' << format_double(m.r2) << ',' << format_double(m.adj_r2) << ','
          << format_double(m.f_stat) << ',' << format_double(m.f_pvalue) << ',' << format_double(m.aic) << ','
          << format_double(m.bic) << ',' << (m.exact_fit ? "true" : "false") << '\n';
    }
  }
}

inline FitOutcome run_fit(const PipelineConfig& cfg, std::ostream& log = std::cerr) {
  cfg.validate();
  const auto data_path = cfg.cleaned();
  auto obs = load_cleaned(data_path);
  ArtifactWriter w(cfg.out_dir, "fit");
  w.record_input(data_path);
  const SeriesIndex idx(obs);
  FitOutcome o;
  for (const auto& seg : cfg.segments) {
    json trace;
    try {
      auto f = fit_segment(idx, seg, cfg, trace);
      w.write(model_file(seg), to_text(to_json(*f.model)));
      w.write(trace_file(seg), to_text(trace));
      for (const auto& m : f.levels) w.write(scenario_model_file(seg, m.scenario), to_text(to_json(m)));
      o.segments.push_back(std::move(f));
    } catch (const DataError& e) {
      log << "warning: skipping segment " << seg.name() << ": " << e.what() << '\n';
      o.segments.push_back({seg, std::nullopt, {}, e.what()});
    }
  }
  w.write("fit_summary.csv", render([&](std::ostream& s) { write_fit_summary(s, o.segments); }));
  o.manifest = w.finish();
  return o;
}

// ---------------------------------------------------------------------------
// forecast

inline FittedModel read_model(const fs::path& path) {
  const auto text = read_file(path);
  auto j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw DataError(path.string() + ": not valid JSON");
  try {
    return model_from_json(j);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

/// Hourly exogenous values from a weather CSV. Files holding only on-the-hour
/// rows are taken as hourly values; quarter-hour files are resampled.
inline ExogenousSeries read_exogenous(const fs::path& path) {
  auto in = open_input(path);
  std::vector<RawWeatherRecord> recs;
  try {
    recs = parse_weather_csv(in);
  } catch (const ParseError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  const bool hourly = std::all_of(recs.begin(), recs.end(), [](const auto& r) { return r.minute == 0; });
  std::vector<HourlyObservation> obs;
  if (hourly) {
    std::sort(recs.begin(), recs.end(), [](const auto& a, const auto& b) { return a.hour < b.hour; });
    for (const auto& r : recs) {
      HourlyObservation o{r.hour, Field::missing(), Field::missing(), Field::missing()};
      if (r.temp_c) o.temperature = Field::observed(*r.temp_c);
      if (r.irr_wm2) o.irradiation = Field::observed(*r.irr_wm2);
      obs.push_back(o);
    }
  } else {
    for (const auto& h : resample_weather(recs)) obs.push_back({h.ts, Field::missing(), h.temperature, h.irradiation});
  }
  return ExogenousSeries::from_observations(obs);
}

struct ForecastOutcome {
  ForecastResult result;
  std::string manifest;
};

inline ForecastOutcome run_forecast(const PipelineConfig& cfg) {
  cfg.validate();
  if (cfg.model_path.empty()) throw InputError("forecast: no model given (--model or model)");
  if (!cfg.origin) throw InputError("forecast: no origin given (--origin or origin)");
  const auto model = read_model(cfg.model_path);
  const auto data_path = cfg.cleaned();
  auto obs = load_cleaned(data_path);
  ArtifactWriter w(cfg.out_dir, "forecast");
  w.record_input(cfg.model_path);
  w.record_input(data_path);
  const SeriesIndex idx(obs);
  ForecastRequest req;
  req.origin = *cfg.origin;
  req.horizon = cfg.horizon;
  req.load_history = history_before(idx, req.origin, max_load_lag(model));
  if (!cfg.weather_csv.empty()) {
    w.record_input(cfg.weather_csv);
    req.exogenous = read_exogenous(cfg.weather_csv);
  } else {
    req.exogenous = ExogenousSeries::from_observations(obs);
  }
  ForecastOutcome o;
  o.result = forecast_recursive(model, req);
  w.write("forecast.csv", render([&](std::ostream& s) { write_forecast_csv(s, o.result); }));
  o.manifest = w.finish();
  return o;
}

// ---------------------------------------------------------------------------
// evaluate


struct SegmentEvaluation {
  SegmentKey segment;
  std::string model_name;
  std::vector<ErrorSample> samples;
  std::optional<MetricSet> test;
};

struct EvaluateOutcome {
  std::vector<SegmentEvaluation> segments;
  std::vector<ScenarioCell> comparison;
  std::string manifest;
};

inline void write_residuals_csv(std::ostream& out, const std::vector<SegmentEvaluation>& segs) {
  out << "segment,timestamp,actual_kwh,predicted_kwh,error_kwh\n";
  for (const auto& s : segs) {
    for (const auto& e : s.samples) {
      out << s.segment.name() << ',' << format_timestamp(e.ts) << ',' << format_double(e.actual) << ','
          << format_double(e.predicted) << ',' << format_double(e.error()) << '\n';
    }
  }
}

inline void write_monthly_csv(std::ostream& out, const std::vector<MonthlySummaryRow>& rows) {
  out << "model_id,month,n,rmse,me,q10,q90,q01,q99\n";
  for (const auto& r : rows) {
    out << r.model_id << ',' << r.month << ',' << r.n << ',' << format_double(r.rmse) << ','
        << format_double(r.me) << ',' << format_double(r.q10) << ',' << format_double(r.q90) << ','
        << format_double(r.q01) << ',' << format_double(r.q99) << '\n';
  }
}

inline void write_metric_fields(std::ostream& out, const MetricSet& m) {
  out << m.n << ',' << format_double(m.mae) << ',' << format_double(m.rmse) << ','
      << (m.mape_defined() ? format_double(m.mape) : std::string()) << ',' << format_double(m.me);
}

inline void write_hourly_csv(std::ostream& out, const std::vector<SegmentEvaluation>& segs) {
  out << "segment,hour,n,mae,rmse,mape_pct,me\n";
  for (const auto& s : segs) {
    if (s.samples.empty()) continue;
    const auto prof = hourly_profile(s.samples);
    for (int h = 0; h < 24; ++h) {
      const auto& m = prof[static_cast<std::size_t>(h)];
      if (!m) continue;
      out << s.segment.name() << ',' << h << ',';
      write_metric_fields(out, *m);
      out << '\n';
    }
  }
}

inline void write_comparison_csv(std::ostream& out, const std::vector<ScenarioCell>& cells) {
  out << "segment,scenario,n,mae,rmse,mape_pct,me\n";
  for (const auto& c : cells) {
    out << c.segment.name() << ',' << to_string(c.scenario) << ',';
    if (c.metrics) {
      write_metric_fields(out, *c.metrics);
    } else {
      out << "0,,,,";
    }
    out << '\n';
  }
}

inline EvaluateOutcome run_evaluate(const PipelineConfig& cfg) {
  cfg.validate();
  const auto data_path = cfg.cleaned();
  auto obs = load_cleaned(data_path);
  ArtifactWriter w(cfg.out_dir, "evaluate");
  w.record_input(data_path);
  const SeriesIndex idx(obs);
  EvaluateOutcome o;
  ModelTable table;
  std::vector<MonthlySummaryRow> monthly;
  json per_segment = json::object();
  for (const auto& seg : cfg.segments) {
    const auto path = cfg.models() / model_file(seg);
    if (!fs::exists(path)) continue; // segment skipped by fit
    const auto model = read_model(path);
    w.record_input(path);
    SegmentEvaluation ev{seg, model_name(model), test_predictions(model, idx, cfg.mode, cfg.horizon), std::nullopt};
    if (!ev.samples.empty()) {
      ev.test = metrics(ev.samples);
      const auto rows = monthly_summary(ev.samples, seg.name());
      monthly.insert(monthly.end(), rows.begin(), rows.end());
    }
    per_segment[seg.name()] = {{"model", ev.model_name},
                               {"scenario", std::string(to_string(model.scenario))},
                               {"test", ev.test ? to_json(*ev.test) : json(nullptr)}};
    for (auto sc : kAllScenarios) {
      const auto p = cfg.models() / scenario_model_file(seg, sc);
      if (fs::exists(p)) table.emplace(std::make_pair(seg, sc), read_model(p));
    }
    o.segments.push_back(std::move(ev));
  }
  if (o.segments.empty()) {
    throw InputError("evaluate: no model files (model_<segment>.json) found in '" + cfg.models().string() + "'");
  }
  std::vector<ErrorSample> pooled;
  for (const auto& s : o.segments) pooled.insert(pooled.end(), s.samples.begin(), s.samples.end());
  o.comparison = scenario_comparison(table, idx, cfg.mode, cfg.horizon);

  json m;
  m["mode"] = std::string(to_string(cfg.mode));
  m["horizon"] = cfg.mode == EvaluationMode::Recursive ? json(cfg.horizon) : json(nullptr);
  m["split"] = "test: even days of month";
  m["overall"] = pooled.empty() ? json(nullptr) : to_json(metrics(pooled));
  m["segments"] = std::move(per_segment);
  w.write("metrics.json", to_text(m));
  w.write("monthly_summary.csv", render([&](std::ostream& s) { write_monthly_csv(s, monthly); }));
  w.write("hourly_profile.csv", render([&](std::ostream& s) { write_hourly_csv(s, o.segments); }));
  w.write("residuals.csv", render([&](std::ostream& s) { write_residuals_csv(s, o.segments); }));
  w.write("scenario_comparison.csv", render([&](std::ostream& s) { write_comparison_csv(s, o.comparison); }));
  o.manifest = w.finish();
  return o;
}

// ---------------------------------------------------------------------------
// report

struct ReportOutcome {
  std::vector<std::string> files;
  std::string manifest;
};

inline ReportOutcome run_report(const PipelineConfig& cfg) {
  const auto residuals_path = cfg.evaluation() / "residuals.csv";
  const auto comparison_path = cfg.evaluation() / "scenario_comparison.csv";
  for (const auto& p : {residuals_path, comparison_path}) {
    if (!fs::exists(p)) throw InputError("report: missing input '" + p.string() + "' (run evaluate first)");
  }
  ArtifactWriter w(cfg.out_dir / "report", "report");
  w.record_input(residuals_path);
  w.record_input(comparison_path);
  std::vector<ResidualRow> residuals;
  std::vector<ComparisonRow> comparison;
  {
    auto in = open_input(residuals_path);
    try {
      residuals = read_residuals_csv(in);
    } catch (const ParseError& e) {
      throw DataError(residuals_path.string() + ": " + e.what());
    }
  }
  {
    auto in = open_input(comparison_path);
    try {
      comparison = read_comparison_csv(in);
    } catch (const ParseError& e) {
      throw DataError(comparison_path.string() + ": " + e.what());
    }
  }
  ReportOutcome o;
  for (auto& [name, content] : build_report(residuals, comparison)) {
    w.write(name, content);
    o.files.push_back(name);
  }
  o.manifest = w.finish();
  return o;
}

} // namespace towarx
