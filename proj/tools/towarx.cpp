// towarx: synth | clean | fit | forecast | evaluate | report
//
// Exit codes: 0 success, 1 usage or input error, 2 data error, 3 numerical
// failure.

#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "towarx/towarx.hpp"

namespace {

using namespace towarx;

enum Exit { kOk = 0, kUsage = 1, kData = 2, kNumerical = 3 };

struct Options {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;

  std::string load, weather, data, model, models, eval_dir, scenario, mode, origin;
  std::vector<std::string> segments;
  std::optional<int> horizon, max_dummies;
  std::optional<double> p_entry;
};

KeyValueConfig read_config(const Options& o) {
  if (o.config.empty()) return {};
  auto in = open_input(o.config);
  try {
    return KeyValueConfig::parse(in);
  } catch (const ParseError& e) {
    throw InputError(o.config + ": " + e.what());
  }
}

PipelineConfig pipeline_config(const Options& o, const KeyValueConfig& kv) {
  PipelineConfig cfg;
  cfg.apply(kv);
  if (!o.out.empty()) cfg.out_dir = o.out;
  if (!o.load.empty()) cfg.load_csv = o.load;
  if (!o.weather.empty()) cfg.weather_csv = o.weather;
  if (!o.data.empty()) cfg.cleaned_csv = o.data;
  if (!o.model.empty()) cfg.model_path = o.model;
  if (!o.models.empty()) cfg.model_dir = o.models;
  if (!o.eval_dir.empty()) cfg.eval_dir = o.eval_dir;
  if (!o.scenario.empty()) cfg.scenario = parse_scenario(o.scenario);
  if (!o.mode.empty()) cfg.mode = parse_evaluation_mode(o.mode);
  if (!o.origin.empty()) cfg.origin = parse_timestamp(o.origin);
  if (!o.segments.empty()) {
    std::string joined;
    for (const auto& s : o.segments) joined += (joined.empty() ? "" : ",") + s;
    cfg.segments = PipelineConfig::parse_segments(joined);
  }
  if (o.horizon) cfg.horizon = *o.horizon;
  if (o.max_dummies) cfg.selection.max_dummies = *o.max_dummies;
  if (o.p_entry) cfg.selection.p_entry = *o.p_entry;
  return cfg;
}

void warn_unused(const KeyValueConfig& kv) {
  for (const auto& k : kv.unused_keys()) std::cerr << "warning: config key '" << k << "' is not used by this command\n";
}

int cmd_synth(const Options& o) {
  auto kv = read_config(o);
  if (o.seed) kv.set("seed", std::to_string(*o.seed));
  auto g = GeneratorConfig::from(kv);
  if (o.seed) g.seed = *o.seed;
  PipelineConfig cfg;
  cfg.apply(kv);
  if (!o.out.empty()) cfg.out_dir = o.out;
  warn_unused(kv);
  const auto r = run_synth(g, cfg.out_dir);
  std::cout << "synth: " << r.data.load.size() << " load rows, " << r.data.weather.size() << " weather samples, "
            << r.data.outlier_hours.size() << " spikes, " << r.data.load_gap_hours.size() << " load gaps -> "
            << (cfg.out_dir / r.manifest).string() << '\n';
  return kOk;
}

int cmd_clean(const Options& o) {
  const auto kv = read_config(o);
  const auto cfg = pipeline_config(o, kv);
  warn_unused(kv);
  const auto r = run_clean(cfg);
  std::cout << "clean: " << r.result.series.size() << " hours, " << r.result.outliers.flagged_rows.size()
            << " flagged as outliers (" << format_double(100.0 * r.result.outliers.flagged_fraction) << "%) -> "
            << (cfg.out_dir / r.manifest).string() << '\n';
  return kOk;
}

int cmd_fit(const Options& o) {
  const auto kv = read_config(o);
  const auto cfg = pipeline_config(o, kv);
  warn_unused(kv);
  const auto r = run_fit(cfg);
  for (const auto& s : r.segments) {
    if (!s.model) continue;
    std::cout << s.segment.name() << ": " << model_name(*s.model) << "  R2=" << format_double(s.model->r2)
              << " n=" << s.model->n << '\n';
  }
  std::cout << "fit: " << (r.segments.size() - r.failures()) << " of " << r.segments.size() << " segments -> "
            << (cfg.out_dir / r.manifest).string() << '\n';
  return r.failures() == r.segments.size() ? kData : kOk;
}

int cmd_forecast(const Options& o) {
  const auto kv = read_config(o);
  const auto cfg = pipeline_config(o, kv);
  warn_unused(kv);
  const auto r = run_forecast(cfg);
  std::cout << "forecast: " << r.result.predicted.size() << " hours from " << format_timestamp(*cfg.origin) << " -> "
            << (cfg.out_dir / r.manifest).string() << '\n';
  return kOk;
}

int cmd_evaluate(const Options& o) {
  const auto kv = read_config(o);
  const auto cfg = pipeline_config(o, kv);
  warn_unused(kv);
  const auto r = run_evaluate(cfg);
  for (const auto& s : r.segments) {
    std::cout << s.segment.name() << ": ";
    if (s.test) {
      std::cout << "RMSE=" << format_double(s.test->rmse) << " MAE=" << format_double(s.test->mae)
                << " n=" << s.test->n << '\n';
    } else {
      std::cout << "no test predictions\n";
    }
  }
  std::cout << "evaluate (" << to_string(cfg.mode) << ") -> " << (cfg.out_dir / r.manifest).string() << '\n';
  return kOk;
}

int cmd_report(const Options& o) {
  const auto kv = read_config(o);
  const auto cfg = pipeline_config(o, kv);
  warn_unused(kv);
  const auto r = run_report(cfg);
  std::cout << "report: " << r.files.size() << " files -> " << (cfg.out_dir / "report" / r.manifest).string()
            << '\n';
  return kOk;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Time-of-week ARX heat load modelling"};
  app.require_subcommand(1);
  app.fallthrough();
  Options o;
  app.add_option("--config", o.config, "key = value configuration file");
  app.add_option("--out", o.out, "output directory (default: current directory)");
  app.add_option("--seed", o.seed, "random seed for synth");

  auto* synth = app.add_subcommand("synth", "generate synthetic load and weather CSVs with known truth");

  auto* clean = app.add_subcommand("clean", "ingest, flag outliers and impute short weather gaps");
  clean->add_option("--load", o.load, "load CSV (timestamp,load_kwh)");
  clean->add_option("--weather", o.weather, "weather CSV (timestamp,temp_c,irr_wm2), 15-minute steps");

  auto* fit = app.add_subcommand("fit", "select and fit one model per segment");
  fit->add_option("--data", o.data, "cleaned series CSV (default: <out>/cleaned.csv)");
  fit->add_option("--scenario", o.scenario, "load-only | plus-temperature | plus-irradiation | plus-calendar");
  fit->add_option("--segment", o.segments, "restrict to segments, e.g. winter-workday (repeatable)");
  fit->add_option("--p-entry", o.p_entry, "entry threshold for calendar dummies");
  fit->add_option("--max-dummies", o.max_dummies, "maximum number of calendar dummies");

  auto* forecast = app.add_subcommand("forecast", "recursive multi-step forecast from a model");
  forecast->add_option("--model", o.model, "model JSON");
  forecast->add_option("--data", o.data, "cleaned series CSV providing the load history");
  forecast->add_option("--weather", o.weather, "exogenous weather CSV (default: weather in --data)");
  forecast->add_option("--origin", o.origin, "first forecast hour, YYYY-MM-DDTHH:00");
  forecast->add_option("--horizon", o.horizon, "hours to forecast (default 24)");

  auto* evaluate = app.add_subcommand("evaluate", "score the fitted models on the test days");
  evaluate->add_option("--data", o.data, "cleaned series CSV (default: <out>/cleaned.csv)");
  evaluate->add_option("--models", o.models, "directory holding model_<segment>.json (default: <out>)");
  evaluate->add_option("--mode", o.mode, "one-step | recursive");
  evaluate->add_option("--horizon", o.horizon, "recursive horizon in hours (default 24)");
  evaluate->add_option("--segment", o.segments, "restrict to segments (repeatable)");

  auto* report = app.add_subcommand("report", "figure CSVs and SVG charts from evaluation output");
  report->add_option("--input", o.eval_dir, "directory holding evaluation output (default: <out>)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  try {
    if (*synth) return cmd_synth(o);
    if (*clean) return cmd_clean(o);
    if (*fit) return cmd_fit(o);
    if (*forecast) return cmd_forecast(o);
    if (*evaluate) return cmd_evaluate(o);
    if (*report) return cmd_report(o);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kData;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kData;
  }
  return kUsage;
}
