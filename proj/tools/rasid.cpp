#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>

#include <json.hpp>

#include "rasid/error.hpp"
#include "rasid/experiment.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace rasid;

namespace {

struct Settings {
  fs::path config_path;
  std::optional<fs::path> geometry_path;
  SynthConfig synth;
  double train_s = 120.0;
  DetectorConfig detector;
  BaselineParams baselines;
  double heat_res = 0.5;
  double heat_decay = 2.0;
  SweepGrid grid;
  std::uint64_t seed = 1;

  [[nodiscard]] json resolved() const {
    json doc{{"synth", to_json(synth)},
             {"train_s", train_s},
             {"detector", to_json(detector)},
             {"baselines", to_json(baselines)},
             {"heatmap", {{"resolution_m", heat_res}, {"decay_m", heat_decay}}},
             {"sweep",
              {{"l", grid.l}, {"alpha", grid.alpha}, {"l_update", grid.l_update}, {"stage", to_string(grid.stage)}}}};
    doc["geometry"] = geometry_path ? json(geometry_path->string()) : json(nullptr);
    return doc;
  }
};

// values given on the command line; unset ones leave the config alone
struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = "out";
  std::optional<std::size_t> l;
  std::optional<double> alpha;
  std::optional<std::size_t> l_update;
  std::optional<double> beta;
  std::optional<double> rel_threshold;
  std::optional<std::string> feature;
};

void log(const std::string& msg) { std::cerr << "[rasid] " << msg << '\n'; }

Settings load_settings(const Overrides& o) {
  Settings s;
  if (!o.config.empty()) {
    s.config_path = o.config;
    std::ifstream in(o.config);
    if (!in) throw ConfigError("cannot open config file " + o.config);
    json doc;
    try {
      doc = json::parse(in);
    } catch (const json::exception& e) {
      throw ConfigError(o.config + ": " + e.what());
    }
    static const std::set<std::string> known{"geometry", "synth",   "train_s", "detector",
                                             "baselines", "heatmap", "sweep"};
    for (const auto& [key, _] : doc.items()) {
      if (!known.contains(key)) throw ConfigError(o.config + ": unknown key '" + key + "'");
    }
    const fs::path base = fs::path(o.config).parent_path();
    try {
      if (doc.contains("geometry")) s.geometry_path = base / doc["geometry"].get<std::string>();
      if (doc.contains("synth")) s.synth = synth_config_from_json(doc["synth"]);
      s.train_s = doc.value("train_s", s.train_s);
      if (doc.contains("detector")) s.detector = detector_config_from_json(doc["detector"]);
      if (doc.contains("baselines")) s.baselines = baseline_params_from_json(doc["baselines"]);
      if (doc.contains("heatmap")) {
        s.heat_res = doc["heatmap"].value("resolution_m", s.heat_res);
        s.heat_decay = doc["heatmap"].value("decay_m", s.heat_decay);
      }
      if (doc.contains("sweep")) {
        const auto& g = doc["sweep"];
        s.grid.l = g.value("l", s.grid.l);
        s.grid.alpha = g.value("alpha", s.grid.alpha);
        s.grid.l_update = g.value("l_update", s.grid.l_update);
        if (g.contains("stage")) s.grid.stage = parse_stage(g["stage"].get<std::string>());
      }
    } catch (const json::exception& e) {
      throw ConfigError(o.config + ": " + e.what());
    }
  }
  s.seed = o.seed.value_or(s.synth.seed);
  s.synth.seed = s.seed;
  if (o.l) s.detector.l = *o.l;
  if (o.alpha) s.detector.alpha = *o.alpha;
  if (o.l_update) s.detector.l_update = *o.l_update;
  if (o.beta) s.detector.refine.beta = *o.beta;
  if (o.rel_threshold) s.detector.refine.rel_threshold = *o.rel_threshold;
  if (o.feature) s.detector.feature = parse_feature_kind(*o.feature);
  s.detector.validate();
  if (!(s.train_s > 0.0)) throw ConfigError("train_s must be > 0");
  if (!(s.heat_res > 0.0) || !(s.heat_decay > 0.0)) throw ConfigError("heatmap resolution and decay must be > 0");
  if (s.grid.l.empty() || s.grid.alpha.empty() || s.grid.l_update.empty()) throw ConfigError("sweep ranges must be non-empty");
  return s;
}

SiteGeometry geometry(const Settings& s) {
  if (!s.geometry_path) throw ConfigError("config names no geometry file");
  return load_geometry(*s.geometry_path);
}

json meta(const Settings& s, const std::string& command) {
  return json{{"command", command}, {"seed", s.seed}, {"config", s.resolved()}};
}

void write_json(const fs::path& path, const json& doc) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

json read_log_meta(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string first;
  std::getline(in, first);
  try {
    const auto doc = json::parse(first);
    if (doc.contains("meta")) return doc["meta"];
  } catch (const json::exception&) {
  }
  return json(nullptr);
}

// the training prefix and the monitored remainder of a trace
std::pair<RssTrace, RssTrace> split(const RssTrace& trace, double train_s) {
  const auto [t0, t1] = trace.time_range();
  return {trace.slice(t0, t0 + train_s), trace.slice(t0 + train_s, t1 + 1.0)};
}

std::string fmt(double v) {
  std::ostringstream s;
  s << v;
  return s.str();
}

// ---------------------------------------------------------------------------

void cmd_gen(const Settings& s, const fs::path& out) {
  const auto geo = geometry(s);
  const auto syn = generate_synthetic(s.synth, geo);
  write_trace(out / "trace.jsonl", syn.trace);
  write_labels(out / "labels.jsonl", syn.labels);
  std::cout << "seed " << s.seed << '\n';
  log("wrote " + std::to_string(syn.trace.total_samples()) + " samples over " +
      std::to_string(syn.trace.stream_count()) + " streams to " + (out / "trace.jsonl").string());
}

void cmd_train(const Settings& s, const fs::path& trace_path, std::optional<fs::path> labels_path,
               const fs::path& out) {
  const auto trace = load_trace(trace_path);
  const auto [training, rest] = split(trace, s.train_s);
  if (labels_path) {
    const auto labels = load_labels(*labels_path);
    const auto [t0, t1] = training.time_range();
    if (!labels.all_silence(t0, t1 + 1.0 / s.detector.rate_hz)) {
      throw DataError("training slice [" + fmt(t0) + ", " + fmt(t0 + s.train_s) + ") contains motion according to " +
                      labels_path->string());
    }
  } else {
    log("no labels given, training slice is assumed to be silence");
  }
  const auto bundle = train_bundle(training, s.detector.l, s.detector.alpha, s.detector.feature);
  save_bundle(out / "profiles.json", bundle);
  log("trained " + std::to_string(bundle.size()) + " profiles (seed " + std::to_string(s.seed) + ")");
}

json eval_document(const json& run_meta, const EvalReport& r) { return json{{"meta", run_meta}, {"report", to_json(r)}}; }

void cmd_run(const Settings& s, const fs::path& trace_path, const fs::path& profiles_path,
             std::optional<fs::path> labels_path, const fs::path& out) {
  const auto trace = load_trace(trace_path);
  const auto bundle = load_bundle(profiles_path);
  const auto [training, test] = split(trace, s.train_s);
  const auto result = run(test, bundle, s.detector);
  const auto m = meta(s, "run");
  write_decisions(out / "decisions.jsonl", result.decisions, m);
  write_verdicts(out / "verdicts.jsonl", result, m);
  save_bundle(out / "profiles_final.json", result.final_profiles);
  const auto alarms = std::count_if(result.decisions.begin(), result.decisions.end(),
                                    [](const GlobalDecision& d) { return d.refined_alarm; });
  log("run over " + std::to_string(result.decisions.size()) + " ticks, " + std::to_string(alarms) +
      " alarmed (seed " + std::to_string(s.seed) + ")");
  if (labels_path) {
    const auto report = score(result.decisions, load_labels(*labels_path));
    write_json(out / "report.json", eval_document(m, report));
    std::cout << format_report(report);
  }
}

void cmd_eval(const fs::path& decisions_path, const fs::path& labels_path, const fs::path& out) {
  const auto decisions = load_decisions(decisions_path);
  const auto report = score(decisions, load_labels(labels_path));
  write_json(out / "report.json", eval_document(read_log_meta(decisions_path), report));
  std::cout << format_report(report);
}

void cmd_compare(const Settings& s, const fs::path& trace_path, const fs::path& labels_path,
                 std::optional<fs::path> mle_trace, std::optional<fs::path> mle_labels, const fs::path& out) {
  const auto trace = load_trace(trace_path);
  const auto labels = load_labels(labels_path);
  const auto [training, test] = split(trace, s.train_s);
  std::optional<MleModel> mle;
  if (mle_trace.has_value() != mle_labels.has_value()) {
    throw ConfigError("--mle-trace and --mle-labels go together");
  }
  if (mle_trace) mle = MleModel::train(load_trace(*mle_trace), load_labels(*mle_labels));
  SuiteInputs in{&training, &test, &labels, mle ? &*mle : nullptr, s.detector, s.baselines};
  const auto reports = baseline_suite(in);
  auto doc = compare(reports);
  doc["meta"] = meta(s, "compare");
  write_json(out / "compare.json", doc);
  const auto table = format_comparison(reports);
  std::ofstream(out / "compare.txt", std::ios::binary | std::ios::trunc) << table;
  std::cout << table;
}

void cmd_sweep(const Settings& s, const fs::path& trace_path, const fs::path& labels_path, const fs::path& out) {
  const auto trace = load_trace(trace_path);
  const auto labels = load_labels(labels_path);
  const auto [training, test] = split(trace, s.train_s);
  const auto points = sweep(training, test, labels, s.detector, s.grid);
  json rows = json::array();
  for (const auto& p : points) rows.push_back(to_json(p));
  write_json(out / "sweep.json", json{{"meta", meta(s, "sweep")}, {"stage", to_string(s.grid.stage)}, {"points", rows}});
  log("swept " + std::to_string(points.size()) + " grid points");
}

void cmd_heatmap(const Settings& s, const fs::path& verdicts_path, double t, const fs::path& out) {
  const auto geo = geometry(s);
  const auto rows = load_verdicts(verdicts_path);
  const std::vector<StreamVerdict>* hit = nullptr;
  for (const auto& r : rows) {
    if (!r.empty() && r.front().t == t) hit = &r;
  }
  if (hit == nullptr) throw DataError("no verdicts at t=" + fmt(t) + " in " + verdicts_path.string());
  const auto map = region_heatmap(*hit, geo, s.heat_res, s.heat_decay);
  const auto path = out / ("heatmap_t" + fmt(t) + ".csv");
  write_heatmap_csv(path, map, geo.bounds);
  log("wrote " + path.string());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"RSS anomaly detection for device-free motion sensing"};
  app.require_subcommand(1);
  Overrides o;

  auto common = [&o](CLI::App* sub) {
    sub->add_option("--config", o.config, "JSON config file");
    sub->add_option("--seed", o.seed, "random seed, overrides the config");
    sub->add_option("--out", o.out, "output directory")->capture_default_str();
    sub->add_option("--l", o.l, "window length");
    sub->add_option("--alpha", o.alpha, "significance level of the critical bound");
    sub->add_option("--l-update", o.l_update, "profile update group size");
    sub->add_option("--beta", o.beta, "smoothing coefficient");
    sub->add_option("--rel-threshold", o.rel_threshold, "refinement rise over the normal level");
    sub->add_option("--feature", o.feature, "variance, std_dev or mean");
  };

  std::string trace, labels, profiles, decisions, verdicts, mle_trace, mle_labels;
  double at_t = 0.0;
  bool with_eval = false;
  std::optional<std::string> stage;
  std::vector<std::size_t> l_values, l_update_values;
  std::vector<double> alpha_values;

  auto* gen = app.add_subcommand("gen", "generate a synthetic trace and labels");
  common(gen);
  auto* train = app.add_subcommand("train", "build silence profiles from the training prefix");
  common(train);
  train->add_option("--trace", trace, "trace file (default <out>/trace.jsonl)");
  train->add_option("--labels", labels, "labels used to check the training slice");
  auto* runc = app.add_subcommand("run", "monitor the trace after the training prefix");
  common(runc);
  runc->add_option("--trace", trace);
  runc->add_option("--profiles", profiles, "profile bundle (default <out>/profiles.json)");
  runc->add_option("--labels", labels);
  runc->add_flag("--eval", with_eval, "also score the run against the labels");
  auto* eval = app.add_subcommand("eval", "score a decision log");
  common(eval);
  eval->add_option("--decisions", decisions);
  eval->add_option("--labels", labels);
  auto* cmp = app.add_subcommand("compare", "RASID against the baselines");
  common(cmp);
  cmp->add_option("--trace", trace);
  cmp->add_option("--labels", labels);
  cmp->add_option("--mle-trace", mle_trace, "training trace with tagged activity for the MLE baseline");
  cmp->add_option("--mle-labels", mle_labels);
  auto* sw = app.add_subcommand("sweep", "evaluate a parameter grid");
  common(sw);
  sw->add_option("--trace", trace);
  sw->add_option("--labels", labels);
  sw->add_option("--stage", stage, "basic, updated or refined");
  sw->add_option("--l-values", l_values);
  sw->add_option("--alpha-values", alpha_values);
  sw->add_option("--l-update-values", l_update_values);
  auto* heat = app.add_subcommand("heatmap", "region scores at one tick as a CSV grid");
  common(heat);
  heat->add_option("--verdicts", verdicts);
  heat->add_option("--t", at_t, "tick time")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    auto s = load_settings(o);
    if (stage) s.grid.stage = parse_stage(*stage);
    if (!l_values.empty()) s.grid.l = l_values;
    if (!alpha_values.empty()) s.grid.alpha = alpha_values;
    if (!l_update_values.empty()) s.grid.l_update = l_update_values;

    const fs::path out = o.out;
    fs::create_directories(out);
    auto or_default = [&out](const std::string& given, const char* name) {
      return given.empty() ? out / name : fs::path(given);
    };
    const auto trace_path = or_default(trace, "trace.jsonl");
    const auto labels_path = or_default(labels, "labels.jsonl");

    if (gen->parsed()) {
      cmd_gen(s, out);
    } else if (train->parsed()) {
      std::optional<fs::path> lp;
      if (!labels.empty() || fs::exists(labels_path)) lp = labels_path;
      cmd_train(s, trace_path, lp, out);
    } else if (runc->parsed()) {
      std::optional<fs::path> lp;
      if (with_eval) lp = labels_path;
      cmd_run(s, trace_path, or_default(profiles, "profiles.json"), lp, out);
    } else if (eval->parsed()) {
      cmd_eval(or_default(decisions, "decisions.jsonl"), labels_path, out);
    } else if (cmp->parsed()) {
      std::optional<fs::path> mt, ml;
      if (!mle_trace.empty()) mt = mle_trace;
      if (!mle_labels.empty()) ml = mle_labels;
      cmd_compare(s, trace_path, labels_path, mt, ml, out);
    } else if (sw->parsed()) {
      cmd_sweep(s, trace_path, labels_path, out);
    } else if (heat->parsed()) {
      cmd_heatmap(s, or_default(verdicts, "verdicts.jsonl"), at_t, out);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 3;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
