#include "skidsim/cli.hpp"

#include <CLI11.hpp>
#include <csignal>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <pthread.h>
#include <sstream>

#include "skidsim/config.hpp"
#include "skidsim/errors.hpp"
#include "skidsim/plot.hpp"
#include "skidsim/sweep.hpp"
#include "skidsim/teleop/server.hpp"
#include "skidsim/trace_io.hpp"
#include "skidsim/tune.hpp"

namespace skidsim::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Bad input that is not a scenario file (seed lists, trace files, flags).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string config;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  std::string seeds = "1-10";
  std::string terrains;
  std::string format = "csv";
  int jobs = 1;
  bool keep_traces = false;
  std::vector<std::string> inputs;
  // serve
  std::string address = "127.0.0.1";
  unsigned short port = 8080;
  double broadcast_hz = 20.0;
  double max_speed = 1.5;
  double max_accel = 1.0;
};

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("skidsim");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::info);
  if (const char* env = std::getenv("SKIDSIM_LOG")) {
    const auto level = spdlog::level::from_str(env);
    if (level != spdlog::level::off || std::string_view(env) == "off") spdlog::set_level(level);
  }
}

ScenarioConfig load(const Options& o) {
  if (o.config.empty()) throw ConfigError("--config is required");
  try {
    ScenarioConfig c = load_scenario(o.config);
    if (o.seed) c.seed = *o.seed;
    return c;
  } catch (const ConfigError& e) {
    throw ConfigError(o.config + ": " + e.what());
  }
}

std::string slug(std::string_view name) {
  std::string s;
  for (char c : name) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      s += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    } else if (!s.empty() && s.back() != '_') {
      s += '_';
    }
  }
  while (!s.empty() && s.back() == '_') s.pop_back();
  return s;
}

std::string fmt_opt(const std::optional<double>& x) { return x ? fmt::format("{}", *x) : ""; }

void write_trace_files(const fs::path& dir, const SimTrace& trace) {
  fs::create_directories(dir);
  std::ostringstream csv;
  write_trace_csv(csv, trace.records);
  write_file_atomic(dir / "trace.csv", csv.str());
  write_file_atomic(dir / "meta.json", meta_to_json(trace.meta).dump(2) + "\n");
}

json run_metrics(const SimTrace& trace, const ScenarioConfig& config) {
  SweepOptions options;
  const RunSummary summary = summarize(trace, config, options);
  json j = run_summary_to_json(summary);
  j.erase("envelope_alpha");
  try {
    ExpEnvelope env = exp_envelope_fit(trace, 0.0, options.envelope_t_end);
    if (config.controller.kind == ControllerKind::kNnrmfc) {
      env.rho_bound = theoretical_rate(config.controller.gains, config.plant.g_right, config.plant.g_left);
    }
    j["envelope"] = envelope_to_json(env);
  } catch (const std::invalid_argument& e) {
    j["envelope"] = nullptr;
    j["envelope_note"] = e.what();
  }
  return j;
}

int cmd_run(const Options& o) {
  const ScenarioConfig config = load(o);
  const SimTrace trace = run_scenario(config);
  const fs::path out(o.out);
  write_trace_files(out, trace);
  const json metrics = {{config.id, run_metrics(trace, config)}};
  write_file_atomic(out / "metrics.json", metrics.dump(2) + "\n");
  if (o.format == "csv") {
    const json& m = metrics[config.id];
    const auto& step = m["step"];
    std::string text =
        "scenario_id,final_error_mean,max_abs_slip,settling_time,overshoot_pct,steady_state_error,envelope_alpha,faulted\n";
    text += fmt::format("{},{},{},{},{},{},{},{}\n", config.id, m["final_error_mean"].dump(),
                        m["max_abs_slip"].dump(), step.is_null() ? "" : step["settling_time"].dump(),
                        step.is_null() ? "" : step["overshoot_pct"].dump(),
                        step.is_null() ? "" : step["steady_state_error"].dump(),
                        m["envelope"].is_null() ? "" : m["envelope"]["alpha"].dump(),
                        trace.meta.faulted);
    write_file_atomic(out / "metrics.csv", text);
  }
  for (const auto& w : trace.meta.warnings) spdlog::warn("{}", w);
  if (trace.meta.faulted) {
    spdlog::error("run faulted after {} samples: {}", trace.records.size(), trace.meta.fault_message);
    return kExitFault;
  }
  fmt::print("{}: {} samples, final mean |e| = {:.5f} m/s -> {}\n", config.id, trace.records.size(),
             metrics[config.id]["final_error_mean"].get<double>(), out.string());
  return kExitOk;
}

std::vector<TerrainModel> sweep_terrains(const Options& o) {
  std::vector<TerrainModel> terrains;
  if (o.terrains.empty()) {
    terrains = builtin_terrains();
  } else {
    std::stringstream ss(o.terrains);
    for (std::string name; std::getline(ss, name, ',');) {
      auto t = find_builtin_terrain(name);
      if (!t) throw InputError("--terrains: unknown terrain '" + name + "'");
      terrains.push_back(*t);
    }
  }
  return terrains;
}

std::vector<std::uint64_t> seeds_for(const Options& o, bool seeds_given) {
  if (o.seed && !seeds_given) return {*o.seed};
  try {
    return parse_seed_list(o.seeds);
  } catch (const ConfigError& e) {
    throw InputError(std::string("--seeds: ") + e.what());
  }
}

int cmd_sweep(const Options& o, bool seeds_given) {
  const ScenarioConfig base = load(o);
  const auto terrains = sweep_terrains(o);
  const auto seeds = seeds_for(o, seeds_given);
  SweepOptions options;
  options.jobs = o.jobs;
  options.keep_traces = o.keep_traces;
  spdlog::info("sweep: {} terrains x {} seeds, {} jobs", terrains.size(), seeds.size(), o.jobs);
  const SweepResult result = run_sweep(base, terrains, seeds, options);

  const fs::path out(o.out);
  fs::create_directories(out);
  if (o.format == "json") {
    json runs = json::object();
    for (const auto& r : result.runs) runs[r.scenario_id] = run_summary_to_json(r);
    json aggregates = json::array();
    for (const auto& a : result.aggregates) aggregates.push_back(aggregate_to_json(a));
    write_file_atomic(out / "sweep.json", json{{"runs", runs}, {"aggregates", aggregates}}.dump(2) + "\n");
  } else {
    std::string runs =
        "scenario_id,terrain,seed,final_error_mean,settling_time,overshoot_pct,steady_state_error,"
        "envelope_alpha,max_abs_slip,faulted\n";
    for (const auto& r : result.runs) {
      runs += fmt::format("{},{},{},{},{},{},{},{},{},{}\n", r.scenario_id, r.terrain, r.seed,
                          r.final_error_mean, r.step ? fmt::format("{}", r.step->settling_time) : "",
                          r.step ? fmt::format("{}", r.step->overshoot_pct) : "",
                          r.step ? fmt::format("{}", r.step->steady_state_error) : "",
                          fmt_opt(r.envelope_alpha), r.max_abs_slip, r.faulted);
    }
    write_file_atomic(out / "runs.csv", runs);
    std::string agg =
        "terrain,runs,faulted,final_error_mean,settling_time,overshoot_pct,steady_state_error,max_abs_slip\n";
    for (const auto& a : result.aggregates) {
      agg += fmt::format("{},{},{},{},{},{},{},{}\n", a.terrain, a.runs, a.faulted, a.final_error_mean,
                         fmt_opt(a.settling_time), fmt_opt(a.overshoot_pct),
                         fmt_opt(a.steady_state_error), a.max_abs_slip);
    }
    write_file_atomic(out / "aggregates.csv", agg);
  }
  if (o.keep_traces) {
    for (const auto& trace : result.traces) {
      write_trace_files(out / "traces" / slug(trace.meta.terrain) / fmt::format("seed-{}", trace.meta.seed),
                        trace);
    }
  }

  int faulted = 0;
  fmt::print("{:<12} {:>5} {:>14} {:>12}\n", "terrain", "runs", "final |e|", "settling");
  for (const auto& a : result.aggregates) {
    faulted += a.faulted;
    fmt::print("{:<12} {:>5} {:>14.6f} {:>12}\n", a.terrain, a.runs, a.final_error_mean,
               a.settling_time ? fmt::format("{:.5f}", *a.settling_time) : "-");
  }
  for (const auto& r : result.runs) {
    if (r.faulted) spdlog::error("{} faulted: {}", r.scenario_id, r.fault_message);
  }
  return faulted > 0 ? kExitFault : kExitOk;
}

int cmd_compare(const Options& o, bool seeds_given) {
  const ScenarioConfig base = load(o);
  if (!std::holds_alternative<StepProfile>(base.profile)) {
    throw ConfigError(o.config + ": compare needs a step profile (profile.type: step)");
  }
  const auto seeds = seeds_for(o, seeds_given);
  std::map<std::string, std::vector<SimTrace>> traces;
  bool faulted = false;
  for (const auto kind : {ControllerKind::kNnrmfc, ControllerKind::kPid}) {
    ScenarioConfig config = base;
    config.controller.kind = kind;
    auto& list = traces[std::string(controller_kind_name(kind))];
    for (const auto seed : seeds) {
      config.seed = seed;
      list.push_back(run_scenario(config));
      faulted = faulted || list.back().meta.faulted;
    }
  }
  const ComparisonTable table = compare_controllers(traces);
  const auto& nn = table.rows[0].runs;  // map order: nnrmfc, pid
  const auto& pid = table.rows[1].runs;
  int wins = 0;
  for (std::size_t i = 0; i < nn.size(); ++i) {
    if (nn[i].settling_time < pid[i].settling_time &&
        nn[i].steady_state_error < pid[i].steady_state_error) {
      ++wins;
    }
  }

  const fs::path out(o.out);
  fs::create_directories(out);
  if (o.format == "json") {
    json rows = json::object();
    for (const auto& row : table.rows) {
      json runs = json::array();
      for (const auto& m : row.runs) runs.push_back(step_metrics_to_json(m));
      rows[row.controller] = {{"mean", step_metrics_to_json(row.mean)}, {"runs", runs}};
    }
    json deltas = json::array();
    for (const auto& d : table.deltas) {
      deltas.push_back({{"a", d.a},
                        {"b", d.b},
                        {"settling_time", std::isfinite(d.settling_time) ? json(d.settling_time) : json(nullptr)},
                        {"overshoot_pct", d.overshoot_pct},
                        {"steady_state_error", d.steady_state_error}});
    }
    const json report = {{base.id, {{"seeds", seeds}, {"controllers", rows}, {"deltas", deltas},
                                    {"nnrmfc_wins_both", wins}}}};
    write_file_atomic(out / "comparison.json", report.dump(2) + "\n");
  } else {
    std::string text = "controller,seed,settling_time,overshoot_pct,steady_state_error\n";
    for (const auto& row : table.rows) {
      for (std::size_t i = 0; i < row.runs.size(); ++i) {
        text += fmt::format("{},{},{},{},{}\n", row.controller, seeds[i], row.runs[i].settling_time,
                            row.runs[i].overshoot_pct, row.runs[i].steady_state_error);
      }
    }
    write_file_atomic(out / "comparison.csv", text);
  }
  fmt::print("{:<8} {:>12} {:>12} {:>12}\n", "", "settling", "overshoot%", "sse");
  for (const auto& row : table.rows) {
    fmt::print("{:<8} {:>12.5f} {:>12.3f} {:>12.6f}\n", row.controller, row.mean.settling_time,
               row.mean.overshoot_pct, row.mean.steady_state_error);
  }
  fmt::print("nnrmfc better on settling and steady-state error in {} of {} seeds\n", wins, seeds.size());
  return faulted ? kExitFault : kExitOk;
}

int cmd_tune(const Options& o) {
  const ScenarioConfig config = load(o);
  const TuneReport report = run_tune_protocol(config);
  json rounds = json::array();
  for (const auto& r : report.rounds) {
    json m = json::object();
    for (const auto& [k, v] : r.measurements) m[k] = v;
    rounds.push_back({{"round", r.number}, {"name", r.name}, {"ran", r.ran}, {"passed", r.passed},
                      {"measurements", m}, {"note", r.note}});
    fmt::print("round {} {:<22} {}", r.number, r.name, !r.ran ? "SKIPPED" : r.passed ? "PASS" : "FAIL");
    for (const auto& [k, v] : r.measurements) fmt::print("  {}={:.6g}", k, v);
    fmt::print("\n");
  }
  const fs::path out(o.out);
  fs::create_directories(out);
  write_file_atomic(out / "tune_report.json",
                    json{{config.id, {{"passed", report.passed()}, {"rounds", rounds}}}}.dump(2) + "\n");
  return report.passed() ? kExitOk : kExitFault;
}

int cmd_serve(const Options& o) {
  ScenarioConfig config = o.config.empty() ? ScenarioConfig{} : load(o);
  if (o.config.empty() && o.seed) config.seed = *o.seed;
  teleop::ServerOptions options;
  options.address = o.address;
  options.port = o.port;
  options.session.broadcast_hz = o.broadcast_hz;
  options.session.max_speed = o.max_speed;
  options.session.max_accel = config.teleop_max_accel.value_or(o.max_accel);

  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  teleop::TeleopServer server(config, options);
  server.start();
  fmt::print("serving ws://{}:{}/ws (health: /healthz); Ctrl-C to stop\n", o.address, server.port());
  std::fflush(stdout);
  int sig = 0;
  sigwait(&signals, &sig);
  spdlog::info("signal {} received, shutting down", sig);
  server.stop();
  return kExitOk;
}

int cmd_plot(const Options& o) {
  if (o.inputs.empty()) throw InputError("plot: give at least one trace directory or trace.csv");
  std::vector<SimTrace> traces;
  std::vector<std::string> stems;
  std::map<std::string, int> used;
  for (const auto& input : o.inputs) {
    try {
      traces.push_back(load_trace(input));
    } catch (const TraceFormatError& e) {
      throw InputError(input + ": " + e.what());
    }
    if (traces.back().records.empty()) throw InputError(input + ": trace has no samples");
    fs::path p = fs::path(input).lexically_normal();
    if (p.has_filename() && p.filename() == "trace.csv") p = p.parent_path();
    if (!p.has_filename()) p = p.parent_path();
    std::string stem = fs::is_regular_file(p) ? p.stem().string() : p.filename().string();
    if (stem.empty()) stem = "trace";
    if (used.contains(stem) && p.has_parent_path() && !p.parent_path().filename().empty()) {
      stem = p.parent_path().filename().string() + "_" + stem;
    }
    if (const int n = used[stem]++; n > 0) stem += fmt::format("_{}", n);
    stems.push_back(stem);
  }
  std::vector<RenderedFile> files;
  for (std::size_t i = 0; i < traces.size(); ++i) {
    try {
      for (auto& f : render_trace_charts(traces[i], stems[i])) files.push_back(std::move(f));
    } catch (const std::invalid_argument& e) {
      throw InputError(o.inputs[i] + ": " + e.what());
    }
  }
  if (traces.size() > 1) files.push_back(render_terrain_errors(traces));
  const fs::path out(o.out);
  fs::create_directories(out);
  for (const auto& f : files) write_file_atomic(out / f.name, f.svg);
  fmt::print("wrote {} plots to {}\n", files.size(), out.string());
  return kExitOk;
}

}  // namespace

std::vector<std::uint64_t> parse_seed_list(std::string_view text) {
  const auto number = [&](std::string_view s) {
    std::uint64_t v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size() || s.empty()) {
      throw ConfigError("bad seed '" + std::string(s) + "' in '" + std::string(text) + "'");
    }
    return v;
  };
  std::vector<std::uint64_t> seeds;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = std::min(text.find(',', start), text.size());
    const std::string_view item = text.substr(start, comma - start);
    if (const auto dash = item.find('-'); dash != std::string_view::npos) {
      const auto lo = number(item.substr(0, dash));
      const auto hi = number(item.substr(dash + 1));
      if (hi < lo) throw ConfigError("descending seed range '" + std::string(item) + "'");
      for (auto s = lo; s <= hi; ++s) seeds.push_back(s);
    } else {
      seeds.push_back(number(item));
    }
    start = comma + 1;
  }
  return seeds;
}

int run(const std::vector<std::string>& args) {
  if (!spdlog::get("skidsim")) setup_logging();

  CLI::App app{"skid-steer robot simulator with an adaptive RBF-network velocity controller"};
  app.require_subcommand(1);
  Options o;

  const auto add_common = [&](CLI::App* sub, bool config_required) {
    auto* c = sub->add_option("-c,--config", o.config, "scenario YAML file");
    if (config_required) c->required();
    sub->add_option("-o,--out", o.out, "output directory")->capture_default_str();
    sub->add_option("--seed", o.seed, "override the scenario seed");
  };
  const auto add_format = [&](CLI::App* sub) {
    sub->add_option("--format", o.format, "table format")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
  };

  auto* run_cmd = app.add_subcommand("run", "run one scenario, write trace.csv, meta.json, metrics.json");
  add_common(run_cmd, true);
  add_format(run_cmd);

  auto* sweep_cmd = app.add_subcommand("sweep", "run a scenario over terrains and seeds");
  add_common(sweep_cmd, true);
  add_format(sweep_cmd);
  auto* sweep_seeds = sweep_cmd->add_option("--seeds", o.seeds, "seed list, e.g. 1-10 or 1,4,9")->capture_default_str();
  sweep_cmd->add_option("--terrains", o.terrains, "comma-separated terrain names (default: all five)");
  sweep_cmd->add_option("-j,--jobs", o.jobs, "parallel runs")->check(CLI::PositiveNumber)->capture_default_str();
  sweep_cmd->add_flag("--traces", o.keep_traces, "also write every trace under <out>/traces");

  auto* compare_cmd = app.add_subcommand("compare", "NN-RMFC vs PID on a step scenario with shared seeds");
  add_common(compare_cmd, true);
  add_format(compare_cmd);
  auto* compare_seeds = compare_cmd->add_option("--seeds", o.seeds, "seed list")->capture_default_str();

  auto* tune_cmd = app.add_subcommand("tune-protocol", "hold, pivot and tracking rounds for a gain set");
  add_common(tune_cmd, true);

  auto* serve_cmd = app.add_subcommand("serve", "teleop WebSocket server paced to wall clock");
  add_common(serve_cmd, false);
  serve_cmd->add_option("--address", o.address)->capture_default_str();
  serve_cmd->add_option("-p,--port", o.port)->capture_default_str();
  serve_cmd->add_option("--broadcast-hz", o.broadcast_hz)->check(CLI::PositiveNumber)->capture_default_str();
  serve_cmd->add_option("--max-speed", o.max_speed, "per-side command limit, m/s")->check(CLI::PositiveNumber)->capture_default_str();
  serve_cmd->add_option("--max-accel", o.max_accel, "command slew limit, m/s^2")->check(CLI::PositiveNumber)->capture_default_str();

  auto* plot_cmd = app.add_subcommand("plot", "SVG plots of recorded traces");
  plot_cmd->add_option("traces", o.inputs, "trace directories or trace.csv files")->required();
  plot_cmd->add_option("-o,--out", o.out, "output directory")->capture_default_str();

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run_cmd) return cmd_run(o);
    if (*sweep_cmd) return cmd_sweep(o, sweep_seeds->count() > 0);
    if (*compare_cmd) return cmd_compare(o, compare_seeds->count() > 0);
    if (*tune_cmd) return cmd_tune(o);
    if (*serve_cmd) return cmd_serve(o);
    if (*plot_cmd) return cmd_plot(o);
  } catch (const ConfigError& e) {
    spdlog::error("{}", e.what());
    return kExitConfig;
  } catch (const InputError& e) {
    spdlog::error("{}", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitFault;
  }
  return kExitConfig;
}

}  // namespace skidsim::cli
