#include "skidsim/trace_io.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace skidsim {

namespace {

using nlohmann::json;

json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json centers_json(const std::vector<Vec2>& centers) {
  json out = json::array();
  for (const auto& c : centers) out.push_back({c.x(), c.y()});
  return out;
}

std::vector<Vec2> centers_from(const json& j) {
  std::vector<Vec2> out;
  for (const auto& c : j) out.emplace_back(c.at(0).get<double>(), c.at(1).get<double>());
  return out;
}

}  // namespace

std::string trace_csv_header() {
  std::string h;
  for (std::size_t i = 0; i < kTraceColumns.size(); ++i) {
    if (i) h += ',';
    h += kTraceColumns[i];
  }
  return h;
}

void write_trace_csv(std::ostream& out, const std::vector<TraceRecord>& records) {
  out << trace_csv_header() << '\n';
  fmt::memory_buffer buf;
  for (const auto& r : records) {
    buf.clear();
    const auto values = record_values(r);
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (i) buf.push_back(',');
      fmt::format_to(std::back_inserter(buf), "{}", values[i]);
    }
    buf.push_back('\n');
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  }
}

std::vector<TraceRecord> read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) {
    throw TraceFormatError("trace is empty; expected header: " + trace_csv_header());
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != trace_csv_header()) {
    std::vector<std::string> got;
    std::stringstream ss(line);
    for (std::string col; std::getline(ss, col, ',');) got.push_back(col);
    std::string missing;
    for (const auto col : kTraceColumns) {
      if (std::find(got.begin(), got.end(), col) == got.end()) {
        missing += missing.empty() ? "" : ", ";
        missing += col;
      }
    }
    throw TraceFormatError(
        fmt::format("trace header does not match the schema{}; expected columns (in order): {}",
                    missing.empty() ? "" : " (missing: " + missing + ")", trace_csv_header()));
  }
  std::vector<TraceRecord> records;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::array<double, 18> values{};
    const char* p = line.data();
    const char* end = line.data() + line.size();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const auto [next, ec] = std::from_chars(p, end, values[i]);
      const bool last = i + 1 == values.size();
      if (ec != std::errc() || (last ? next != end : (next == end || *next != ','))) {
        throw TraceFormatError(fmt::format("trace row {}: expected {} numeric columns", row,
                                           values.size()));
      }
      p = next + 1;
    }
    records.push_back(record_from_values(values));
  }
  return records;
}

std::vector<TraceRecord> read_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw TraceFormatError("cannot open trace '" + path.string() + "'");
  return read_trace_csv(in);
}

json meta_to_json(const TraceMeta& m) {
  json j;
  j["scenario_id"] = m.scenario_id;
  j["terrain"] = m.terrain;
  j["controller"] = m.controller;
  j["preset"] = m.preset;
  j["profile"] = m.profile;
  j["seed"] = m.seed;
  j["rbf_seed"] = m.rbf_seed;
  j["sample_period"] = m.sample_period;
  j["dt_plant"] = m.dt_plant;
  j["scenario_key"] = m.scenario_key;
  j["warnings"] = m.warnings;
  j["faulted"] = m.faulted;
  j["last_valid_index"] = m.last_valid_index ? json(*m.last_valid_index) : json(nullptr);
  j["fault_message"] = m.fault_message;
  j["g_right"] = m.g_right;
  j["g_left"] = m.g_left;
  j["centers_right"] = centers_json(m.centers_right);
  j["centers_left"] = centers_json(m.centers_left);
  j["columns"] = kTraceColumns;
  return j;
}

TraceMeta meta_from_json(const json& j) {
  TraceMeta m;
  m.scenario_id = j.value("scenario_id", "");
  m.terrain = j.value("terrain", "");
  m.controller = j.value("controller", "");
  m.preset = j.value("preset", "");
  m.profile = j.value("profile", "");
  m.seed = j.value("seed", std::uint64_t{0});
  m.rbf_seed = j.value("rbf_seed", std::uint64_t{0});
  m.sample_period = j.value("sample_period", 0.0);
  m.dt_plant = j.value("dt_plant", 0.0);
  m.scenario_key = j.value("scenario_key", "");
  m.warnings = j.value("warnings", std::vector<std::string>{});
  m.faulted = j.value("faulted", false);
  if (j.contains("last_valid_index") && j["last_valid_index"].is_number()) {
    m.last_valid_index = j["last_valid_index"].get<std::size_t>();
  }
  m.fault_message = j.value("fault_message", "");
  m.g_right = j.value("g_right", 0.0);
  m.g_left = j.value("g_left", 0.0);
  if (j.contains("centers_right")) m.centers_right = centers_from(j["centers_right"]);
  if (j.contains("centers_left")) m.centers_left = centers_from(j["centers_left"]);
  return m;
}

json step_metrics_to_json(const StepMetrics& m) {
  return {{"settling_time", number_or_null(m.settling_time)},
          {"settled", m.settled},
          {"overshoot_pct", m.overshoot_pct},
          {"steady_state_error", m.steady_state_error}};
}

json envelope_to_json(const ExpEnvelope& e) {
  json j = {{"m", e.m},
            {"alpha", number_or_null(e.alpha)},
            {"fit_residual", e.fit_residual},
            {"peaks", e.peaks},
            {"fallback", e.fallback}};
  j["rho_bound"] = e.rho_bound ? json(*e.rho_bound) : json(nullptr);
  if (e.rho_bound && std::isfinite(e.alpha)) j["alpha_over_rho"] = e.alpha / *e.rho_bound;
  return j;
}

json run_summary_to_json(const RunSummary& s) {
  json j = {{"scenario_id", s.scenario_id},
            {"terrain", s.terrain},
            {"seed", s.seed},
            {"final_error_mean", s.final_error_mean},
            {"max_abs_slip", s.max_abs_slip},
            {"faulted", s.faulted},
            {"warnings", s.warnings}};
  j["step"] = s.step ? step_metrics_to_json(*s.step) : json(nullptr);
  j["envelope_alpha"] = s.envelope_alpha ? number_or_null(*s.envelope_alpha) : json(nullptr);
  if (s.faulted) j["fault_message"] = s.fault_message;
  return j;
}

json aggregate_to_json(const TerrainAggregate& a) {
  const auto opt = [](const std::optional<double>& x) {
    return x ? number_or_null(*x) : json(nullptr);
  };
  return {{"terrain", a.terrain},
          {"runs", a.runs},
          {"faulted", a.faulted},
          {"final_error_mean", a.final_error_mean},
          {"settling_time", opt(a.settling_time)},
          {"overshoot_pct", opt(a.overshoot_pct)},
          {"steady_state_error", opt(a.steady_state_error)},
          {"max_abs_slip", a.max_abs_slip}};
}

SimTrace load_trace(const std::filesystem::path& path) {
  namespace fs = std::filesystem;
  const fs::path csv = fs::is_directory(path) ? path / "trace.csv" : path;
  SimTrace trace;
  trace.records = read_trace_csv(csv);
  const fs::path meta = csv.parent_path() / "meta.json";
  if (fs::exists(meta)) {
    std::ifstream in(meta);
    try {
      trace.meta = meta_from_json(json::parse(in));
    } catch (const json::exception& e) {
      throw TraceFormatError("cannot parse '" + meta.string() + "': " + e.what());
    }
  } else {
    trace.meta.scenario_id = csv.parent_path().filename().string();
  }
  if (trace.records.size() >= 2) {
    trace.meta.sample_period = trace.records[1].t - trace.records[0].t;
  }
  return trace;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& text) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp + "'");
    out << text;
    if (!out) throw std::runtime_error("write failed for '" + tmp + "'");
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace skidsim
