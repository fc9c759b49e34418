#include "skidsim/sweep.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <stdexcept>
#include <thread>

namespace skidsim {

ScenarioConfig sweep_config(const ScenarioConfig& base, const TerrainModel& terrain,
                            std::uint64_t seed) {
  ScenarioConfig config = base;
  config.terrain = terrain;
  config.terrain.disturbance = base.terrain.disturbance;
  config.seed = seed;
  config.id = fmt::format("{}/{}/seed-{}", base.id, terrain.name, seed);
  return config;
}

RunSummary summarize(const SimTrace& trace, const ScenarioConfig& config,
                     const SweepOptions& options) {
  RunSummary s;
  s.scenario_id = config.id;
  s.terrain = config.terrain.name;
  s.seed = config.seed;
  s.faulted = trace.meta.faulted;
  s.fault_message = trace.meta.fault_message;
  s.warnings = trace.meta.warnings;
  if (trace.records.empty()) return s;
  s.final_error_mean = final_error_mean(trace, options.step.final_fraction);
  s.max_abs_slip = max_abs_slip(trace);
  if (std::holds_alternative<StepProfile>(config.profile)) {
    try {
      s.step = step_metrics(trace, options.step);
    } catch (const std::invalid_argument&) {
    }
  }
  try {
    s.envelope_alpha = exp_envelope_fit(trace, 0.0, options.envelope_t_end).alpha;
  } catch (const std::invalid_argument&) {
  }
  return s;
}

namespace {

std::vector<TerrainAggregate> aggregate(const std::vector<TerrainModel>& terrains,
                                        const std::vector<RunSummary>& runs,
                                        std::size_t per_terrain) {
  std::vector<TerrainAggregate> rows;
  for (std::size_t i = 0; i < terrains.size(); ++i) {
    TerrainAggregate row;
    row.terrain = terrains[i].name;
    int stepped = 0;
    double settling = 0.0, overshoot = 0.0, sse = 0.0;
    for (std::size_t k = 0; k < per_terrain; ++k) {
      const RunSummary& r = runs[i * per_terrain + k];
      ++row.runs;
      if (r.faulted) ++row.faulted;
      row.final_error_mean += r.final_error_mean;
      row.max_abs_slip = std::max(row.max_abs_slip, r.max_abs_slip);
      if (r.step) {
        ++stepped;
        settling += r.step->settling_time;
        overshoot += r.step->overshoot_pct;
        sse += r.step->steady_state_error;
      }
    }
    row.final_error_mean /= static_cast<double>(row.runs);
    if (stepped > 0) {
      row.settling_time = settling / stepped;
      row.overshoot_pct = overshoot / stepped;
      row.steady_state_error = sse / stepped;
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

SweepResult run_sweep(const ScenarioConfig& base, const std::vector<TerrainModel>& terrains,
                      const std::vector<std::uint64_t>& seeds, const SweepOptions& options) {
  if (terrains.empty()) throw std::invalid_argument("run_sweep: terrain list is empty");
  if (seeds.empty()) throw std::invalid_argument("run_sweep: seed list is empty");

  std::vector<ScenarioConfig> configs;
  for (const auto& terrain : terrains) {
    for (const auto seed : seeds) configs.push_back(sweep_config(base, terrain, seed));
  }
  for (const auto& c : configs) c.validate();

  const std::size_t n = configs.size();
  SweepResult result;
  result.runs.resize(n);
  if (options.keep_traces) result.traces.resize(n);

  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      SimTrace trace = run_scenario(configs[i]);
      result.runs[i] = summarize(trace, configs[i], options);
      if (options.keep_traces) result.traces[i] = std::move(trace);
    }
  };
  const int jobs = std::clamp<int>(options.jobs, 1, static_cast<int>(n));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  result.aggregates = aggregate(terrains, result.runs, seeds.size());
  return result;
}

}  // namespace skidsim
