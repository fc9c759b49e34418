#pragma once

// One run per (terrain, seed) pair, optionally in parallel, with per-terrain
// aggregates.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "skidsim/engine.hpp"
#include "skidsim/metrics.hpp"

namespace skidsim {

struct RunSummary {
  std::string scenario_id;
  std::string terrain;
  std::uint64_t seed = 0;
  double final_error_mean = 0.0;
  std::optional<StepMetrics> step;       // step profiles only
  std::optional<double> envelope_alpha;  // unset when the fit is not possible
  double max_abs_slip = 0.0;
  bool faulted = false;
  std::string fault_message;
  std::vector<std::string> warnings;
};

struct TerrainAggregate {
  std::string terrain;
  int runs = 0;
  int faulted = 0;
  double final_error_mean = 0.0;
  std::optional<double> settling_time;  // mean over seeds, step profiles only
  std::optional<double> overshoot_pct;
  std::optional<double> steady_state_error;
  double max_abs_slip = 0.0;
};

struct SweepOptions {
  int jobs = 1;
  bool keep_traces = false;
  StepMetricsOptions step;
  double envelope_t_end = 30.0;
};

struct SweepResult {
  // Terrain-major, seeds in the order given.
  std::vector<RunSummary> runs;
  std::vector<SimTrace> traces;  // filled when keep_traces is set
  std::vector<TerrainAggregate> aggregates;
};

// Scenario ids become "<base id>/<terrain>/seed-<n>". The terrain keeps the
// base config's nominal disturbance.
ScenarioConfig sweep_config(const ScenarioConfig& base, const TerrainModel& terrain,
                            std::uint64_t seed);

RunSummary summarize(const SimTrace& trace, const ScenarioConfig& config,
                     const SweepOptions& options = {});

// Throws std::invalid_argument for an empty terrain or seed list. Faulted
// runs are reported and counted, never thrown.
SweepResult run_sweep(const ScenarioConfig& base, const std::vector<TerrainModel>& terrains,
                      const std::vector<std::uint64_t>& seeds, const SweepOptions& options = {});

}  // namespace skidsim
