#include "skidsim/tune.hpp"

#include <algorithm>
#include <cmath>

#include "skidsim/metrics.hpp"

namespace skidsim {

bool TuneReport::passed() const {
  return !rounds.empty() &&
         std::all_of(rounds.begin(), rounds.end(), [](const TuneRound& r) { return r.ran && r.passed; });
}

namespace {

TuneRound hold_round(ScenarioConfig config, const TuneThresholds& th) {
  config.profile = StationaryProfile{};
  config.duration = th.hold_duration;
  config.initial_velocity = Vec2::Zero();
  const SimTrace trace = run_scenario(config);
  double drift = 0.0;
  for (const auto& r : trace.records) drift = std::max({drift, std::abs(r.v_r), std::abs(r.v_l)});
  drift = std::max({drift, std::abs(trace.final_plant.v_right), std::abs(trace.final_plant.v_left)});
  const double displacement = std::hypot(trace.final_pose.x, trace.final_pose.y);
  TuneRound round{1, "stationary hold", true, false, {}, {}};
  round.measurements = {{"drift", drift}, {"displacement", displacement}};
  round.passed = !trace.meta.faulted && drift < th.max_drift;
  if (trace.meta.faulted) round.note = trace.meta.fault_message;
  return round;
}

TuneRound pivot_round(ScenarioConfig config, const TuneThresholds& th) {
  config.profile = PivotProfile{th.pivot_speed};
  config.duration = th.hold_duration;
  config.initial_velocity = Vec2::Zero();
  const SimTrace trace = run_scenario(config);
  double symmetry = 0.0;
  for (const auto& r : trace.records) symmetry += std::abs(r.v_r + r.v_l);
  symmetry /= static_cast<double>(std::max<std::size_t>(1, trace.records.size()));
  const double displacement = std::hypot(trace.final_pose.x, trace.final_pose.y);
  const double limit = th.max_displacement_frac * config.plant.wheelbase;
  TuneRound round{2, "pivot turn", true, false, {}, {}};
  round.measurements = {{"symmetry_error", symmetry},
                        {"displacement", displacement},
                        {"displacement_limit", limit},
                        {"final_heading", trace.final_pose.theta}};
  round.passed = !trace.meta.faulted && symmetry < th.max_symmetry_error && displacement < limit;
  if (trace.meta.faulted) round.note = trace.meta.fault_message;
  return round;
}

TuneRound tracking_round(ScenarioConfig config, const TuneThresholds& th) {
  config.profile = CurvedPathProfile{};
  const SimTrace trace = run_scenario(config);
  const double err = trace.records.empty() ? INFINITY : final_error_mean(trace);
  TuneRound round{3, "curved-path tracking", true, false, {}, {}};
  round.measurements = {{"final_error_mean", err}};
  round.passed = !trace.meta.faulted && err < th.max_tracking_error;
  if (trace.meta.faulted) round.note = trace.meta.fault_message;
  return round;
}

}  // namespace

TuneReport run_tune_protocol(const ScenarioConfig& config, const TuneThresholds& thresholds) {
  config.validate();
  TuneReport report;
  report.rounds.push_back(hold_round(config, thresholds));
  if (!report.rounds.front().passed) {
    report.rounds.push_back({2, "pivot turn", false, false, {}, "skipped: round 1 failed"});
    report.rounds.push_back({3, "curved-path tracking", false, false, {}, "skipped: round 1 failed"});
    return report;
  }
  report.rounds.push_back(pivot_round(config, thresholds));
  report.rounds.push_back(tracking_round(config, thresholds));
  return report;
}

}  // namespace skidsim
