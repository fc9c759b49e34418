#pragma once

// Step-response metrics and the exponential-envelope check on recorded
// traces.

#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "skidsim/controller.hpp"
#include "skidsim/engine.hpp"

namespace skidsim {

inline constexpr double kNeverSettled = std::numeric_limits<double>::infinity();

struct StepMetrics {
  double settling_time = 0.0;  // s after the step; kNeverSettled if it leaves the band at the end
  bool settled = true;
  double overshoot_pct = 0.0;
  double steady_state_error = 0.0;  // mean |e| over the final fraction of samples
};

struct StepMetricsOptions {
  double band_abs = 0.02;   // m/s
  double band_frac = 0.02;  // of the step magnitude
  double final_fraction = 0.2;
};

// One side. `step` is the signed size of the commanded jump; settling is
// measured from t.front(), with the band exit linearly interpolated between
// samples. Throws std::invalid_argument for step == 0 or mismatched spans.
StepMetrics step_metrics(std::span<const double> t, std::span<const double> v,
                         std::span<const double> v_ref, double step,
                         const StepMetricsOptions& options = {});

// Both sides of a step-profile trace, each with step = final reference minus
// initial velocity; reports the worse side for every field. Sides with a
// zero step are skipped.
StepMetrics step_metrics(const SimTrace& trace, const StepMetricsOptions& options = {});

struct ExpEnvelope {
  double m = 0.0;
  double alpha = 0.0;         // s^-1; +inf for an identically zero error
  double fit_residual = 0.0;  // RMS of the log-linear fit
  std::optional<double> rho_bound;
  int peaks = 0;
  bool fallback = false;  // fitted on all samples instead of peaks
};

// Fits |e(t)| <= m exp(-alpha (t - t0)) |e(t0)| through the local maxima of
// err_norm (t0 counts when it exceeds the next sample). Fewer than three
// peaks falls back to a fit over every nonzero sample. Needs >= 50 samples
// and err_norm.front() > 0, else std::invalid_argument.
ExpEnvelope exp_envelope_fit(std::span<const double> t, std::span<const double> err_norm);

// Pair norm |(e_R, e_L)| over t_start <= t <= t_end.
ExpEnvelope exp_envelope_fit(const SimTrace& trace, double t_start,
                             double t_end = std::numeric_limits<double>::infinity());

// min over sides of min(g_i gamma, 2 kappa).
double theoretical_rate(const NnGains& gains, double g_right, double g_left);

// Mean of |(e_R, e_L)| over the final fraction of the trace.
double final_error_mean(const SimTrace& trace, double final_fraction = 0.2);

double max_abs_slip(const SimTrace& trace);

struct ComparisonRow {
  std::string controller;
  StepMetrics mean;
  std::vector<StepMetrics> runs;
};

struct ComparisonDelta {
  std::string a;
  std::string b;
  double settling_time = 0.0;  // a - b
  double overshoot_pct = 0.0;
  double steady_state_error = 0.0;
};

struct ComparisonTable {
  std::vector<ComparisonRow> rows;
  std::vector<ComparisonDelta> deltas;
};

// Every controller must have traces of the same scenarios in the same order
// (matched on scenario key); otherwise std::invalid_argument with the first
// mismatch spelled out.
ComparisonTable compare_controllers(const std::map<std::string, std::vector<SimTrace>>& traces,
                                    const StepMetricsOptions& options = {});

}  // namespace skidsim
