#include "skidsim/metrics.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace skidsim {

namespace {

std::size_t final_start(std::size_t n, double final_fraction) {
  const auto start = static_cast<std::size_t>(std::floor(static_cast<double>(n) * (1.0 - final_fraction)));
  return std::min(start, n - 1);
}

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double rms = 0.0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  LineFit fit;
  fit.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  fit.intercept = my - fit.slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (fit.intercept + fit.slope * x[i]);
    ss += r * r;
  }
  fit.rms = std::sqrt(ss / n);
  return fit;
}

StepMetrics worse(const StepMetrics& a, const StepMetrics& b) {
  StepMetrics out;
  out.settling_time = std::max(a.settling_time, b.settling_time);
  out.settled = a.settled && b.settled;
  out.overshoot_pct = std::max(a.overshoot_pct, b.overshoot_pct);
  out.steady_state_error = std::max(a.steady_state_error, b.steady_state_error);
  return out;
}

}  // namespace

StepMetrics step_metrics(std::span<const double> t, std::span<const double> v,
                         std::span<const double> v_ref, double step,
                         const StepMetricsOptions& options) {
  if (t.size() != v.size() || t.size() != v_ref.size()) {
    throw std::invalid_argument("step_metrics: series lengths differ");
  }
  if (t.size() < 2) throw std::invalid_argument("step_metrics: need at least two samples");
  if (step == 0.0 || !std::isfinite(step)) {
    throw std::invalid_argument("step_metrics: step magnitude must be nonzero");
  }
  const std::size_t n = t.size();
  const double dir = step > 0.0 ? 1.0 : -1.0;
  const double mag = std::abs(step);
  const double band = std::max(options.band_abs, options.band_frac * mag);

  StepMetrics out;

  std::optional<std::size_t> last_out;
  for (std::size_t i = n; i-- > 0;) {
    if (std::abs(v[i] - v_ref[i]) > band) {
      last_out = i;
      break;
    }
  }
  if (!last_out) {
    out.settling_time = 0.0;
  } else if (*last_out == n - 1) {
    out.settling_time = kNeverSettled;
    out.settled = false;
  } else {
    const std::size_t i = *last_out;
    const double a = std::abs(v[i] - v_ref[i]);
    const double b = std::abs(v[i + 1] - v_ref[i + 1]);
    const double frac = (a - band) / (a - b);
    out.settling_time = t[i] + frac * (t[i + 1] - t[i]) - t.front();
  }

  double peak = 0.0;
  bool crossed = false;
  for (std::size_t i = 0; i < n; ++i) {
    const double signed_err = dir * (v[i] - v_ref[i]);
    if (!crossed && signed_err >= 0.0) crossed = true;
    if (crossed) peak = std::max(peak, signed_err);
  }
  out.overshoot_pct = 100.0 * peak / mag;

  const std::size_t start = final_start(n, options.final_fraction);
  double sum = 0.0;
  for (std::size_t i = start; i < n; ++i) sum += std::abs(v[i] - v_ref[i]);
  out.steady_state_error = sum / static_cast<double>(n - start);
  return out;
}

StepMetrics step_metrics(const SimTrace& trace, const StepMetricsOptions& options) {
  if (trace.records.size() < 2) throw std::invalid_argument("step_metrics: trace too short");
  std::vector<double> t, vr, vl, rr, rl;
  for (const auto& r : trace.records) {
    t.push_back(r.t);
    vr.push_back(r.v_r);
    vl.push_back(r.v_l);
    rr.push_back(r.v_rd);
    rl.push_back(r.v_ld);
  }
  const double step_r = rr.back() - vr.front();
  const double step_l = rl.back() - vl.front();
  std::optional<StepMetrics> result;
  if (step_r != 0.0) result = step_metrics(t, vr, rr, step_r, options);
  if (step_l != 0.0) {
    const StepMetrics left = step_metrics(t, vl, rl, step_l, options);
    result = result ? worse(*result, left) : left;
  }
  if (!result) throw std::invalid_argument("step_metrics: trace has no step on either side");
  return *result;
}

ExpEnvelope exp_envelope_fit(std::span<const double> t, std::span<const double> err_norm) {
  if (t.size() != err_norm.size()) throw std::invalid_argument("exp_envelope_fit: length mismatch");
  if (t.size() < 50) throw std::invalid_argument("exp_envelope_fit: need at least 50 samples");
  ExpEnvelope out;
  if (std::all_of(err_norm.begin(), err_norm.end(), [](double x) { return x == 0.0; })) {
    out.m = 0.0;
    out.alpha = std::numeric_limits<double>::infinity();
    return out;
  }
  if (!(err_norm.front() > 0.0)) {
    throw std::invalid_argument("exp_envelope_fit: error norm at t_start must be > 0");
  }
  const double t0 = t.front();
  const std::size_t n = t.size();

  std::vector<double> x, y;
  if (err_norm[0] > err_norm[1]) {
    x.push_back(0.0);
    y.push_back(std::log(err_norm[0]));
  }
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (err_norm[i] > err_norm[i - 1] && err_norm[i] >= err_norm[i + 1] && err_norm[i] > 0.0) {
      x.push_back(t[i] - t0);
      y.push_back(std::log(err_norm[i]));
    }
  }
  out.peaks = static_cast<int>(x.size());
  if (x.size() < 3) {
    out.fallback = true;
    x.clear();
    y.clear();
    for (std::size_t i = 0; i < n; ++i) {
      if (err_norm[i] > 0.0) {
        x.push_back(t[i] - t0);
        y.push_back(std::log(err_norm[i]));
      }
    }
  }
  const LineFit fit = fit_line(x, y);
  out.alpha = -fit.slope;
  out.m = std::exp(fit.intercept) / err_norm.front();
  out.fit_residual = fit.rms;
  return out;
}

ExpEnvelope exp_envelope_fit(const SimTrace& trace, double t_start, double t_end) {
  std::vector<double> t, norm;
  for (const auto& r : trace.records) {
    if (r.t < t_start - 1e-12 || r.t > t_end + 1e-12) continue;
    t.push_back(r.t);
    norm.push_back(std::hypot(r.e_r, r.e_l));
  }
  return exp_envelope_fit(t, norm);
}

double theoretical_rate(const NnGains& gains, double g_right, double g_left) {
  const double side_r = std::min(g_right * gains.gamma, 2.0 * gains.kappa);
  const double side_l = std::min(g_left * gains.gamma, 2.0 * gains.kappa);
  return std::min(side_r, side_l);
}

double final_error_mean(const SimTrace& trace, double final_fraction) {
  if (trace.records.empty()) throw std::invalid_argument("final_error_mean: empty trace");
  const std::size_t n = trace.records.size();
  const std::size_t start = final_start(n, final_fraction);
  double sum = 0.0;
  for (std::size_t i = start; i < n; ++i) {
    sum += std::hypot(trace.records[i].e_r, trace.records[i].e_l);
  }
  return sum / static_cast<double>(n - start);
}

double max_abs_slip(const SimTrace& trace) {
  double m = 0.0;
  for (const auto& r : trace.records) m = std::max({m, std::abs(r.s_r), std::abs(r.s_l)});
  return m;
}

ComparisonTable compare_controllers(const std::map<std::string, std::vector<SimTrace>>& traces,
                                    const StepMetricsOptions& options) {
  if (traces.empty()) throw std::invalid_argument("compare_controllers: no controllers given");
  const auto& [ref_name, ref_runs] = *traces.begin();
  for (const auto& [name, runs] : traces) {
    if (runs.size() != ref_runs.size()) {
      throw std::invalid_argument(fmt::format(
          "compare_controllers: '{}' has {} runs but '{}' has {}", name, runs.size(), ref_name,
          ref_runs.size()));
    }
    for (std::size_t i = 0; i < runs.size(); ++i) {
      if (runs[i].meta.scenario_key != ref_runs[i].meta.scenario_key) {
        throw std::invalid_argument(fmt::format(
            "compare_controllers: run {} of '{}' is a different scenario than run {} of '{}' "
            "({} vs {})",
            i, name, i, ref_name, runs[i].meta.scenario_key, ref_runs[i].meta.scenario_key));
      }
    }
  }

  ComparisonTable table;
  for (const auto& [name, runs] : traces) {
    ComparisonRow row;
    row.controller = name;
    for (const auto& trace : runs) row.runs.push_back(step_metrics(trace, options));
    const auto count = static_cast<double>(row.runs.size());
    for (const auto& m : row.runs) {
      row.mean.settling_time += m.settling_time / count;
      row.mean.overshoot_pct += m.overshoot_pct / count;
      row.mean.steady_state_error += m.steady_state_error / count;
      row.mean.settled = row.mean.settled && m.settled;
    }
    table.rows.push_back(std::move(row));
  }
  for (std::size_t a = 0; a < table.rows.size(); ++a) {
    for (std::size_t b = a + 1; b < table.rows.size(); ++b) {
      const auto& ra = table.rows[a];
      const auto& rb = table.rows[b];
      table.deltas.push_back(ComparisonDelta{
          ra.controller, rb.controller, ra.mean.settling_time - rb.mean.settling_time,
          ra.mean.overshoot_pct - rb.mean.overshoot_pct,
          ra.mean.steady_state_error - rb.mean.steady_state_error});
    }
  }
  return table;
}

}  // namespace skidsim
