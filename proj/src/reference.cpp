#include "skidsim/reference.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "skidsim/errors.hpp"

namespace skidsim {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

ReferenceSample constant(double t, double right, double left) {
  return ReferenceSample{t, right, left, 0.0, 0.0};
}

void require_finite(std::initializer_list<double> xs, const char* what) {
  for (double x : xs) {
    if (!std::isfinite(x)) throw ConfigError(std::string(what) + ": parameters must be finite");
  }
}

double average(const std::deque<double>& xs) {
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

}  // namespace

std::string profile_name(const ReferenceProfile& profile) {
  return std::visit(Overloaded{
                        [](const StepProfile&) { return std::string("step"); },
                        [](const RampHoldProfile&) { return std::string("ramp-hold"); },
                        [](const CurvedPathProfile&) { return std::string("curved-path"); },
                        [](const PivotProfile&) { return std::string("pivot"); },
                        [](const StationaryProfile&) { return std::string("stationary"); },
                        [](const TeleopProfile&) { return std::string("teleop"); },
                    },
                    profile);
}

ReferenceSample reference_at(const ReferenceProfile& profile, double t) {
  if (!(t >= 0.0)) throw std::invalid_argument("reference_at: t must be >= 0");
  return std::visit(
      Overloaded{
          [t](const StepProfile& p) {
            return t >= p.t_step ? constant(t, p.v_right, p.v_left) : constant(t, 0.0, 0.0);
          },
          [t](const RampHoldProfile& p) {
            if (t <= p.t_start) return constant(t, 0.0, 0.0);
            if (t >= p.t_start + p.duration) return constant(t, p.v_right, p.v_left);
            const double x = (t - p.t_start) / p.duration;
            return ReferenceSample{t, x * p.v_right, x * p.v_left, p.v_right / p.duration,
                                   p.v_left / p.duration};
          },
          [t](const CurvedPathProfile& p) {
            if (t >= p.ramp_time) return constant(t, p.v_right, p.v_left);
            const double x = t / p.ramp_time;
            const double ease = x * x * (3.0 - 2.0 * x);
            const double ease_rate = 6.0 * x * (1.0 - x) / p.ramp_time;
            return ReferenceSample{t, ease * p.v_right, ease * p.v_left, ease_rate * p.v_right,
                                   ease_rate * p.v_left};
          },
          [t](const PivotProfile& p) { return constant(t, p.magnitude, -p.magnitude); },
          [t](const StationaryProfile&) { return constant(t, 0.0, 0.0); },
          [](const TeleopProfile&) -> ReferenceSample {
            throw std::invalid_argument("reference_at: teleop profiles are sampled live");
          },
      },
      profile);
}

void validate_profile(const ReferenceProfile& profile) {
  std::visit(Overloaded{
                 [](const StepProfile& p) {
                   require_finite({p.v_right, p.v_left, p.t_step}, "step profile");
                   if (p.t_step < 0.0) throw ConfigError("step profile: t_step must be >= 0");
                 },
                 [](const RampHoldProfile& p) {
                   require_finite({p.v_right, p.v_left, p.t_start, p.duration}, "ramp-hold profile");
                   if (!(p.duration > 0.0)) throw ConfigError("ramp-hold profile: duration must be > 0");
                 },
                 [](const CurvedPathProfile& p) {
                   require_finite({p.v_right, p.v_left, p.ramp_time}, "curved-path profile");
                   if (!(p.ramp_time > 0.0)) throw ConfigError("curved-path profile: ramp_time must be > 0");
                 },
                 [](const PivotProfile& p) { require_finite({p.magnitude}, "pivot profile"); },
                 [](const StationaryProfile&) {},
                 [](const TeleopProfile&) {},
             },
             profile);
}

TeleopReference::TeleopReference(TeleopReferenceOptions options) : options_(options) {
  if (options_.smoother_window < 1) throw std::invalid_argument("smoother_window must be >= 1");
  if (!(options_.watchdog_timeout > 0.0) || !(options_.watchdog_ramp > 0.0)) {
    throw std::invalid_argument("watchdog timings must be > 0");
  }
  if (options_.max_accel && !(*options_.max_accel > 0.0)) {
    throw std::invalid_argument("max_accel must be > 0");
  }
  rate_right_.assign(static_cast<std::size_t>(options_.smoother_window), 0.0);
  rate_left_.assign(static_cast<std::size_t>(options_.smoother_window), 0.0);
}

bool TeleopReference::push(const TeleopCommandSample& cmd, double t_sim) {
  if (last_client_ms_ && cmd.t_client_ms < *last_client_ms_) {
    ++dropped_;
    return false;
  }
  last_client_ms_ = cmd.t_client_ms;
  if (estopped_) return true;
  target_right_ = cmd.v_right;
  target_left_ = cmd.v_left;
  last_msg_t_ = t_sim;
  have_msg_ = true;
  return true;
}

void TeleopReference::estop() {
  estopped_ = true;
  have_msg_ = false;
  watchdog_active_ = false;
  target_right_ = target_left_ = 0.0;
  out_right_ = out_left_ = 0.0;
  std::fill(rate_right_.begin(), rate_right_.end(), 0.0);
  std::fill(rate_left_.begin(), rate_left_.end(), 0.0);
}

void TeleopReference::release() { estopped_ = false; }

ReferenceSample TeleopReference::sample(double t) {
  if (last_sample_t_ && t < *last_sample_t_) {
    throw std::invalid_argument("TeleopReference::sample: time went backwards");
  }
  const double prev_right = out_right_;
  const double prev_left = out_left_;

  if (estopped_ || !have_msg_) {
    // Silence before the first message is the watchdog's resting state.
    out_right_ = out_left_ = 0.0;
    watchdog_active_ = !estopped_;
  } else if (t - last_msg_t_ > options_.watchdog_timeout) {
    if (!watchdog_active_) {
      watchdog_active_ = true;
      watchdog_from_right_ = out_right_;
      watchdog_from_left_ = out_left_;
      watchdog_start_t_ = last_msg_t_ + options_.watchdog_timeout;
    }
    const double scale = std::max(0.0, 1.0 - (t - watchdog_start_t_) / options_.watchdog_ramp);
    out_right_ = watchdog_from_right_ * scale;
    out_left_ = watchdog_from_left_ * scale;
  } else {
    watchdog_active_ = false;
    double next_right = target_right_;
    double next_left = target_left_;
    if (options_.max_accel) {
      // The first sample starts from rest.
      const double max_step = *options_.max_accel * (last_sample_t_ ? t - *last_sample_t_ : 0.0);
      next_right = out_right_ + std::clamp(next_right - out_right_, -max_step, max_step);
      next_left = out_left_ + std::clamp(next_left - out_left_, -max_step, max_step);
    }
    out_right_ = next_right;
    out_left_ = next_left;
  }

  double raw_right = 0.0;
  double raw_left = 0.0;
  if (last_sample_t_ && t > *last_sample_t_ && !estopped_) {
    const double dt = t - *last_sample_t_;
    raw_right = (out_right_ - prev_right) / dt;
    raw_left = (out_left_ - prev_left) / dt;
  }
  rate_right_.pop_front();
  rate_right_.push_back(raw_right);
  rate_left_.pop_front();
  rate_left_.push_back(raw_left);
  last_sample_t_ = t;

  return ReferenceSample{t, out_right_, out_left_, average(rate_right_), average(rate_left_)};
}

}  // namespace skidsim
