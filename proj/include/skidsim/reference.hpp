#pragma once

// Commanded side-velocity pairs: closed-form test motions with analytic
// rates, and a live joystick stream.

#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <variant>

namespace skidsim {

struct ReferenceSample {
  double t = 0.0;
  double v_right = 0.0;
  double v_left = 0.0;
  double rate_right = 0.0;
  double rate_left = 0.0;
};

// Jump at t_step; the rate is zero everywhere (the breakpoint is declared,
// not differentiated).
struct StepProfile {
  double v_right = 0.5;
  double v_left = 0.5;
  double t_step = 0.0;
};

// Linear ramp from zero over [t_start, t_start + duration], then hold.
struct RampHoldProfile {
  double v_right = 0.5;
  double v_left = 0.5;
  double t_start = 0.0;
  double duration = 5.0;
};

// Both sides eased from zero to distinct targets with 3x^2 - 2x^3 over
// [0, ramp_time], then held; the unequal hold speeds trace an arc.
struct CurvedPathProfile {
  double v_right = 1.0;
  double v_left = 0.7;
  double ramp_time = 10.0;
};

// Turn in place: v_right = +magnitude, v_left = -magnitude.
struct PivotProfile {
  double magnitude = 0.3;
};

struct StationaryProfile {};

// Placeholder in scenario configs; samples come from TeleopReference.
struct TeleopProfile {};

using ReferenceProfile = std::variant<StepProfile, RampHoldProfile, CurvedPathProfile,
                                      PivotProfile, StationaryProfile, TeleopProfile>;

std::string profile_name(const ReferenceProfile& profile);

// Throws std::invalid_argument for t < 0 or a TeleopProfile.
ReferenceSample reference_at(const ReferenceProfile& profile, double t);

// Throws ConfigError on non-finite or inconsistent parameters.
void validate_profile(const ReferenceProfile& profile);

struct TeleopCommandSample {
  std::int64_t t_client_ms = 0;  // sender clock, used only for ordering
  double v_right = 0.0;
  double v_left = 0.0;
};

struct TeleopReferenceOptions {
  double watchdog_timeout = 0.5;  // s without a message before decaying
  double watchdog_ramp = 1.0;     // s to reach zero once decaying
  int smoother_window = 5;        // samples in the rate moving average
  // Rate limit on the commanded velocities, m/s^2. Unset passes steps
  // through unchanged.
  std::optional<double> max_accel;
};

// Zero-order hold of the latest joystick command, sampled at the controller
// rate. The rate is a backward difference of the emitted command averaged
// over the last `smoother_window` samples.
class TeleopReference {
 public:
  explicit TeleopReference(TeleopReferenceOptions options = {});

  // Called with the sim time at which the command arrived. Returns false and
  // counts a drop if t_client_ms goes backwards.
  bool push(const TeleopCommandSample& cmd, double t_sim);

  // Latches the reference at (0, 0) and clears the rate history; further
  // commands are ignored until release().
  void estop();
  void release();
  bool estopped() const { return estopped_; }

  // Must be called with non-decreasing t.
  ReferenceSample sample(double t);

  std::uint64_t dropped() const { return dropped_; }
  bool watchdog_active() const { return watchdog_active_; }

 private:
  TeleopReferenceOptions options_;
  std::optional<std::int64_t> last_client_ms_;
  double target_right_ = 0.0;
  double target_left_ = 0.0;
  double last_msg_t_ = 0.0;
  bool have_msg_ = false;

  double out_right_ = 0.0;
  double out_left_ = 0.0;
  std::optional<double> last_sample_t_;
  std::deque<double> rate_right_;
  std::deque<double> rate_left_;

  // Watchdog ramp starts from the command held when it tripped.
  bool watchdog_active_ = false;
  double watchdog_from_right_ = 0.0;
  double watchdog_from_left_ = 0.0;
  double watchdog_start_t_ = 0.0;

  bool estopped_ = false;
  std::uint64_t dropped_ = 0;
};

}  // namespace skidsim
