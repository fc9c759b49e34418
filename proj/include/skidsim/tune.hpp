#pragma once

// Three-round commissioning check for a gain set: hold still, pivot in
// place, then track a curved path. Round 1 failing skips the rest.

#include <optional>
#include <string>
#include <vector>

#include "skidsim/engine.hpp"

namespace skidsim {

struct TuneThresholds {
  double max_drift = 0.01;            // m/s, round 1
  double max_symmetry_error = 0.02;   // m/s, round 2 mean |V_R + V_L|
  double max_displacement_frac = 0.1; // of the wheelbase, round 2
  double max_tracking_error = 0.05;   // m/s, round 3 final-20% mean |e|
  double hold_duration = 20.0;        // s, rounds 1 and 2
  double pivot_speed = 0.3;           // m/s
};

struct TuneRound {
  int number = 0;
  std::string name;
  bool ran = false;
  bool passed = false;
  // name -> measured value, in report order
  std::vector<std::pair<std::string, double>> measurements;
  std::string note;
};

struct TuneReport {
  std::vector<TuneRound> rounds;
  bool passed() const;
};

// Rounds 1 and 2 run for hold_duration; round 3 uses the config's duration.
// The config's terrain, plant, controller and seed are kept. Throws
// ConfigError before any round if the config is invalid.
TuneReport run_tune_protocol(const ScenarioConfig& config, const TuneThresholds& thresholds = {});

}  // namespace skidsim
