#include "skidsim/config.hpp"

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

#include "skidsim/errors.hpp"

namespace skidsim {

namespace {

int line_of(const YAML::Node& node) {
  const YAML::Mark mark = node.Mark();
  return mark.line >= 0 ? mark.line + 1 : 0;
}

void check_keys(const YAML::Node& node, std::initializer_list<std::string_view> allowed,
                std::string_view section) {
  if (!node.IsMap()) throw ConfigError(std::string(section) + ": expected a mapping", line_of(node));
  const std::set<std::string_view> keys(allowed);
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!keys.contains(key)) {
      throw ConfigError(std::string(section) + ": unknown field '" + key + "'", line_of(kv.first));
    }
  }
}

template <class T>
T scalar(const YAML::Node& node, std::string_view name, std::string_view expected) {
  if (!node.IsScalar()) throw ConfigError(std::string(name) + ": expected " + std::string(expected), line_of(node));
  try {
    return node.as<T>();
  } catch (const YAML::BadConversion&) {
    throw ConfigError(std::string(name) + ": expected " + std::string(expected), line_of(node));
  }
}

double number(const YAML::Node& node, std::string_view name) {
  return scalar<double>(node, name, "a number");
}

void read(const YAML::Node& parent, const char* key, double& out, std::string_view prefix = {}) {
  if (const auto n = parent[key]) out = number(n, std::string(prefix) + key);
}

// Runs a validator and pins any line-less ConfigError to `node`.
template <class F>
void anchored(const YAML::Node& node, F&& validate) {
  try {
    validate();
  } catch (const ConfigError& e) {
    if (e.line() > 0) throw;
    throw ConfigError(e.what(), line_of(node));
  }
}

SlipInterval parse_interval(const YAML::Node& node, std::string_view name) {
  if (!node.IsSequence() || node.size() != 2) {
    throw ConfigError(std::string(name) + ": expected [lo, hi]", line_of(node));
  }
  return {number(node[0], name), number(node[1], name)};
}

Vec2 parse_pair(const YAML::Node& node, std::string_view name) {
  if (!node.IsSequence() || node.size() != 2) {
    throw ConfigError(std::string(name) + ": expected [right, left]", line_of(node));
  }
  return {number(node[0], name), number(node[1], name)};
}

NominalDisturbance parse_disturbance(const YAML::Node& node) {
  if (node.IsScalar() && node.Scalar() == "none") return NominalDisturbance::none();
  check_keys(node, {"amplitude", "frequency", "bias"}, "disturbance");
  NominalDisturbance d;
  read(node, "amplitude", d.amplitude, "disturbance.");
  read(node, "frequency", d.frequency, "disturbance.");
  read(node, "bias", d.bias, "disturbance.");
  return d;
}

TerrainModel parse_terrain(const YAML::Node& node) {
  if (node.IsScalar()) {
    const auto name = node.as<std::string>();
    if (name == "none" || name == "no-slip") return no_slip_terrain();
    if (auto t = find_builtin_terrain(name)) return *t;
    throw ConfigError("terrain: unknown terrain '" + name +
                          "' (expected dry_asphalt, wet_asphalt, gravel, mud, ice, none or a mapping)",
                      line_of(node));
  }
  check_keys(node,
             {"name", "slip_left", "slip_right", "resample_period", "smoothing_tau", "disturbance"},
             "terrain");
  TerrainModel t;
  if (!node["name"]) throw ConfigError("terrain: missing field 'name'", line_of(node));
  t.name = scalar<std::string>(node["name"], "terrain.name", "a string");
  if (!node["slip_left"]) throw ConfigError("terrain: missing field 'slip_left'", line_of(node));
  if (!node["slip_right"]) throw ConfigError("terrain: missing field 'slip_right'", line_of(node));
  t.slip_left = parse_interval(node["slip_left"], "terrain.slip_left");
  t.slip_right = parse_interval(node["slip_right"], "terrain.slip_right");
  read(node, "resample_period", t.resample_period, "terrain.");
  read(node, "smoothing_tau", t.smoothing_tau, "terrain.");
  if (const auto d = node["disturbance"]) t.disturbance = parse_disturbance(d);
  anchored(node, [&] { t.validate(); });
  return t;
}

PlantParams parse_plant(const YAML::Node& node) {
  check_keys(node, {"g_right", "g_left", "c_visc", "c_quad", "c_couple", "wheel_radius", "wheelbase"},
             "plant");
  PlantParams p;
  read(node, "g_right", p.g_right, "plant.");
  read(node, "g_left", p.g_left, "plant.");
  read(node, "c_visc", p.c_visc, "plant.");
  read(node, "c_quad", p.c_quad, "plant.");
  read(node, "c_couple", p.c_couple, "plant.");
  read(node, "wheel_radius", p.wheel_radius, "plant.");
  read(node, "wheelbase", p.wheelbase, "plant.");
  anchored(node, [&] { p.validate(); });
  return p;
}

std::vector<Vec2> parse_centers(const YAML::Node& node, std::string_view name) {
  if (!node.IsSequence()) throw ConfigError(std::string(name) + ": expected a list of [x, y]", line_of(node));
  std::vector<Vec2> centers;
  for (const auto& c : node) centers.push_back(parse_pair(c, name));
  return centers;
}

ControllerConfig parse_controller(const YAML::Node& node) {
  check_keys(node, {"kind", "preset", "gains", "rbf", "phi_hat0", "phi_hat_clamp", "pid"},
             "controller");
  ControllerConfig c;
  if (const auto kind = node["kind"]) {
    const auto k = scalar<std::string>(kind, "controller.kind", "a string");
    if (k == "nnrmfc") {
      c.kind = ControllerKind::kNnrmfc;
    } else if (k == "pid") {
      c.kind = ControllerKind::kPid;
    } else {
      throw ConfigError("controller.kind: expected 'nnrmfc' or 'pid', got '" + k + "'",
                        line_of(kind));
    }
  }
  if (const auto preset = node["preset"]) {
    const auto name = scalar<std::string>(preset, "controller.preset", "a string");
    const auto p = find_preset(name);
    if (!p) {
      throw ConfigError("controller.preset: unknown preset '" + name +
                            "' (expected sim-paper or field-paper)",
                        line_of(preset));
    }
    apply_preset(c, *p);
  }
  if (const auto g = node["gains"]) {
    check_keys(g, {"kappa", "epsilon", "sigma", "gamma"}, "controller.gains");
    read(g, "kappa", c.gains.kappa, "controller.gains.");
    read(g, "epsilon", c.gains.epsilon, "controller.gains.");
    read(g, "sigma", c.gains.sigma, "controller.gains.");
    read(g, "gamma", c.gains.gamma, "controller.gains.");
    c.preset = "custom";
    if (c.kind == ControllerKind::kNnrmfc) anchored(g, [&] { c.gains.validate(); });
  }
  if (const auto r = node["rbf"]) {
    check_keys(r, {"neurons", "width", "center_scale", "seed", "centers_right", "centers_left"},
               "controller.rbf");
    if (const auto n = r["neurons"]) {
      c.rbf.neurons = scalar<int>(n, "controller.rbf.neurons", "an integer");
      if (c.rbf.neurons < 1) throw ConfigError("controller.rbf.neurons must be >= 1", line_of(n));
    }
    read(r, "width", c.rbf.width, "controller.rbf.");
    read(r, "center_scale", c.rbf.center_scale, "controller.rbf.");
    if (const auto s = r["seed"]) c.rbf.seed = scalar<std::uint64_t>(s, "controller.rbf.seed", "an unsigned integer");
    if (const auto cr = r["centers_right"]) c.rbf.centers_right = parse_centers(cr, "controller.rbf.centers_right");
    if (const auto cl = r["centers_left"]) c.rbf.centers_left = parse_centers(cl, "controller.rbf.centers_left");
    if (c.rbf.centers_right.has_value() != c.rbf.centers_left.has_value()) {
      throw ConfigError("controller.rbf: centers_right and centers_left must be given together",
                        line_of(r));
    }
  }
  read(node, "phi_hat0", c.phi_hat0, "controller.");
  read(node, "phi_hat_clamp", c.phi_hat_clamp, "controller.");
  if (const auto p = node["pid"]) {
    check_keys(p, {"kp", "ki", "kd", "integral_clamp", "derivative_tau"}, "controller.pid");
    read(p, "kp", c.pid.kp, "controller.pid.");
    read(p, "ki", c.pid.ki, "controller.pid.");
    read(p, "kd", c.pid.kd, "controller.pid.");
    read(p, "integral_clamp", c.pid.integral_clamp, "controller.pid.");
    read(p, "derivative_tau", c.pid.derivative_tau, "controller.pid.");
    anchored(p, [&] { c.pid.validate(); });
  }
  return c;
}

ReferenceProfile parse_profile(const YAML::Node& node) {
  if (!node.IsMap() || !node["type"]) {
    throw ConfigError("profile: expected a mapping with a 'type' field", line_of(node));
  }
  const auto type = scalar<std::string>(node["type"], "profile.type", "a string");
  ReferenceProfile profile;
  if (type == "step") {
    check_keys(node, {"type", "v_right", "v_left", "t_step"}, "profile");
    StepProfile p;
    read(node, "v_right", p.v_right, "profile.");
    read(node, "v_left", p.v_left, "profile.");
    read(node, "t_step", p.t_step, "profile.");
    profile = p;
  } else if (type == "ramp-hold") {
    check_keys(node, {"type", "v_right", "v_left", "t_start", "duration"}, "profile");
    RampHoldProfile p;
    read(node, "v_right", p.v_right, "profile.");
    read(node, "v_left", p.v_left, "profile.");
    read(node, "t_start", p.t_start, "profile.");
    read(node, "duration", p.duration, "profile.");
    profile = p;
  } else if (type == "curved-path") {
    check_keys(node, {"type", "v_right", "v_left", "ramp_time"}, "profile");
    CurvedPathProfile p;
    read(node, "v_right", p.v_right, "profile.");
    read(node, "v_left", p.v_left, "profile.");
    read(node, "ramp_time", p.ramp_time, "profile.");
    profile = p;
  } else if (type == "pivot") {
    check_keys(node, {"type", "magnitude"}, "profile");
    PivotProfile p;
    read(node, "magnitude", p.magnitude, "profile.");
    profile = p;
  } else if (type == "stationary") {
    check_keys(node, {"type"}, "profile");
    profile = StationaryProfile{};
  } else if (type == "teleop") {
    check_keys(node, {"type"}, "profile");
    profile = TeleopProfile{};
  } else {
    throw ConfigError("profile.type: unknown profile '" + type +
                          "' (expected step, ramp-hold, curved-path, pivot, stationary, teleop)",
                      line_of(node["type"]));
  }
  anchored(node, [&] { validate_profile(profile); });
  return profile;
}

ScenarioConfig parse_root(const YAML::Node& root) {
  if (!root.IsMap()) throw ConfigError("scenario: expected a mapping at the top level", line_of(root));
  check_keys(root,
             {"schema", "id", "seed", "duration", "dt_plant", "controller_rate", "terrain",
              "disturbance", "plant", "initial_velocity", "controller", "profile", "teleop"},
             "scenario");
  const auto schema = root["schema"];
  if (!schema) throw ConfigError("missing field 'schema' (expected " + std::string(kScenarioSchema) + ")", 1);
  if (scalar<std::string>(schema, "schema", "a string") != kScenarioSchema) {
    throw ConfigError("schema: unsupported '" + schema.as<std::string>() + "' (expected " +
                          std::string(kScenarioSchema) + ")",
                      line_of(schema));
  }

  ScenarioConfig c;
  if (const auto n = root["id"]) c.id = scalar<std::string>(n, "id", "a string");
  if (const auto n = root["seed"]) c.seed = scalar<std::uint64_t>(n, "seed", "an unsigned integer");
  if (const auto n = root["duration"]) {
    c.duration = number(n, "duration");
    if (!(c.duration > 0.0)) throw ConfigError("duration must be > 0", line_of(n));
  }
  if (const auto n = root["dt_plant"]) {
    c.dt_plant = number(n, "dt_plant");
    if (!(c.dt_plant > 0.0)) throw ConfigError("dt_plant must be > 0", line_of(n));
  }
  if (const auto n = root["controller_rate"]) {
    c.controller_rate = number(n, "controller_rate");
    if (!(c.controller_rate > 0.0)) throw ConfigError("controller_rate must be > 0", line_of(n));
  }
  if (const auto n = root["terrain"]) c.terrain = parse_terrain(n);
  if (const auto n = root["disturbance"]) c.terrain.disturbance = parse_disturbance(n);
  if (const auto n = root["plant"]) c.plant = parse_plant(n);
  if (const auto n = root["initial_velocity"]) c.initial_velocity = parse_pair(n, "initial_velocity");
  if (const auto n = root["controller"]) c.controller = parse_controller(n);
  if (const auto n = root["profile"]) c.profile = parse_profile(n);
  if (const auto n = root["teleop"]) {
    check_keys(n, {"max_accel"}, "teleop");
    if (const auto a = n["max_accel"]) c.teleop_max_accel = number(a, "teleop.max_accel");
  }

  const YAML::Node timing = root["controller_rate"] ? root["controller_rate"]
                            : root["dt_plant"]      ? root["dt_plant"]
                                                    : root;
  anchored(timing, [&] { c.validate(); });
  return c;
}

}  // namespace

ScenarioConfig parse_scenario(std::string_view yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(yaml_text));
  } catch (const YAML::ParserException& e) {
    throw ConfigError("malformed YAML: " + e.msg, e.mark.line + 1);
  }
  return parse_root(root);
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

namespace {

void emit_pair(YAML::Emitter& out, const Vec2& v) {
  out << YAML::Flow << YAML::BeginSeq << v.x() << v.y() << YAML::EndSeq;
}

void emit_centers(YAML::Emitter& out, const char* key, const std::vector<Vec2>& centers) {
  out << YAML::Key << key << YAML::Value << YAML::BeginSeq;
  for (const auto& c : centers) emit_pair(out, c);
  out << YAML::EndSeq;
}

}  // namespace

std::string scenario_to_yaml(const ScenarioConfig& c) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;
  out << YAML::Key << "schema" << YAML::Value << std::string(kScenarioSchema);
  out << YAML::Key << "id" << YAML::Value << c.id;
  out << YAML::Key << "seed" << YAML::Value << c.seed;
  out << YAML::Key << "duration" << YAML::Value << c.duration;
  out << YAML::Key << "dt_plant" << YAML::Value << c.dt_plant;
  out << YAML::Key << "controller_rate" << YAML::Value << c.controller_rate;

  const TerrainModel& t = c.terrain;
  out << YAML::Key << "terrain" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "name" << YAML::Value << t.name;
  out << YAML::Key << "slip_left" << YAML::Value;
  emit_pair(out, {t.slip_left.lo, t.slip_left.hi});
  out << YAML::Key << "slip_right" << YAML::Value;
  emit_pair(out, {t.slip_right.lo, t.slip_right.hi});
  out << YAML::Key << "resample_period" << YAML::Value << t.resample_period;
  out << YAML::Key << "smoothing_tau" << YAML::Value << t.smoothing_tau;
  out << YAML::Key << "disturbance" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "amplitude" << YAML::Value << t.disturbance.amplitude;
  out << YAML::Key << "frequency" << YAML::Value << t.disturbance.frequency;
  out << YAML::Key << "bias" << YAML::Value << t.disturbance.bias;
  out << YAML::EndMap << YAML::EndMap;

  const PlantParams& p = c.plant;
  out << YAML::Key << "plant" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "g_right" << YAML::Value << p.g_right;
  out << YAML::Key << "g_left" << YAML::Value << p.g_left;
  out << YAML::Key << "c_visc" << YAML::Value << p.c_visc;
  out << YAML::Key << "c_quad" << YAML::Value << p.c_quad;
  out << YAML::Key << "c_couple" << YAML::Value << p.c_couple;
  out << YAML::Key << "wheel_radius" << YAML::Value << p.wheel_radius;
  out << YAML::Key << "wheelbase" << YAML::Value << p.wheelbase;
  out << YAML::EndMap;
  out << YAML::Key << "initial_velocity" << YAML::Value;
  emit_pair(out, c.initial_velocity);

  const ControllerConfig& k = c.controller;
  out << YAML::Key << "controller" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "kind" << YAML::Value << std::string(controller_kind_name(k.kind));
  const auto preset = find_preset(k.preset);
  const bool preset_gains = preset && preset->gains.kappa == k.gains.kappa &&
                            preset->gains.epsilon == k.gains.epsilon &&
                            preset->gains.sigma == k.gains.sigma &&
                            preset->gains.gamma == k.gains.gamma;
  if (preset_gains) {
    out << YAML::Key << "preset" << YAML::Value << k.preset;
  } else {
    out << YAML::Key << "gains" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "kappa" << YAML::Value << k.gains.kappa;
    out << YAML::Key << "epsilon" << YAML::Value << k.gains.epsilon;
    out << YAML::Key << "sigma" << YAML::Value << k.gains.sigma;
    out << YAML::Key << "gamma" << YAML::Value << k.gains.gamma;
    out << YAML::EndMap;
  }
  out << YAML::Key << "rbf" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "neurons" << YAML::Value << k.rbf.neurons;
  out << YAML::Key << "width" << YAML::Value << k.rbf.width;
  out << YAML::Key << "center_scale" << YAML::Value << k.rbf.center_scale;
  if (k.rbf.seed) out << YAML::Key << "seed" << YAML::Value << *k.rbf.seed;
  if (k.rbf.centers_right) emit_centers(out, "centers_right", *k.rbf.centers_right);
  if (k.rbf.centers_left) emit_centers(out, "centers_left", *k.rbf.centers_left);
  out << YAML::EndMap;
  out << YAML::Key << "phi_hat0" << YAML::Value << k.phi_hat0;
  out << YAML::Key << "phi_hat_clamp" << YAML::Value << k.phi_hat_clamp;
  out << YAML::Key << "pid" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "kp" << YAML::Value << k.pid.kp;
  out << YAML::Key << "ki" << YAML::Value << k.pid.ki;
  out << YAML::Key << "kd" << YAML::Value << k.pid.kd;
  out << YAML::Key << "integral_clamp" << YAML::Value << k.pid.integral_clamp;
  out << YAML::Key << "derivative_tau" << YAML::Value << k.pid.derivative_tau;
  out << YAML::EndMap << YAML::EndMap;

  out << YAML::Key << "profile" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "type" << YAML::Value << profile_name(c.profile);
  std::visit(
      [&](const auto& prof) {
        using P = std::decay_t<decltype(prof)>;
        if constexpr (std::is_same_v<P, StepProfile>) {
          out << YAML::Key << "v_right" << YAML::Value << prof.v_right;
          out << YAML::Key << "v_left" << YAML::Value << prof.v_left;
          out << YAML::Key << "t_step" << YAML::Value << prof.t_step;
        } else if constexpr (std::is_same_v<P, RampHoldProfile>) {
          out << YAML::Key << "v_right" << YAML::Value << prof.v_right;
          out << YAML::Key << "v_left" << YAML::Value << prof.v_left;
          out << YAML::Key << "t_start" << YAML::Value << prof.t_start;
          out << YAML::Key << "duration" << YAML::Value << prof.duration;
        } else if constexpr (std::is_same_v<P, CurvedPathProfile>) {
          out << YAML::Key << "v_right" << YAML::Value << prof.v_right;
          out << YAML::Key << "v_left" << YAML::Value << prof.v_left;
          out << YAML::Key << "ramp_time" << YAML::Value << prof.ramp_time;
        } else if constexpr (std::is_same_v<P, PivotProfile>) {
          out << YAML::Key << "magnitude" << YAML::Value << prof.magnitude;
        }
      },
      c.profile);
  out << YAML::EndMap;
  if (c.teleop_max_accel) {
    out << YAML::Key << "teleop" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "max_accel" << YAML::Value << *c.teleop_max_accel;
    out << YAML::EndMap;
  }
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace skidsim
