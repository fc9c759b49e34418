#include "skidsim/teleop/protocol.hpp"

#include "json.hpp"

namespace skidsim::teleop {

namespace {

using nlohmann::json;

template <class T>
T field(const json& j, const char* name) {
  if (!j.contains(name)) throw ProtocolError(name, std::string("missing field \"") + name + "\"");
  try {
    return j.at(name).get<T>();
  } catch (const json::exception&) {
    throw ProtocolError(name, std::string("field \"") + name + "\" has the wrong type");
  }
}

double number(const json& j, const char* name) {
  if (!j.contains(name)) throw ProtocolError(name, std::string("missing field \"") + name + "\"");
  const json& v = j.at(name);
  if (!v.is_number()) throw ProtocolError(name, std::string("field \"") + name + "\" must be a number");
  return v.get<double>();
}

json pair_json(const SidePair& p) { return {{"r", p.r}, {"l", p.l}}; }

SidePair pair_from(const json& j, const char* name) {
  const auto obj = field<json>(j, name);
  if (!obj.is_object()) throw ProtocolError(name, std::string("field \"") + name + "\" must be an object");
  return {number(obj, "r"), number(obj, "l")};
}

struct Encoder {
  json operator()(const CommandMessage& m) const {
    json j = {{"type", "command"}, {"t_client", m.t_client}, {"v_r_d", m.v_r_d},
              {"v_l_d", m.v_l_d}, {"estop", m.estop}};
    if (m.terrain_switch) j["terrain_switch"] = *m.terrain_switch;
    return j;
  }
  json operator()(const ReleaseMessage& m) const {
    return {{"type", "release"}, {"t_client", m.t_client}};
  }
  json operator()(const HelloMessage& m) const {
    return {{"type", "hello"},          {"authority", m.authority},
            {"connection_id", m.connection_id}, {"broadcast_hz", m.broadcast_hz},
            {"max_speed", m.max_speed}, {"terrains", m.terrains}};
  }
  json operator()(const TelemetryFrame& m) const {
    return {{"type", "telemetry"},
            {"seq", m.seq},
            {"t_sim", m.t_sim},
            {"reference", pair_json(m.reference)},
            {"measured", pair_json(m.measured)},
            {"error", pair_json(m.error)},
            {"control", pair_json(m.control)},
            {"phi_hat", pair_json(m.phi_hat)},
            {"phi_norm", pair_json(m.phi_norm)},
            {"slip", pair_json(m.slip)},
            {"pose", {{"x", m.pose.x}, {"y", m.pose.y}, {"theta", m.pose.theta}}},
            {"terrain", m.terrain},
            {"warnings", m.warnings},
            {"estop", m.estop},
            {"watchdog", m.watchdog}};
  }
  json operator()(const ErrorMessage& m) const {
    return {{"type", "error"}, {"code", m.code}, {"message", m.message}};
  }
};

}  // namespace

std::string encode(const Message& message) {
  json j = std::visit(Encoder{}, message);
  j["v"] = kProtocolVersion;
  return j.dump();
}

Message decode(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ProtocolError("", std::string("not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ProtocolError("", "message must be a JSON object");
  const int version = field<int>(j, "v");
  if (version != kProtocolVersion) {
    throw ProtocolError("v", "unsupported protocol version " + std::to_string(version));
  }
  const auto type = field<std::string>(j, "type");
  if (type == "command") {
    CommandMessage m;
    m.t_client = field<std::int64_t>(j, "t_client");
    m.v_r_d = number(j, "v_r_d");
    m.v_l_d = number(j, "v_l_d");
    if (j.contains("terrain_switch") && !j["terrain_switch"].is_null()) {
      m.terrain_switch = field<std::string>(j, "terrain_switch");
    }
    if (j.contains("estop")) m.estop = field<bool>(j, "estop");
    return m;
  }
  if (type == "release") return ReleaseMessage{field<std::int64_t>(j, "t_client")};
  if (type == "hello") {
    HelloMessage m;
    m.authority = field<bool>(j, "authority");
    m.connection_id = field<std::uint64_t>(j, "connection_id");
    m.broadcast_hz = number(j, "broadcast_hz");
    m.max_speed = number(j, "max_speed");
    m.terrains = field<std::vector<std::string>>(j, "terrains");
    return m;
  }
  if (type == "telemetry") {
    TelemetryFrame m;
    m.seq = field<std::uint64_t>(j, "seq");
    m.t_sim = number(j, "t_sim");
    m.reference = pair_from(j, "reference");
    m.measured = pair_from(j, "measured");
    m.error = pair_from(j, "error");
    m.control = pair_from(j, "control");
    m.phi_hat = pair_from(j, "phi_hat");
    m.phi_norm = pair_from(j, "phi_norm");
    m.slip = pair_from(j, "slip");
    const auto pose = field<json>(j, "pose");
    if (!pose.is_object()) throw ProtocolError("pose", "field \"pose\" must be an object");
    m.pose = {number(pose, "x"), number(pose, "y"), number(pose, "theta")};
    m.terrain = field<std::string>(j, "terrain");
    m.warnings = field<std::vector<std::string>>(j, "warnings");
    m.estop = field<bool>(j, "estop");
    m.watchdog = field<bool>(j, "watchdog");
    return m;
  }
  if (type == "error") {
    return ErrorMessage{field<std::string>(j, "code"), field<std::string>(j, "message")};
  }
  throw ProtocolError("type", "unknown message type \"" + type + "\"");
}

}  // namespace skidsim::teleop
