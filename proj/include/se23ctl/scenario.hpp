#pragma once

// Scenario files are JSON. Every key is optional; unknown keys are rejected.
//
// {
//   "name": "hover_recovery",
//   "trajectory": {"kind": "hover" | "circle" | "helix", "origin": [x, y, z],
//                  "radius": 1.0, "period": 10.0, "climb_rate": 0.0},
//   "environment": {"gravity": [0, 0, -9.81], "thrust_axis": [0, 0, 1]},
//   "gains": {"K_p": 1, "K_v": 1, "K_r": 60},      scalar, diagonal [3] or [[3x3]]
//   "initial_error":  {"position": [..], "velocity": [..], "rotation": [..]},
//   "initial_offset": {"position": [..], "velocity": [..], "rotation": [..]},
//   "random_initial_error": {"position": s, "velocity": s, "rotation": s},
//   "horizon": 10.0, "timestep": 1e-3, "log_stride": 1, "seed": 1,
//   "disturbance": {"gravity_offset": [..], "start_time": 0.0},
//   "controller": {"filter_steps": 10, "thrust_max": 39.24, "thrust_min": 1e-3,
//                  "position_feedthrough": false},
//   "envelope_tolerance": 0.05
// }
//
// initial_error is the log-coordinate error xi(0). initial_offset is the
// group error Xref(0)^-1 X(0) given as (exp_so3(rotation), velocity, position).
// random_initial_error adds zero-mean Gaussian noise with the given standard
// deviations to xi(0), drawn from mt19937_64(seed).

#include <cstdint>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "se23ctl/controller.hpp"
#include "se23ctl/dynamics.hpp"
#include "se23ctl/errors.hpp"
#include "se23ctl/gains.hpp"
#include "se23ctl/se23.hpp"

namespace se23ctl {

enum class InitialCondition { kError, kOffset };

struct Disturbance {
  Vec3 gravity_offset = Vec3::Zero();
  double start_time = 0.0;
  bool active_at(double t) const { return !gravity_offset.isZero(0.0) && t >= start_time; }
};

struct ScenarioConfig {
  std::string name = "scenario";
  TrajectorySpec trajectory;
  Environment environment;
  Gains gains = [] {
    Gains g;
    g.kr = 60.0 * Mat3::Identity();
    return g;
  }();
  InitialCondition initial_kind = InitialCondition::kError;
  Tangent initial = Tangent::Zero();          // p, v, r blocks of the chosen form
  Tangent initial_noise = Tangent::Zero();    // standard deviations, same layout
  double horizon = 10.0;
  double timestep = 1e-3;
  std::size_t log_stride = 1;
  std::uint64_t seed = 1;
  Disturbance disturbance;
  ControllerOptions controller;
  double envelope_tolerance = 0.05;

  std::size_t steps() const { return static_cast<std::size_t>(std::llround(horizon / timestep)); }

  /// X(0) relative to Xref(0), noise included.
  GroupElement initial_error_element() const {
    Tangent base = initial;
    if (!initial_noise.isZero(0.0)) {
      std::mt19937_64 rng(seed);
      std::normal_distribution<double> n(0.0, 1.0);
      for (Eigen::Index i = 0; i < 9; ++i) base(i) += initial_noise(i) * n(rng);
    }
    if (initial_kind == InitialCondition::kError) return exp_se23(base);
    return {exp_so3(base.segment<3>(kR)), base.segment<3>(kV), base.segment<3>(kP)};
  }
};

namespace detail {

using nlohmann::json;

inline void check_keys(const json& j, const std::string& where,
                       std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(where.empty() ? "<root>" : where, "expected an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items()) {
    if (!ok.count(key)) throw ConfigError(where.empty() ? key : where + "." + key, "unknown key");
  }
}

inline double get_number(const json& j, const std::string& field) {
  if (!j.is_number()) throw ConfigError(field, "expected a number");
  const double x = j.get<double>();
  if (!std::isfinite(x)) throw ConfigError(field, "non-finite");
  return x;
}

inline Vec3 get_vec3(const json& j, const std::string& field) {
  if (!j.is_array() || j.size() != 3) throw ConfigError(field, "expected an array of 3 numbers");
  Vec3 v;
  for (int i = 0; i < 3; ++i) v(i) = get_number(j[i], field + "[" + std::to_string(i) + "]");
  return v;
}

inline Mat3 get_gain(const json& j, const std::string& field) {
  if (j.is_number()) return get_number(j, field) * Mat3::Identity();
  if (j.is_array() && j.size() == 3 && j[0].is_number()) {
    return get_vec3(j, field).asDiagonal();
  }
  if (j.is_array() && j.size() == 3) {
    Mat3 m;
    for (int r = 0; r < 3; ++r) {
      m.row(r) = get_vec3(j[r], field + "[" + std::to_string(r) + "]").transpose();
    }
    return m;
  }
  throw ConfigError(field, "expected a scalar, a diagonal [3] or a 3x3 matrix");
}

inline Tangent get_blocks(const json& j, const std::string& where, bool scalars) {
  check_keys(j, where, {"position", "velocity", "rotation"});
  Tangent t = Tangent::Zero();
  const std::pair<const char*, Eigen::Index> blocks[] = {
      {"position", kP}, {"velocity", kV}, {"rotation", kR}};
  for (const auto& [key, offset] : blocks) {
    if (!j.contains(key)) continue;
    const std::string field = where + "." + key;
    if (scalars) {
      const double s = get_number(j[key], field);
      if (s < 0.0) throw ConfigError(field, "must be >= 0");
      t.segment<3>(offset).setConstant(s);
    } else {
      t.segment<3>(offset) = get_vec3(j[key], field);
    }
  }
  return t;
}

inline json vec_json(const Vec3& v) { return json::array({v(0), v(1), v(2)}); }

inline json mat_json(const Mat3& m) {
  json rows = json::array();
  for (int r = 0; r < 3; ++r) rows.push_back(vec_json(m.row(r).transpose()));
  return rows;
}

inline json blocks_json(const Tangent& t) {
  return {{"position", vec_json(t.segment<3>(kP))},
          {"velocity", vec_json(t.segment<3>(kV))},
          {"rotation", vec_json(t.segment<3>(kR))}};
}

}  // namespace detail

/// Validates the assembled config; throws ConfigError naming the field.
inline void validate_scenario(const ScenarioConfig& c) {
  if (!(c.horizon > 0.0)) throw ConfigError("horizon", "must be > 0");
  if (!(c.timestep > 0.0)) throw ConfigError("timestep", "must be > 0");
  if (c.timestep > c.horizon) throw ConfigError("timestep", "exceeds horizon");
  if (std::abs(c.steps() * c.timestep - c.horizon) > 1e-9 * c.horizon) {
    throw ConfigError("timestep", "horizon is not an integer number of steps");
  }
  if (c.log_stride == 0) throw ConfigError("log_stride", "must be >= 1");
  try {
    validate_environment(c.environment);
  } catch (const InvalidArgument& e) {
    throw ConfigError("environment", e.what());
  }
  const std::pair<const Mat3*, const char*> gains[] = {
      {&c.gains.kp, "K_p"}, {&c.gains.kv, "K_v"}, {&c.gains.kr, "K_r"}};
  for (const auto& [k, name] : gains) {
    Gains probe;
    probe.kp = *k;
    try {
      validate_gains(probe);
    } catch (const InvalidArgument& e) {
      std::string what = e.what();
      throw ConfigError(std::string("gains.") + name, what.substr(what.find(':') + 2));
    }
  }
  if (!(c.controller.filter_steps >= 1.0)) {
    throw ConfigError("controller.filter_steps", "must be >= 1");
  }
  if (!(c.controller.thrust_min > 0.0)) throw ConfigError("controller.thrust_min", "must be > 0");
  if (!(c.controller.thrust_max > c.controller.thrust_min)) {
    throw ConfigError("controller.thrust_max", "must exceed thrust_min");
  }
  try {
    validate_trajectory(c.trajectory, c.environment, c.controller.thrust_max);
  } catch (const InvalidArgument& e) {
    std::string what = e.what();
    const auto colon = what.find(':');
    throw ConfigError(what.substr(0, colon), what.substr(colon + 2));
  }
  const double rot = c.initial.segment<3>(kR).norm();
  if (rot >= std::numbers::pi - kBranchEpsilon) {
    throw ConfigError(c.initial_kind == InitialCondition::kError ? "initial_error.rotation"
                                                                 : "initial_offset.rotation",
                      "rotation angle outside the principal branch");
  }
  if (!(c.envelope_tolerance >= 0.0)) throw ConfigError("envelope_tolerance", "must be >= 0");
  if (!(c.disturbance.start_time >= 0.0)) {
    throw ConfigError("disturbance.start_time", "must be >= 0");
  }
}

inline ScenarioConfig parse_scenario(const nlohmann::json& j) {
  using namespace detail;
  check_keys(j, "",
             {"name", "trajectory", "environment", "gains", "initial_error", "initial_offset",
              "random_initial_error", "horizon", "timestep", "log_stride", "seed", "disturbance",
              "controller", "envelope_tolerance"});
  ScenarioConfig c;
  if (j.contains("name")) {
    if (!j["name"].is_string()) throw ConfigError("name", "expected a string");
    c.name = j["name"].get<std::string>();
  }
  if (j.contains("trajectory")) {
    const json& t = j["trajectory"];
    check_keys(t, "trajectory", {"kind", "origin", "radius", "period", "climb_rate"});
    if (t.contains("kind")) {
      const std::string kind = t["kind"].is_string() ? t["kind"].get<std::string>() : "";
      if (kind == "hover") {
        c.trajectory.kind = TrajectoryKind::kHover;
      } else if (kind == "circle") {
        c.trajectory.kind = TrajectoryKind::kCircle;
      } else if (kind == "helix") {
        c.trajectory.kind = TrajectoryKind::kHelix;
      } else {
        throw ConfigError("trajectory.kind", "expected hover, circle or helix");
      }
    }
    if (t.contains("origin")) c.trajectory.origin = get_vec3(t["origin"], "trajectory.origin");
    if (t.contains("radius")) c.trajectory.radius = get_number(t["radius"], "trajectory.radius");
    if (t.contains("period")) c.trajectory.period = get_number(t["period"], "trajectory.period");
    if (t.contains("climb_rate")) {
      c.trajectory.climb_rate = get_number(t["climb_rate"], "trajectory.climb_rate");
    }
  }
  if (j.contains("environment")) {
    const json& e = j["environment"];
    check_keys(e, "environment", {"gravity", "thrust_axis"});
    if (e.contains("gravity")) c.environment.gravity = get_vec3(e["gravity"], "environment.gravity");
    if (e.contains("thrust_axis")) {
      c.environment.thrust_axis = get_vec3(e["thrust_axis"], "environment.thrust_axis");
    }
  }
  if (j.contains("gains")) {
    const json& g = j["gains"];
    check_keys(g, "gains", {"K_p", "K_v", "K_r"});
    if (g.contains("K_p")) c.gains.kp = get_gain(g["K_p"], "gains.K_p");
    if (g.contains("K_v")) c.gains.kv = get_gain(g["K_v"], "gains.K_v");
    if (g.contains("K_r")) c.gains.kr = get_gain(g["K_r"], "gains.K_r");
  }
  if (j.contains("initial_error") && j.contains("initial_offset")) {
    throw ConfigError("initial_offset", "give either initial_error or initial_offset");
  }
  if (j.contains("initial_error")) {
    c.initial = get_blocks(j["initial_error"], "initial_error", false);
  }
  if (j.contains("initial_offset")) {
    c.initial_kind = InitialCondition::kOffset;
    c.initial = get_blocks(j["initial_offset"], "initial_offset", false);
  }
  if (j.contains("random_initial_error")) {
    c.initial_noise = get_blocks(j["random_initial_error"], "random_initial_error", true);
  }
  if (j.contains("horizon")) c.horizon = get_number(j["horizon"], "horizon");
  if (j.contains("timestep")) c.timestep = get_number(j["timestep"], "timestep");
  if (j.contains("log_stride")) {
    if (!j["log_stride"].is_number_unsigned()) throw ConfigError("log_stride", "expected integer >= 1");
    c.log_stride = j["log_stride"].get<std::size_t>();
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) throw ConfigError("seed", "expected integer >= 0");
    c.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("disturbance")) {
    const json& d = j["disturbance"];
    check_keys(d, "disturbance", {"gravity_offset", "start_time"});
    if (d.contains("gravity_offset")) {
      c.disturbance.gravity_offset = get_vec3(d["gravity_offset"], "disturbance.gravity_offset");
    }
    if (d.contains("start_time")) {
      c.disturbance.start_time = get_number(d["start_time"], "disturbance.start_time");
    }
  }
  if (j.contains("controller")) {
    const json& k = j["controller"];
    check_keys(k, "controller",
               {"filter_steps", "thrust_max", "thrust_min", "position_feedthrough"});
    if (k.contains("filter_steps")) {
      c.controller.filter_steps = get_number(k["filter_steps"], "controller.filter_steps");
    }
    if (k.contains("thrust_max")) {
      c.controller.thrust_max = get_number(k["thrust_max"], "controller.thrust_max");
    }
    if (k.contains("thrust_min")) {
      c.controller.thrust_min = get_number(k["thrust_min"], "controller.thrust_min");
    }
    if (k.contains("position_feedthrough")) {
      if (!k["position_feedthrough"].is_boolean()) {
        throw ConfigError("controller.position_feedthrough", "expected a boolean");
      }
      c.controller.position_feedthrough = k["position_feedthrough"].get<bool>();
    }
  }
  if (j.contains("envelope_tolerance")) {
    c.envelope_tolerance = get_number(j["envelope_tolerance"], "envelope_tolerance");
  }
  validate_scenario(c);
  return c;
}

inline ScenarioConfig parse_scenario(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("<file>", std::string("parse error: ") + e.what());
  }
  return parse_scenario(j);
}

inline ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

/// Fully expanded config, as recorded in the run sidecar.
inline nlohmann::json to_json(const ScenarioConfig& c) {
  using namespace detail;
  json j;
  j["name"] = c.name;
  j["trajectory"] = {{"kind", to_string(c.trajectory.kind)},
                     {"origin", vec_json(c.trajectory.origin)},
                     {"radius", c.trajectory.radius},
                     {"period", c.trajectory.period},
                     {"climb_rate", c.trajectory.climb_rate}};
  j["environment"] = {{"gravity", vec_json(c.environment.gravity)},
                      {"thrust_axis", vec_json(c.environment.thrust_axis)}};
  j["gains"] = {{"K_p", mat_json(c.gains.kp)},
                {"K_v", mat_json(c.gains.kv)},
                {"K_r", mat_json(c.gains.kr)}};
  j[c.initial_kind == InitialCondition::kError ? "initial_error" : "initial_offset"] =
      blocks_json(c.initial);
  if (!c.initial_noise.isZero(0.0)) {
    j["random_initial_error"] = {{"position", c.initial_noise(kP)},
                                 {"velocity", c.initial_noise(kV)},
                                 {"rotation", c.initial_noise(kR)}};
  }
  j["horizon"] = c.horizon;
  j["timestep"] = c.timestep;
  j["log_stride"] = c.log_stride;
  j["seed"] = c.seed;
  j["disturbance"] = {{"gravity_offset", vec_json(c.disturbance.gravity_offset)},
                      {"start_time", c.disturbance.start_time}};
  j["controller"] = {{"filter_steps", c.controller.filter_steps},
                     {"thrust_max", c.controller.thrust_max},
                     {"thrust_min", c.controller.thrust_min},
                     {"position_feedthrough", c.controller.position_feedthrough}};
  j["envelope_tolerance"] = c.envelope_tolerance;
  return j;
}

}  // namespace se23ctl
