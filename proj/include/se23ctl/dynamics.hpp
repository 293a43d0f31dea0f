#pragma once

// Mixed-invariant rigid-body model Xdot = (M - C) X + X (N + C), with gravity
// M = wedge(0, g, 0) acting from the left and body-frame thrust/rate
// N = wedge(0, T e_T, w) from the right. Expanded:
//
//   pdot = v,   vdot = g + R T e_T,   Rdot = R hat(w).

#include <cmath>
#include <numbers>
#include <string>

#include "se23ctl/errors.hpp"
#include "se23ctl/se23.hpp"
#include "se23ctl/so3.hpp"

namespace se23ctl {

struct ControlInput {
  double thrust = 0.0;          // specific thrust, m/s^2
  Vec3 omega = Vec3::Zero();    // body rate, rad/s
};

struct Environment {
  Vec3 gravity{0.0, 0.0, -9.81};
  Vec3 thrust_axis{0.0, 0.0, 1.0};
};

inline void validate_environment(const Environment& env, double tol = 1e-9) {
  if (!env.gravity.allFinite() || !env.thrust_axis.allFinite()) {
    throw InvalidArgument("environment: non-finite entry");
  }
  if (std::abs(env.thrust_axis.norm() - 1.0) > tol) {
    throw InvalidArgument("environment: thrust axis is not a unit vector");
  }
}

/// Xdot as a 5x5 matrix (rows 4-5 zero).
inline Mat5 mixed_invariant_rhs(const GroupElement& x, const ControlInput& u,
                                const Environment& env) {
  Mat5 d = Mat5::Zero();
  d.topLeftCorner<3, 3>() = x.R * hat(u.omega);
  d.block<3, 1>(0, 3) = env.gravity + u.thrust * (x.R * env.thrust_axis);
  d.block<3, 1>(0, 4) = x.v;
  return d;
}

/// Body-frame velocity vee(X^-1 Xdot) = (R^T v, R^T g + T e_T, w).
inline Tangent body_velocity(const GroupElement& x, const ControlInput& u,
                             const Environment& env) {
  const Mat3 rt = x.R.transpose();
  return make_tangent(rt * x.v, rt * env.gravity + u.thrust * env.thrust_axis, u.omega);
}

/// One step of the 4th-order Runge-Kutta-Munthe-Kaas scheme with the input held
/// constant over the step. Stays on the group by construction.
inline GroupElement step(const GroupElement& x, const ControlInput& u, const Environment& env,
                         double h) {
  if (!(h > 0.0)) throw InvalidArgument("step: timestep must be positive");
  auto stage = [&](const Tangent& offset) -> Tangent {
    const GroupElement y = compose(x, exp_se23(offset));
    return h * (jr_inv_se23(offset) * body_velocity(y, u, env));
  };
  const Tangent k1 = h * body_velocity(x, u, env);
  const Tangent k2 = stage(0.5 * k1);
  const Tangent k3 = stage(0.5 * k2);
  const Tangent k4 = stage(k3);
  return compose(x, exp_se23((k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0));
}

// ---------------------------------------------------------------------------
// Reference trajectories

enum class TrajectoryKind { kHover, kCircle, kHelix };

inline std::string to_string(TrajectoryKind k) {
  switch (k) {
    case TrajectoryKind::kHover: return "hover";
    case TrajectoryKind::kCircle: return "circle";
    case TrajectoryKind::kHelix: return "helix";
  }
  return "unknown";
}

struct TrajectorySpec {
  TrajectoryKind kind = TrajectoryKind::kHover;
  Vec3 origin = Vec3::Zero();   // hover point / circle centre, m
  double radius = 1.0;          // m
  double period = 10.0;         // s
  double climb_rate = 0.0;      // m/s, helix only
};

/// Reference state together with the nominal inputs that generate it.
struct ReferenceSample {
  GroupElement X;
  double thrust = 0.0;
  Vec3 omega = Vec3::Zero();
  /// Plant gravity minus the gravity the reference was generated with.
  Vec3 gravity_offset = Vec3::Zero();
};

/// Smallest rotation taking unit vector a onto unit vector b.
inline Rotation align_vectors(const Vec3& a, const Vec3& b) {
  const Vec3 axis = a.cross(b);
  const double s = axis.norm();
  const double c = a.dot(b);
  if (s < 1e-15) {
    if (c > 0.0) return Rotation::Identity();
    Vec3 perp = a.cross(Vec3::UnitX());
    if (perp.norm() < 1e-6) perp = a.cross(Vec3::UnitY());
    return exp_so3(std::numbers::pi * perp.normalized());
  }
  return exp_so3(std::atan2(s, c) * axis / s);
}

namespace detail {

struct ReferenceFrame {
  Rotation up_frame;     // maps e_z to the local "up" (-g direction)
  Rotation tilt;         // maps e_T to the initial thrust direction, local frame
  double rate = 0.0;     // circle angular rate, rad/s
  double thrust = 0.0;
};

inline ReferenceFrame reference_frame(const TrajectorySpec& spec, const Environment& env) {
  ReferenceFrame f;
  const double g = env.gravity.norm();
  const Vec3 up = g > 0.0 ? Vec3(-env.gravity / g) : Vec3::UnitZ();
  f.up_frame = align_vectors(Vec3::UnitZ(), up);
  double centripetal = 0.0;
  if (spec.kind != TrajectoryKind::kHover) {
    f.rate = 2.0 * std::numbers::pi / spec.period;
    centripetal = spec.radius * f.rate * f.rate;
  }
  const Vec3 force(-centripetal, 0.0, g);
  f.thrust = force.norm();
  const Vec3 dir = f.thrust > 0.0 ? Vec3(force / f.thrust) : Vec3::UnitZ();
  f.tilt = align_vectors(env.thrust_axis, dir);
  return f;
}

}  // namespace detail

/// Throws InvalidArgument for parameters that cannot produce a feasible
/// reference (non-positive radius/period, thrust above the actuator limit).
inline void validate_trajectory(const TrajectorySpec& spec, const Environment& env,
                                double thrust_max) {
  if (!spec.origin.allFinite()) throw InvalidArgument("trajectory.origin: non-finite");
  if (spec.kind != TrajectoryKind::kHover) {
    if (!(spec.radius > 0.0)) throw InvalidArgument("trajectory.radius: must be positive");
    if (!(spec.period > 0.0)) throw InvalidArgument("trajectory.period: must be positive");
  }
  if (spec.kind == TrajectoryKind::kHelix && !std::isfinite(spec.climb_rate)) {
    throw InvalidArgument("trajectory.climb_rate: non-finite");
  }
  const double thrust = detail::reference_frame(spec, env).thrust;
  if (thrust > thrust_max) {
    throw InvalidArgument("trajectory: reference thrust " + std::to_string(thrust) +
                          " exceeds thrust_max " + std::to_string(thrust_max));
  }
}

/// Analytic reference at time t. Circle and helix keep constant thrust and
/// body rate; the attitude is the initial tilt yawed at the circle rate.
inline ReferenceSample reference(double t, const TrajectorySpec& spec, const Environment& env) {
  const detail::ReferenceFrame f = detail::reference_frame(spec, env);
  ReferenceSample s;
  s.thrust = f.thrust;
  if (spec.kind == TrajectoryKind::kHover) {
    s.X = {f.up_frame * f.tilt, Vec3::Zero(), spec.origin};
    return s;
  }
  const double phase = f.rate * t;
  const double climb = spec.kind == TrajectoryKind::kHelix ? spec.climb_rate : 0.0;
  const Vec3 local_p(spec.radius * std::cos(phase), spec.radius * std::sin(phase), climb * t);
  const Vec3 local_v(-spec.radius * f.rate * std::sin(phase),
                     spec.radius * f.rate * std::cos(phase), climb);
  const Rotation yaw = exp_so3(Vec3(0.0, 0.0, phase));
  s.X = {f.up_frame * yaw * f.tilt, f.up_frame * local_v, spec.origin + f.up_frame * local_p};
  s.omega = f.rate * (f.tilt.transpose() * Vec3::UnitZ());
  return s;
}

}  // namespace se23ctl
