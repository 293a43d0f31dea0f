#pragma once

// Three-loop log-linear backstepping on the log-coordinate tracking error.
//
//   position:  xi_v^d = -B_p [w_dev; T_dev] - D_p g_dev - K_p xi_p
//   velocity:  -T_ref hat(e_T) xi_r^d + (S_r e_T) T_dev
//                = -B_vw w_dev - D_v g_dev - K_v e_v + d/dt xi_v^d + hat(w_ref) xi_v^d
//   attitude:  w_dev = S_r^-1 (hat(w_ref) xi_r^d + d/dt xi_r^d - K_r (xi_r - xi_r^d))
//
// B and D are the input and disturbance matrices of the error dynamics, split
// into position (p), velocity (v) and rotation rows. Physical inputs are
// recovered as T = T_ref + T_dev, w = w_ref + w_dev.

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "se23ctl/dynamics.hpp"
#include "se23ctl/errors.hpp"
#include "se23ctl/gains.hpp"
#include "se23ctl/log_error.hpp"
#include "se23ctl/se23.hpp"
#include "se23ctl/so3.hpp"
#include "se23ctl/stability.hpp"

namespace se23ctl {

struct ControllerOptions {
  /// Virtual-control derivative filter time constant, in timesteps.
  double filter_steps = 10.0;
  double thrust_max = 4.0 * 9.81;
  /// Below this reference thrust the attitude setpoint cannot be solved for.
  double thrust_min = 1e-3;
  /// Feed the previous step's (w_dev, T_dev) into the position law. The
  /// resulting loop differentiates w_dev twice and is unstable at practical
  /// gains, so it is off unless explicitly requested.
  bool position_feedthrough = false;
};

struct ControllerState {
  bool initialized = false;
  Vec3 velocity_setpoint = Vec3::Zero();
  Vec3 velocity_setpoint_rate = Vec3::Zero();
  Vec3 attitude_setpoint = Vec3::Zero();
  Vec3 attitude_setpoint_rate = Vec3::Zero();
  Vec3 omega_dev = Vec3::Zero();
  double thrust_dev = 0.0;
};

struct BacksteppingErrors {
  Vec3 e_p = Vec3::Zero();
  Vec3 e_v = Vec3::Zero();
  Vec3 e_r = Vec3::Zero();
};

struct ControlDiagnostics {
  BacksteppingErrors errors;
  double lyapunov = 0.0;
  Vec3 velocity_setpoint = Vec3::Zero();
  Vec3 attitude_setpoint = Vec3::Zero();
  Vec3 omega_dev = Vec3::Zero();
  double thrust_dev = 0.0;   // commanded, before saturation
  bool saturated = false;
};

struct ControlOutput {
  ControlInput u;
  ControllerState state;
  ControlDiagnostics diagnostics;
};

inline Vec3 position_law(const Tangent& xi, const Vec3& omega_dev, double thrust_dev,
                         const Vec3& gravity_dev, const GroupElement& reference,
                         const Vec3& thrust_axis, const Gains& gains) {
  Eigen::Vector4d inputs;
  inputs << omega_dev, thrust_dev;
  Vec3 out = -gains.kp * xi.segment<3>(kP);
  out -= input_matrix(xi, thrust_axis).middleRows<3>(kP) * inputs;
  if (!gravity_dev.isZero(0.0)) {
    out -= disturbance_matrix(xi, reference).middleRows<3>(kP) * gravity_dev;
  }
  return out;
}

struct VelocitySolution {
  Vec3 attitude_setpoint = Vec3::Zero();
  double thrust_dev = 0.0;
};

/// Minimum-norm solution of the velocity-loop equation. The one-dimensional
/// null direction (setpoint spin about e_T) is left at zero.
inline VelocitySolution velocity_solve(const Vec3& e_v, const Tangent& xi,
                                       const ReferenceSample& ref, const Environment& env,
                                       const Vec3& omega_dev, const Vec3& velocity_setpoint,
                                       const Vec3& velocity_setpoint_rate, const Gains& gains,
                                       double thrust_min = 1e-3) {
  if (!(ref.thrust > thrust_min)) {
    throw SolverError("velocity_solve: reference thrust below solvable minimum");
  }
  const InputMatrix b = input_matrix(xi, env.thrust_axis);
  const Vec3 thrust_col = b.col(3).segment<3>(kV);
  if (std::abs(thrust_col.dot(env.thrust_axis)) < 1e-6) {
    throw SolverError("velocity_solve: thrust direction degenerate");
  }
  Vec3 rhs = -b.block<3, 3>(kV, 0) * omega_dev - gains.kv * e_v + velocity_setpoint_rate +
             ref.omega.cross(velocity_setpoint);
  if (!ref.gravity_offset.isZero(0.0)) {
    rhs -= disturbance_matrix(xi, ref.X).middleRows<3>(kV) * ref.gravity_offset;
  }
  Eigen::Matrix<double, 3, 4> a;
  a.leftCols<3>() = -ref.thrust * hat(env.thrust_axis);
  a.col(3) = thrust_col;
  const Eigen::Vector4d z = a.transpose() * (a * a.transpose()).ldlt().solve(rhs);
  return {z.head<3>(), z(3)};
}

inline Vec3 attitude_law(const Vec3& xi_r, const Vec3& attitude_setpoint,
                         const Vec3& attitude_setpoint_rate, const Vec3& omega_ref,
                         const Gains& gains) {
  if (xi_r.norm() >= std::numbers::pi - kBranchEpsilon) {
    throw BranchError("attitude_law: rotation error outside the principal branch");
  }
  // The rotation-row input block is S_r(xi_r); its inverse is J_r(xi_r).
  return jr_so3(xi_r) * (omega_ref.cross(attitude_setpoint) + attitude_setpoint_rate -
                         gains.kr * (xi_r - attitude_setpoint));
}

namespace detail {

// First-order low-pass of the backward difference.
inline Vec3 filtered_rate(const Vec3& current, const Vec3& previous, const Vec3& rate, double h,
                          double filter_steps) {
  const double blend = 1.0 / std::max(filter_steps, 1.0);
  return rate + blend * ((current - previous) / h - rate);
}

}  // namespace detail

/// One controller update. Order: position law (previous-step deviations),
/// filtered d/dt xi_v^d, velocity solve, filtered d/dt xi_r^d, attitude law.
inline ControlOutput control_step(const Tangent& xi, const ReferenceSample& ref,
                                  const Environment& env, const Gains& gains,
                                  const ControllerState& state, double h,
                                  const ControllerOptions& opts = {}) {
  if (!(h > 0.0)) throw InvalidArgument("control_step: timestep must be positive");
  ControlOutput out;
  ControllerState& next = out.state;
  next.initialized = true;

  const Vec3 w_prev = opts.position_feedthrough ? state.omega_dev : Vec3::Zero();
  const double t_prev = opts.position_feedthrough ? state.thrust_dev : 0.0;
  const Vec3 vd = position_law(xi, w_prev, t_prev, ref.gravity_offset, ref.X, env.thrust_axis,
                               gains);
  next.velocity_setpoint = vd;
  next.velocity_setpoint_rate =
      state.initialized ? detail::filtered_rate(vd, state.velocity_setpoint,
                                                state.velocity_setpoint_rate, h, opts.filter_steps)
                        : Vec3::Zero();

  const Vec3 e_v = xi.segment<3>(kV) - vd;
  const VelocitySolution vs = velocity_solve(e_v, xi, ref, env, state.omega_dev, vd,
                                             next.velocity_setpoint_rate, gains, opts.thrust_min);
  const Vec3 rd = vs.attitude_setpoint;
  next.attitude_setpoint = rd;
  next.attitude_setpoint_rate =
      state.initialized ? detail::filtered_rate(rd, state.attitude_setpoint,
                                                state.attitude_setpoint_rate, h, opts.filter_steps)
                        : Vec3::Zero();

  const Vec3 w_dev = attitude_law(xi.segment<3>(kR), rd, next.attitude_setpoint_rate, ref.omega,
                                  gains);

  const double thrust_cmd = ref.thrust + vs.thrust_dev;
  out.u.thrust = std::clamp(thrust_cmd, 0.0, opts.thrust_max);
  out.u.omega = ref.omega + w_dev;
  next.omega_dev = w_dev;
  next.thrust_dev = out.u.thrust - ref.thrust;

  ControlDiagnostics& d = out.diagnostics;
  d.errors = {xi.segment<3>(kP), e_v, xi.segment<3>(kR) - rd};
  d.lyapunov = lyapunov_value(d.errors.e_p, d.errors.e_v, d.errors.e_r);
  d.velocity_setpoint = vd;
  d.attitude_setpoint = rd;
  d.omega_dev = w_dev;
  d.thrust_dev = vs.thrust_dev;
  d.saturated = out.u.thrust != thrust_cmd;
  return out;
}

}  // namespace se23ctl
