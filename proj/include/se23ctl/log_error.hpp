#pragma once

// Exact dynamics of the log-coordinate tracking error xi = Log(Xref^-1 X).
//
// With deviations taken as actual minus reference,
//
//   xi_dot = -ad(n_ref) xi + vee([wedge(xi), C])
//            + J_r^-1(xi) n_dev + J_l^-1(xi) Ad m_dev
//
// where n_ref = (0, T_ref e_T, w_ref), n_dev = (0, T_dev e_T, w_dev),
// m_dev = (0, g_dev, 0) and Ad is the conjugation matrix adjoint(Xref).
// No linearisation is involved; the first two terms are exactly linear in xi.

#include <Eigen/Core>

#include "se23ctl/dynamics.hpp"
#include "se23ctl/se23.hpp"

namespace se23ctl {

using InputMatrix = Eigen::Matrix<double, 9, 4>;
using DisturbanceMatrix = Eigen::Matrix<double, 9, 3>;

/// Actual minus reference inputs.
struct InputDeviation {
  Vec3 omega = Vec3::Zero();
  double thrust = 0.0;
  Vec3 gravity = Vec3::Zero();
};

inline InputDeviation input_deviation(const ControlInput& u, const ReferenceSample& ref) {
  return {u.omega - ref.omega, u.thrust - ref.thrust, ref.gravity_offset};
}

inline Tangent error_state(const GroupElement& reference, const GroupElement& state) {
  return log_se23(left_error(reference, state));
}

inline Tangent nominal_input_vector(const ReferenceSample& ref, const Environment& env) {
  return make_tangent(Vec3::Zero(), ref.thrust * env.thrust_axis, ref.omega);
}

/// Matrix of the zero-deviation error field, -ad(n_ref) + A_C:
///   [ -W   I   0       ]
///   [  0  -W  -hat(T e_T) ]
///   [  0   0  -W       ]      W = hat(w_ref)
inline Mat9 linear_error_matrix(const ReferenceSample& ref, const Environment& env) {
  Mat9 a = -ad_small(nominal_input_vector(ref, env));
  a.block<3, 3>(kP, kV) += Mat3::Identity();
  return a;
}

/// Columns act on [w_dev; T_dev]: J_r^-1(xi) applied to (0, T_dev e_T, w_dev).
inline InputMatrix input_matrix(const Tangent& xi, const Vec3& thrust_axis) {
  const Mat9 jr = jr_inv_se23(xi);
  InputMatrix b;
  b.leftCols<3>() = jr.middleCols<3>(kR);
  b.col(3) = jr.middleCols<3>(kV) * thrust_axis;
  return b;
}

/// Columns act on g_dev: J_l^-1(xi) adjoint(Xref) applied to (0, g_dev, 0).
inline DisturbanceMatrix disturbance_matrix(const Tangent& xi, const GroupElement& reference) {
  return (jl_inv_se23(xi) * adjoint(reference)).middleCols<3>(kV);
}

inline Tangent error_rhs(const Tangent& xi, const ReferenceSample& ref,
                         const InputDeviation& dev, const Environment& env) {
  Eigen::Vector4d inputs;
  inputs << dev.omega, dev.thrust;
  Tangent out = -ad_small(nominal_input_vector(ref, env)) * xi + c_commutator(xi) +
                input_matrix(xi, env.thrust_axis) * inputs;
  if (!dev.gravity.isZero(0.0)) out += disturbance_matrix(xi, ref.X) * dev.gravity;
  return out;
}

}  // namespace se23ctl
