#pragma once

// The SE_2(3) group of extended poses (R, v, p) and its 9-dimensional algebra.
//
// Tangent coordinates are stacked [xi_p, xi_v, xi_r] everywhere. The 5x5
// embedding is
//
//     X = [ R  v  p ]        wedge(xi) = [ hat(xi_r)  xi_v  xi_p ]
//         [ 0  1  0 ]                    [ 0          0     0    ]
//         [ 0  0  1 ]                    [ 0          0     0    ]

#include <cmath>
#include <numbers>

#include <Eigen/Core>
#include <Eigen/Dense>

#include "se23ctl/errors.hpp"
#include "se23ctl/so3.hpp"

namespace se23ctl {

using Mat5 = Eigen::Matrix<double, 5, 5>;
using Mat9 = Eigen::Matrix<double, 9, 9>;
using Tangent = Eigen::Matrix<double, 9, 1>;

inline constexpr Eigen::Index kP = 0;
inline constexpr Eigen::Index kV = 3;
inline constexpr Eigen::Index kR = 6;

inline Tangent make_tangent(const Vec3& p, const Vec3& v, const Vec3& r) {
  Tangent xi;
  xi << p, v, r;
  return xi;
}

struct GroupElement {
  Rotation R = Rotation::Identity();
  Vec3 v = Vec3::Zero();
  Vec3 p = Vec3::Zero();

  static GroupElement identity() { return {}; }

  Mat5 matrix() const {
    Mat5 m = Mat5::Identity();
    m.topLeftCorner<3, 3>() = R;
    m.block<3, 1>(0, 3) = v;
    m.block<3, 1>(0, 4) = p;
    return m;
  }

  static GroupElement from_matrix(const Mat5& m) {
    return {m.topLeftCorner<3, 3>(), m.block<3, 1>(0, 3), m.block<3, 1>(0, 4)};
  }
};

inline Mat5 wedge(const Tangent& xi) {
  Mat5 m = Mat5::Zero();
  m.topLeftCorner<3, 3>() = hat(xi.segment<3>(kR));
  m.block<3, 1>(0, 3) = xi.segment<3>(kV);
  m.block<3, 1>(0, 4) = xi.segment<3>(kP);
  return m;
}

inline Tangent vee9(const Mat5& m) {
  if (m.bottomRows<2>().cwiseAbs().maxCoeff() > kSkewTolerance) {
    throw InvalidArgument("vee9: bottom rows of an algebra element must vanish");
  }
  const Vec3 r = vee(m.topLeftCorner<3, 3>());
  return make_tangent(m.block<3, 1>(0, 4), m.block<3, 1>(0, 3), r);
}

inline GroupElement compose(const GroupElement& a, const GroupElement& b) {
  return {a.R * b.R, a.v + a.R * b.v, a.p + a.R * b.p};
}

inline GroupElement inverse(const GroupElement& x) {
  const Mat3 rt = x.R.transpose();
  return {rt, -rt * x.v, -rt * x.p};
}

inline GroupElement exp_se23(const Tangent& xi) {
  const Vec3 w = xi.segment<3>(kR);
  const Mat3 jl = jl_so3(w);
  return {exp_so3(w), jl * xi.segment<3>(kV), jl * xi.segment<3>(kP)};
}

/// Principal logarithm; throws BranchError when the rotation angle is within
/// kBranchEpsilon of pi.
inline Tangent log_se23(const GroupElement& x) {
  const Vec3 w = log_so3(x.R);
  const Mat3 sl = s_l(w);
  return make_tangent(sl * x.p, sl * x.v, w);
}

/// Left-invariant error reference^-1 * state, written component-wise.
inline GroupElement left_error(const GroupElement& reference, const GroupElement& state) {
  const Mat3 rt = reference.R.transpose();
  return {rt * state.R, rt * (state.v - reference.v), rt * (state.p - reference.p)};
}

/// Matrix of the map xi -> vee9(X^-1 wedge(xi) X), i.e. conjugation by the inverse.
/// In the usual notation this is Ad_{X^-1}.
inline Mat9 adjoint(const GroupElement& x) {
  const Mat3 rt = x.R.transpose();
  Mat9 a = Mat9::Zero();
  a.block<3, 3>(kP, kP) = rt;
  a.block<3, 3>(kV, kV) = rt;
  a.block<3, 3>(kR, kR) = rt;
  a.block<3, 3>(kP, kR) = -rt * hat(x.p);
  a.block<3, 3>(kV, kR) = -rt * hat(x.v);
  return a;
}

/// ad_xi zeta = vee9([wedge(xi), wedge(zeta)]).
inline Mat9 ad_small(const Tangent& xi) {
  const Mat3 w = hat(xi.segment<3>(kR));
  Mat9 a = Mat9::Zero();
  a.block<3, 3>(kP, kP) = w;
  a.block<3, 3>(kV, kV) = w;
  a.block<3, 3>(kR, kR) = w;
  a.block<3, 3>(kP, kR) = hat(xi.segment<3>(kP));
  a.block<3, 3>(kV, kR) = hat(xi.segment<3>(kV));
  return a;
}

/// The constant 5x5 matrix coupling the velocity column into the position column.
inline Mat5 c_matrix() {
  Mat5 c = Mat5::Zero();
  c(3, 4) = 1.0;
  return c;
}

/// vee9([wedge(xi), C]) = (xi_v, 0, 0).
inline Tangent c_commutator(const Tangent& xi) {
  Tangent out = Tangent::Zero();
  out.segment<3>(kP) = xi.segment<3>(kV);
  return out;
}

/// Off-diagonal (translation, rotation) block of the SE_2(3) left Jacobian for
/// a translation-like component rho and rotation w:
///   int_0^1 hat(s J_l(s w) rho) exp(s hat(w)) ds.
/// Same closed form as the SE(3) coupling block since the algebra brackets
/// p and v identically.
inline Mat3 jacobian_coupling(const Vec3& rho, const Vec3& w) {
  const So3Coefficients k = so3_coefficients(w.norm());
  const Mat3 P = hat(rho);
  const Mat3 W = hat(w);
  const Mat3 WP = W * P;
  const Mat3 PW = P * W;
  const Mat3 WPW = WP * W;
  return 0.5 * P + k.sinc3 * (WP + PW + WPW) + k.qa2 * (W * WP + PW * W - 3.0 * WPW) +
         k.qa3 * (WPW * W + W * WPW);
}

/// Inverse of the left Jacobian J_l(xi) = sum_k (ad_xi)^k / (k+1)!.
/// Block upper-triangular in [p, v, w]:
///   [ S   0   -S Q(p) S ]
///   [ 0   S   -S Q(v) S ]
///   [ 0   0    S        ]
/// with S = S_l(xi_r) and Q(.) = jacobian_coupling(., xi_r).
inline Mat9 jl_inv_se23(const Tangent& xi) {
  const Vec3 w = xi.segment<3>(kR);
  if (w.norm() >= std::numbers::pi - kBranchEpsilon) {
    throw DomainError("jl_inv_se23: rotation part outside the principal branch");
  }
  const Mat3 s = s_l(w);
  Mat9 j = Mat9::Zero();
  j.block<3, 3>(kP, kP) = s;
  j.block<3, 3>(kV, kV) = s;
  j.block<3, 3>(kR, kR) = s;
  j.block<3, 3>(kP, kR) = -s * jacobian_coupling(xi.segment<3>(kP), w) * s;
  j.block<3, 3>(kV, kR) = -s * jacobian_coupling(xi.segment<3>(kV), w) * s;
  return j;
}

/// Inverse of the right Jacobian J_r(xi) = sum_k (-ad_xi)^k / (k+1)!; the map
/// such that log(exp(xi) exp(eps zeta)) = xi + eps jr_inv_se23(xi) zeta + O(eps^2).
inline Mat9 jr_inv_se23(const Tangent& xi) { return jl_inv_se23(-xi); }

}  // namespace se23ctl
