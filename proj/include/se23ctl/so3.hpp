#pragma once

// Rotation-group primitives: hat/vee, exp/log, the left/right Jacobians and
// their inverses, and the translation kernels Q_r, Q_l.
//
// Every closed form is written as I + a(theta) W + b(theta) W^2 with W = hat(w).
// Below kThetaSwitch the coefficients come from Taylor series (through theta^4)
// instead of the trigonometric expressions, which are 0/0 at the origin.

#include <cmath>
#include <numbers>

#include <Eigen/Core>
#include <Eigen/Dense>

#include "se23ctl/errors.hpp"

namespace se23ctl {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Rotation = Eigen::Matrix3d;

inline constexpr double kThetaSwitch = 1e-4;
/// Distance from angle pi at which the principal logarithm is refused.
inline constexpr double kBranchEpsilon = 1e-6;
inline constexpr double kSkewTolerance = 1e-9;

enum class Side { kLeft, kRight };

/// Scalar coefficients shared by the SO(3) closed forms, all functions of theta = |w|.
struct So3Coefficients {
  double sinc = 1.0;        // sin(t)/t                         (exp)
  double cosc = 0.5;        // (1-cos t)/t^2                    (exp, J_l)
  double sinc3 = 1.0 / 6;   // (t-sin t)/t^3                    (J_l)
  double inv2 = 1.0 / 12;   // 1/t^2 - (1+cos t)/(2 t sin t)    (S_l)
  double q1 = 1.0 / 3;      // (sin t - t cos t)/t^3            (Q_r)
  double q2 = 1.0 / 8;      // 1/(2t^2) - sin t/t^3 - (cos t-1)/t^4 (Q_r)
  double qa2 = 1.0 / 24;    // (t^2 + 2cos t - 2)/(2t^4)       (SE_2(3) Jacobian coupling)
  double qa3 = 1.0 / 120;   // (2t - 3 sin t + t cos t)/(2t^5)  (SE_2(3) Jacobian coupling)
};

/// Trigonometric evaluation. Uses 1 - cos t = 2 sin^2(t/2) and the half-angle
/// cotangent so that the only pole left is the genuine one of S_l at t = 2 pi.
inline So3Coefficients closed_form_coefficients(double t) {
  const double s = std::sin(t);
  const double c = std::cos(t);
  const double sh = std::sin(0.5 * t);
  const double one_minus_cos = 2.0 * sh * sh;
  const double t2 = t * t;
  const double t3 = t2 * t;
  const double t4 = t2 * t2;
  So3Coefficients k;
  k.sinc = s / t;
  k.cosc = one_minus_cos / t2;
  k.sinc3 = (t - s) / t3;
  k.inv2 = 1.0 / t2 - std::cos(0.5 * t) / (2.0 * t * sh);
  k.q1 = (s - t * c) / t3;
  k.q2 = (0.5 * t2 - t * s + one_minus_cos) / t4;
  k.qa2 = (t2 - 2.0 * one_minus_cos) / (2.0 * t4);
  k.qa3 = (2.0 * t - 3.0 * s + t * c) / (2.0 * t4 * t);
  return k;
}

inline So3Coefficients series_coefficients(double t) {
  const double t2 = t * t;
  const double t4 = t2 * t2;
  So3Coefficients k;
  k.sinc = 1.0 - t2 / 6.0 + t4 / 120.0;
  k.cosc = 0.5 - t2 / 24.0 + t4 / 720.0;
  k.sinc3 = 1.0 / 6.0 - t2 / 120.0 + t4 / 5040.0;
  k.inv2 = 1.0 / 12.0 + t2 / 720.0 + t4 / 30240.0;
  k.q1 = 1.0 / 3.0 - t2 / 30.0 + t4 / 840.0;
  k.q2 = 1.0 / 8.0 - t2 / 144.0 + t4 / 5760.0;
  k.qa2 = 1.0 / 24.0 - t2 / 720.0 + t4 / 40320.0;
  k.qa3 = 1.0 / 120.0 - t2 / 2520.0 + t4 / 120960.0;
  return k;
}

inline So3Coefficients so3_coefficients(double theta) {
  return theta < kThetaSwitch ? series_coefficients(theta) : closed_form_coefficients(theta);
}

inline Mat3 hat(const Vec3& w) {
  Mat3 m;
  m << 0.0, -w.z(), w.y(),
       w.z(), 0.0, -w.x(),
       -w.y(), w.x(), 0.0;
  return m;
}

/// Inverse of hat. Rejects matrices whose symmetric part exceeds kSkewTolerance.
inline Vec3 vee(const Mat3& m) {
  if ((m + m.transpose()).cwiseAbs().maxCoeff() > 2.0 * kSkewTolerance) {
    throw InvalidArgument("vee: matrix is not skew-symmetric");
  }
  const Mat3 k = 0.5 * (m - m.transpose());
  return {k(2, 1), k(0, 2), k(1, 0)};
}

inline bool is_rotation(const Mat3& r, double tol = 1e-9) {
  return (r.transpose() * r - Mat3::Identity()).norm() <= tol &&
         std::abs(r.determinant() - 1.0) <= tol;
}

inline Rotation exp_so3(const Vec3& w) {
  const So3Coefficients k = so3_coefficients(w.norm());
  const Mat3 W = hat(w);
  return Mat3::Identity() + k.sinc * W + k.cosc * W * W;
}

/// Principal logarithm, |result| <= pi. Throws BranchError within
/// kBranchEpsilon of angle pi, where the axis sign is not determined.
inline Vec3 log_so3(const Rotation& r) {
  const Vec3 axial{r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1)};
  const double s = 0.5 * axial.norm();               // sin(theta)
  const double c = 0.5 * (r.trace() - 1.0);          // cos(theta)
  const double theta = std::atan2(s, c);
  if (std::numbers::pi - theta < kBranchEpsilon) {
    throw BranchError("log_so3: rotation angle within branch tolerance of pi");
  }
  if (theta < kThetaSwitch) {
    // theta / sin(theta) = 1 + theta^2/6 + 7 theta^4/360
    const double t2 = theta * theta;
    return 0.5 * (1.0 + t2 / 6.0 + 7.0 * t2 * t2 / 360.0) * axial;
  }
  if (c > -0.9) {
    return (0.5 * theta / s) * axial;
  }
  // Near pi the antisymmetric part is small; take the axis from the symmetric
  // part (1 - cos) a a^T and the sign from the antisymmetric part.
  const Mat3 aat = (0.5 * (r + r.transpose()) - c * Mat3::Identity()) / (1.0 - c);
  Eigen::Index i = 0;
  aat.diagonal().maxCoeff(&i);
  Vec3 a = aat.col(i) / std::sqrt(aat(i, i));
  if (a.dot(axial) < 0.0) a = -a;
  return theta * a.normalized();
}

/// Left Jacobian J_l(w) = int_0^1 exp(s W) ds.
inline Mat3 jl_so3(const Vec3& w) {
  const So3Coefficients k = so3_coefficients(w.norm());
  const Mat3 W = hat(w);
  return Mat3::Identity() + k.cosc * W + k.sinc3 * W * W;
}

inline Mat3 jr_so3(const Vec3& w) { return jl_so3(-w); }

/// Inverse left Jacobian S_l. Finite for |w| < 2 pi; the printed expression's
/// apparent singularity at pi is removable and handled by the half-angle form.
inline Mat3 s_l(const Vec3& w) {
  const double theta = w.norm();
  if (theta >= 2.0 * std::numbers::pi - kBranchEpsilon) {
    throw DomainError("s_l: |w| at or beyond the 2*pi pole");
  }
  const So3Coefficients k = so3_coefficients(theta);
  const Mat3 W = hat(w);
  return Mat3::Identity() - 0.5 * W + k.inv2 * W * W;
}

inline Mat3 s_r(const Vec3& w) { return s_l(-w); }

/// Q_r(w) = int_0^1 s exp(s W) ds.
inline Mat3 q_r(const Vec3& w) {
  const So3Coefficients k = so3_coefficients(w.norm());
  const Mat3 W = hat(w);
  return 0.5 * Mat3::Identity() + k.q1 * W + k.q2 * W * W;
}

/// Q_l(w) = int_0^1 (1 - s) exp(s W) ds, formed from its defining relation J_l - Q_r.
inline Mat3 q_l(const Vec3& w) { return jl_so3(w) - q_r(w); }

/// Tensor map Q(w; x) = (Q(w) x)^, equal to int_0^1 alpha(s) R(s) x^ R(s)^T ds
/// with alpha = s (right) or 1 - s (left).
inline Mat3 q_tensor(const Vec3& w, const Vec3& x, Side side) {
  return hat((side == Side::kRight ? q_r(w) : q_l(w)) * x);
}

}  // namespace se23ctl
