#pragma once

// Gain condition, quadratic Lyapunov function and decay-envelope checks for
// the backstepping error system
//
//   d/dt xi_p = -hat(w) xi_p - K_p xi_p + e_v
//   d/dt e_v  = -hat(w) e_v  - K_v e_v  + B e_r,    B = -T hat(e_T)
//   d/dt e_r  = -hat(w) e_r  - K_r e_r
//
// The condition lambda_min(K_r) > |B|^2 / (2 lambda_min(K_v)) yields the rate
//   alpha = min{kp/2, kv/2, kr - |B|^2/(2 kv)}
// and the envelope V(t) <= V(0) exp(-2 alpha t).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "se23ctl/gains.hpp"
#include "se23ctl/se23.hpp"
#include "se23ctl/so3.hpp"

namespace se23ctl {

struct StabilityReport {
  double kappa_p = 0.0;
  double kappa_v = 0.0;
  double kappa_r = 0.0;
  double b_norm = 0.0;      // spectral norm of -T hat(e_T), = T for unit e_T
  double margin = 0.0;      // kappa_r - |B|^2 / (2 kappa_v)
  double alpha = 0.0;
  bool condition_holds = false;
};

/// `thrust_ref_max` is the largest reference thrust over the horizon.
inline StabilityReport gain_condition_check(const Gains& gains, double thrust_ref_max) {
  validate_gains(gains);
  if (!(thrust_ref_max >= 0.0)) throw InvalidArgument("thrust_ref_max must be >= 0");
  StabilityReport r;
  r.kappa_p = min_eigenvalue(gains.kp);
  r.kappa_v = min_eigenvalue(gains.kv);
  r.kappa_r = min_eigenvalue(gains.kr);
  r.b_norm = thrust_ref_max;
  r.margin = r.kappa_r - r.b_norm * r.b_norm / (2.0 * r.kappa_v);
  r.alpha = std::min({0.5 * r.kappa_p, 0.5 * r.kappa_v, r.margin});
  r.condition_holds = r.margin > 0.0;
  return r;
}

inline double lyapunov_value(const Vec3& xi_p, const Vec3& e_v, const Vec3& e_r) {
  return 0.5 * (xi_p.squaredNorm() + e_v.squaredNorm() + e_r.squaredNorm());
}

/// |x^T hat(w) x|, zero up to rounding for every w, x.
inline double skew_quadratic_residual(const Vec3& w, const Vec3& x) {
  return std::abs(x.dot(hat(w) * x));
}

struct EnvelopeResult {
  bool applicable = false;   // false when alpha <= 0 (condition violated)
  bool pass = false;
  double worst_ratio = 0.0;  // max_t V(t) / (V(0) exp(-2 alpha t))
  double worst_time = 0.0;
  double measured_exponent = 0.0;  // least-squares slope of -log V
  std::size_t violations = 0;
  std::size_t samples = 0;         // rows checked
};

/// Checks V(t) <= V(0) exp(-2 alpha t) (1 + tol) at every sample.
inline EnvelopeResult envelope_check(std::span<const double> t, std::span<const double> v,
                                     double alpha, double tol) {
  EnvelopeResult r;
  if (t.size() != v.size()) throw InvalidArgument("envelope_check: length mismatch");
  if (!(alpha > 0.0)) return r;
  r.applicable = true;
  r.samples = v.size();
  if (v.empty() || v[0] == 0.0) {
    r.pass = std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
    return r;
  }
  const double v0 = v[0];
  const double t0 = t[0];
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double bound = v0 * std::exp(-2.0 * alpha * (t[i] - t0));
    const double ratio = v[i] / bound;
    if (ratio > r.worst_ratio) {
      r.worst_ratio = ratio;
      r.worst_time = t[i];
    }
    if (v[i] > bound * (1.0 + tol)) ++r.violations;
    // Fit only above the rounding floor of the simulation.
    if (v[i] > v0 * 1e-24) {
      const double y = std::log(v[i]);
      sx += t[i];
      sy += y;
      sxx += t[i] * t[i];
      sxy += t[i] * y;
      ++n;
    }
  }
  if (n >= 2) {
    const double denom = n * sxx - sx * sx;
    if (denom > 0.0) r.measured_exponent = -(n * sxy - sx * sy) / denom;
  }
  r.pass = r.violations == 0;
  return r;
}

// ---------------------------------------------------------------------------
// Closed-loop linear error system in (xi_p, e_v, e_r), constant reference.

inline Mat9 closed_loop_error_matrix(const Gains& gains, const Vec3& omega_ref,
                                     double thrust_ref, const Vec3& thrust_axis) {
  const Mat3 w = hat(omega_ref);
  Mat9 a = Mat9::Zero();
  a.block<3, 3>(0, 0) = -w - gains.kp;
  a.block<3, 3>(0, 3) = Mat3::Identity();
  a.block<3, 3>(3, 3) = -w - gains.kv;
  a.block<3, 3>(3, 6) = -thrust_ref * hat(thrust_axis);
  a.block<3, 3>(6, 6) = -w - gains.kr;
  return a;
}

/// Lyapunov samples of the linear error system from x0, classical RK4 with step h.
inline std::vector<double> linear_error_lyapunov(const Mat9& a, const Tangent& x0, double h,
                                                 std::size_t steps) {
  std::vector<double> v;
  v.reserve(steps + 1);
  Tangent x = x0;
  auto value = [](const Tangent& s) { return 0.5 * s.squaredNorm(); };
  v.push_back(value(x));
  for (std::size_t i = 0; i < steps; ++i) {
    const Tangent k1 = a * x;
    const Tangent k2 = a * (x + 0.5 * h * k1);
    const Tangent k3 = a * (x + 0.5 * h * k2);
    const Tangent k4 = a * (x + h * k3);
    x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    v.push_back(value(x));
  }
  return v;
}

}  // namespace se23ctl
