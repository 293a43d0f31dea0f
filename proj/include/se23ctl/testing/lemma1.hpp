#pragma once

// Trajectory finite-difference oracle for the log-error vector field.
// Plant and reference run under the mixed-invariant model with different
// constant inputs (and gravity); the centred difference of Log(Xref^-1 X) is
// compared with error_rhs over a sweep of difference steps.

#include <cmath>
#include <random>
#include <vector>

#include "se23ctl/dynamics.hpp"
#include "se23ctl/log_error.hpp"
#include "se23ctl/testing/oracles.hpp"

namespace se23ctl::oracle {

struct Lemma1Trial {
  double initial_error_norm = 0.0;
  double error_norm = 0.0;        // |xi| at the evaluation time
  std::vector<double> deltas;
  std::vector<double> residuals;  // |centred difference - error_rhs|
  double order = 0.0;             // least-squares slope of log residual vs log delta
};

struct Lemma1Setup {
  GroupElement reference0;
  Tangent xi0 = Tangent::Zero();
  ControlInput reference_input;
  ControlInput plant_input;
  Environment reference_env;
  Environment plant_env;
};

inline Lemma1Setup random_lemma1_setup(std::mt19937_64& rng, double max_error_norm) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Lemma1Setup s;
  s.reference0 = random_element(rng);
  Tangent dir = random_tangent(rng, 1.0, 1.0);
  s.xi0 = max_error_norm * std::max(u(rng), 0.2) * dir.normalized();
  s.reference_input = {5.0 + 10.0 * u(rng), random_vec3(rng, 0.5)};
  s.plant_input = {s.reference_input.thrust + 6.0 * (u(rng) - 0.5),
                   s.reference_input.omega + random_vec3(rng, 0.5)};
  s.plant_env.gravity = s.reference_env.gravity + random_vec3(rng, 0.5);
  return s;
}

inline double fitted_order(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

/// Centred difference about t = `horizon` for each step d: both systems are
/// integrated to horizon - d, then advanced by two steps of size d.
inline Lemma1Trial run_lemma1_trial(const Lemma1Setup& s, double horizon = 0.5,
                                    const std::vector<double>& deltas = {1e-2, 5e-3, 2.5e-3,
                                                                         1.25e-3}) {
  constexpr int kSteps = 500;
  Lemma1Trial trial;
  trial.initial_error_norm = s.xi0.norm();
  const Vec3 gravity_offset = s.plant_env.gravity - s.reference_env.gravity;
  for (double d : deltas) {
    GroupElement r0 = s.reference0;
    GroupElement p0 = compose(s.reference0, exp_se23(s.xi0));
    const double h = (horizon - d) / kSteps;
    for (int i = 0; i < kSteps; ++i) {
      r0 = step(r0, s.reference_input, s.reference_env, h);
      p0 = step(p0, s.plant_input, s.plant_env, h);
    }
    const GroupElement r1 = step(r0, s.reference_input, s.reference_env, d);
    const GroupElement p1 = step(p0, s.plant_input, s.plant_env, d);
    const GroupElement r2 = step(r1, s.reference_input, s.reference_env, d);
    const GroupElement p2 = step(p1, s.plant_input, s.plant_env, d);
    const Tangent centred = (error_state(r2, p2) - error_state(r0, p0)) / (2.0 * d);
    const ReferenceSample mid{r1, s.reference_input.thrust, s.reference_input.omega,
                              gravity_offset};
    const Tangent xi = error_state(r1, p1);
    const Tangent rhs = error_rhs(xi, mid, input_deviation(s.plant_input, mid), s.plant_env);
    trial.error_norm = xi.norm();
    trial.deltas.push_back(d);
    trial.residuals.push_back((centred - rhs).norm());
  }
  trial.order = fitted_order(trial.deltas, trial.residuals);
  return trial;
}

}  // namespace se23ctl::oracle
