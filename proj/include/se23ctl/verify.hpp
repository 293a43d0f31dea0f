#pragma once

// Oracle-backed property suites shared by `se23ctl verify` and the acceptance
// binary. Each property reports a measured value against a threshold.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "se23ctl/log_error.hpp"
#include "se23ctl/scenario.hpp"
#include "se23ctl/se23.hpp"
#include "se23ctl/simulation.hpp"
#include "se23ctl/so3.hpp"
#include "se23ctl/stability.hpp"
#include "se23ctl/testing/lemma1.hpp"
#include "se23ctl/testing/oracles.hpp"

namespace se23ctl::verify {

enum class Compare { kBelow, kAtLeast, kEqual };

struct PropertyResult {
  std::string suite;
  std::string name;
  bool pass = false;
  double value = 0.0;
  double threshold = 0.0;
  Compare compare = Compare::kBelow;
  std::string detail;
};

struct SuiteResult {
  std::string suite;
  std::vector<PropertyResult> properties;
  double seconds = 0.0;
  bool pass() const {
    return std::all_of(properties.begin(), properties.end(),
                       [](const PropertyResult& p) { return p.pass; });
  }
};

inline PropertyResult require_below(std::string suite, std::string name, double value, double threshold,
                            std::string detail = {}) {
  return {std::move(suite), std::move(name), value < threshold, value, threshold, Compare::kBelow,
          std::move(detail)};
}

inline PropertyResult require_at_least(std::string suite, std::string name, double value,
                               double threshold, std::string detail = {}) {
  return {std::move(suite), std::move(name), value >= threshold, value, threshold,
          Compare::kAtLeast, std::move(detail)};
}

inline PropertyResult require_equal(std::string suite, std::string name, double value, double expected,
                            std::string detail = {}) {
  return {std::move(suite), std::move(name), value == expected, value, expected, Compare::kEqual,
          std::move(detail)};
}

inline double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

template <typename Fn>
SuiteResult timed(const std::string& suite, Fn&& body) {
  const auto start = std::chrono::steady_clock::now();
  SuiteResult r{suite, body(), 0.0};
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

// ---------------------------------------------------------------------------

/// SO(3) kernels against quadrature of their defining integrals, 1000 samples
/// with |w| <= 3, plus closed-form/series agreement around the switch angle.
inline SuiteResult so3_suite(std::uint64_t seed, int samples = 1000) {
  return timed("so3", [&] {
    std::mt19937_64 rng(seed);
    double jl = 0, jr = 0, sl = 0, sr = 0, qr = 0, ql = 0, roundtrip = 0;
    for (int i = 0; i < samples; ++i) {
      const Vec3 w = oracle::random_in_ball(rng, 3.0);
      const Mat3 jl_ref = oracle::jl_integral(w);
      const Mat3 jr_ref = oracle::jl_integral(-w);
      jl = std::max(jl, max_abs(jl_so3(w) - jl_ref));
      jr = std::max(jr, max_abs(jr_so3(w) - jr_ref));
      sl = std::max(sl, max_abs(s_l(w) * jl_ref - Mat3::Identity()));
      sr = std::max(sr, max_abs(s_r(w) * jr_ref - Mat3::Identity()));
      qr = std::max(qr, max_abs(q_r(w) - oracle::qr_integral(w)));
      ql = std::max(ql, max_abs(q_l(w) - oracle::ql_integral(w)));
      roundtrip = std::max(roundtrip, (log_so3(exp_so3(w)) - w).norm());
    }
    // Kernel-level gap: each coefficient multiplies a power of W of size theta^k.
    double sw = 0.0;
    for (int i = 0; i <= 100; ++i) {
      const double t = kThetaSwitch * (0.5 + 1.5 * i / 100.0);
      const So3Coefficients c = closed_form_coefficients(t);
      const So3Coefficients s = series_coefficients(t);
      const double t2 = t * t;
      sw = std::max({sw, std::abs(c.sinc - s.sinc) * t, std::abs(c.cosc - s.cosc) * t,
                     std::abs(c.sinc3 - s.sinc3) * t2, std::abs(c.inv2 - s.inv2) * t2,
                     std::abs(c.q1 - s.q1) * t, std::abs(c.q2 - s.q2) * t2,
                     std::abs(c.qa2 - s.qa2) * t2, std::abs(c.qa3 - s.qa3) * t2 * t});
    }
    const std::string n = std::to_string(samples) + " samples, |w| <= 3";
    return std::vector<PropertyResult>{
        require_below("so3", "jl_vs_quadrature", jl, 1e-8, n),
        require_below("so3", "jr_vs_quadrature", jr, 1e-8, n),
        require_below("so3", "sl_inverts_jl", sl, 1e-8, n),
        require_below("so3", "sr_inverts_jr", sr, 1e-8, n),
        require_below("so3", "qr_vs_quadrature", qr, 1e-8, n),
        require_below("so3", "ql_vs_quadrature", ql, 1e-8, n),
        require_below("so3", "exp_log_roundtrip", roundtrip, 1e-9, n),
        require_below("so3", "branch_switch_continuity", sw, 1e-10, "theta in [0.5, 2] * theta_switch"),
    };
  });
}

/// Fitted order of |log(exp(xi) exp(eps zeta)) - xi - eps J_r^-1(xi) zeta| in eps.
inline double bch_order(const Tangent& xi, const Tangent& zeta) {
  std::vector<double> eps, err;
  for (double e : {1e-2, 1e-3, 1e-4, 1e-5}) {
    const Tangent lhs = log_se23(compose(exp_se23(xi), exp_se23(e * zeta)));
    eps.push_back(e);
    err.push_back((lhs - xi - e * jr_inv_se23(xi) * zeta).norm());
  }
  return oracle::fitted_order(eps, err);
}

inline SuiteResult se23_suite(std::uint64_t seed) {
  return timed("se23", [&] {
    std::mt19937_64 rng(seed + 1);
    double roundtrip = 0, jl = 0, jr = 0, adj = 0, bracket = 0;
    int mirror_mismatch = 0, cterm_mismatch = 0;
    for (int i = 0; i < 1000; ++i) {
      const Tangent xi = oracle::random_tangent(rng, 2.0, std::numbers::pi - 0.1);
      roundtrip = std::max(roundtrip, (log_se23(exp_se23(xi)) - xi).norm());
    }
    for (int i = 0; i < 500; ++i) {
      const Tangent xi = oracle::random_tangent(rng, 1.0, 2.0);
      jl = std::max(jl, max_abs(oracle::jacobian_series(xi, 1.0) * jl_inv_se23(xi) -
                                Mat9::Identity()));
      jr = std::max(jr, max_abs(oracle::jacobian_series(xi, -1.0) * jr_inv_se23(xi) -
                                Mat9::Identity()));
      if (jr_inv_se23(xi) != jl_inv_se23(-xi)) ++mirror_mismatch;
      const Mat5 a = oracle::algebra(xi);
      const Mat5 c = c_matrix();
      if (c_commutator(xi) != oracle::coordinates(a * c - c * a)) ++cterm_mismatch;
      Tangent expected = Tangent::Zero();
      expected.segment<3>(kP) = xi.segment<3>(kV);
      if (c_commutator(xi) != expected) ++cterm_mismatch;
      bracket = std::max(bracket, max_abs(ad_small(xi) - oracle::bracket_matrix(xi)));
      const GroupElement x = oracle::random_element(rng);
      adj = std::max(adj, max_abs(adjoint(x) - oracle::conjugation_matrix(x)));
    }
    double order = 1e9;
    for (int i = 0; i < 20; ++i) {
      const Tangent xi = oracle::random_tangent(rng, 0.8, 1.5);
      const Tangent zeta = oracle::random_tangent(rng, 1.0, 1.0);
      order = std::min(order, bch_order(xi, zeta));
    }
    return std::vector<PropertyResult>{
        require_below("se23", "exp_log_roundtrip", roundtrip, 1e-9, "1000 samples, |xi_r| <= pi - 0.1"),
        require_below("se23", "jl_inv_times_series", jl, 1e-8, "500 samples, |xi_r| <= 2"),
        require_below("se23", "jr_inv_times_series", jr, 1e-8, "500 samples, |xi_r| <= 2"),
        require_equal("se23", "mirror_identity_mismatches", mirror_mismatch, 0, "bitwise"),
        require_below("se23", "ad_vs_dense_bracket", bracket, 1e-13),
        require_below("se23", "adjoint_vs_conjugation", adj, 1e-10),
        require_equal("se23", "c_term_mismatches", cterm_mismatch, 0, "bitwise vs dense [xi^, C]"),
        require_at_least("se23", "bch_min_order", order, 1.9, "20 pairs, eps 1e-2..1e-5"),
    };
  });
}

inline SuiteResult lemma1_suite(std::uint64_t seed, int trials = 20) {
  return timed("lemma1", [&] {
    std::mt19937_64 rng(seed + 2);
    double order = 1e9, residual = 0.0, max_norm = 0.0;
    for (int i = 0; i < trials; ++i) {
      const oracle::Lemma1Trial t = oracle::run_lemma1_trial(oracle::random_lemma1_setup(rng, 1.0));
      order = std::min(order, t.order);
      residual = std::max(residual, t.residuals.back());
      max_norm = std::max(max_norm, t.error_norm);
    }
    const std::string d = std::to_string(trials) + " trials, |xi(0)| <= 1, max |xi| at probe " +
                          std::to_string(max_norm);
    return std::vector<PropertyResult>{
        require_at_least("lemma1", "fd_min_order", order, 1.9, d),
        require_below("lemma1", "fd_residual_at_smallest_step", residual, 1e-4, d),
    };
  });
}

inline ScenarioConfig hover_recovery_config(double kr = 60.0) {
  ScenarioConfig c;
  c.name = "hover_recovery";
  c.gains.kr = kr * Mat3::Identity();
  c.initial(kP) = 1.0;
  return c;
}

inline SuiteResult closedloop_suite(std::uint64_t /*seed*/) {
  return timed("closedloop", [&] {
    std::vector<PropertyResult> out;
    const ScenarioConfig cfg = hover_recovery_config();
    const StabilityReport rep = gain_condition_check(cfg.gains, 9.81);
    out.push_back(require_below("closedloop", "gain_margin_60I", std::abs(rep.margin - 11.88), 5e-3,
                        "margin " + std::to_string(rep.margin)));
    out.push_back(require_below("closedloop", "alpha_60I", std::abs(rep.alpha - 0.5), 1e-15));

    const TrajectoryLog log = run_closed_loop(cfg);
    out.push_back(require_below("closedloop", "hover_envelope_worst_ratio", log.envelope.worst_ratio,
                        1.0 + cfg.envelope_tolerance,
                        "V(0)=" + std::to_string(log.lyapunov.front()) + ", measured exponent " +
                            std::to_string(log.envelope.measured_exponent)));

    const Mat9 a = closed_loop_error_matrix(cfg.gains, Vec3::Zero(), 9.81, Vec3::UnitZ());
    Tangent x0 = Tangent::Zero();
    x0(0) = 1.0;
    const std::size_t n = cfg.steps();
    const std::vector<double> v = linear_error_lyapunov(a, x0, cfg.timestep, n);
    std::vector<double> t(n + 1);
    for (std::size_t k = 0; k <= n; ++k) t[k] = k * cfg.timestep;
    const EnvelopeResult lin = envelope_check(t, v, rep.alpha, 1e-3);
    out.push_back(require_below("closedloop", "linear_envelope_worst_ratio", lin.worst_ratio, 1.0 + 1e-3,
                        "xi_p(0) = (1,0,0), e_v = e_r = 0"));

    const StabilityReport bad = gain_condition_check(hover_recovery_config(40.0).gains, 9.81);
    out.push_back(require_equal("closedloop", "violating_40I_flagged", bad.condition_holds ? 0.0 : 1.0,
                        1.0, "margin " + std::to_string(bad.margin)));

    ScenarioConfig eq = cfg;
    eq.initial.setZero();
    const TrajectoryLog still = run_closed_loop(eq);
    double drift = 0.0;
    for (const Tangent& xi : still.xi) drift = std::max(drift, xi.norm());
    out.push_back(require_below("closedloop", "hover_equilibrium_drift", drift, 1e-10,
                        std::to_string(still.steps) + " steps"));
    return out;
  });
}

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"so3", "se23", "lemma1", "closedloop"};
  return names;
}

inline SuiteResult run_suite(const std::string& name, std::uint64_t seed) {
  if (name == "so3") return so3_suite(seed);
  if (name == "se23") return se23_suite(seed);
  if (name == "lemma1") return lemma1_suite(seed);
  if (name == "closedloop") return closedloop_suite(seed);
  throw InvalidArgument("unknown suite '" + name + "'");
}

}  // namespace se23ctl::verify
