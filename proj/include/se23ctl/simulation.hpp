#pragma once

// Closed-loop driver: reference, error, controller and plant on a uniform grid.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "se23ctl/controller.hpp"
#include "se23ctl/dynamics.hpp"
#include "se23ctl/log_error.hpp"
#include "se23ctl/scenario.hpp"
#include "se23ctl/stability.hpp"

namespace se23ctl {

/// A controller failure mid-run, with the step index and the state at that step.
class SimulationAborted : public std::runtime_error {
 public:
  SimulationAborted(std::size_t step, double time, const GroupElement& state, const Tangent& xi,
                    const std::string& cause)
      : std::runtime_error(describe(step, time, xi, cause)),
        step_(step),
        time_(time),
        state_(state),
        xi_(xi),
        cause_(cause) {}
  std::size_t step() const noexcept { return step_; }
  double time() const noexcept { return time_; }
  const GroupElement& state() const noexcept { return state_; }
  const Tangent& error() const noexcept { return xi_; }
  const std::string& cause() const noexcept { return cause_; }

 private:
  static std::string describe(std::size_t step, double time, const Tangent& xi,
                              const std::string& cause) {
    std::ostringstream os;
    os.precision(17);
    os << "aborted at step " << step << " (t=" << time << "): " << cause << "; xi = ["
       << xi.transpose() << "]";
    return os.str();
  }
  std::size_t step_;
  double time_;
  GroupElement state_;
  Tangent xi_;
  std::string cause_;
};

struct TrajectoryLog {
  std::vector<double> t;
  std::vector<GroupElement> state;
  std::vector<GroupElement> reference;
  std::vector<Tangent> xi;
  std::vector<BacksteppingErrors> errors;
  std::vector<ControlInput> input;
  std::vector<double> lyapunov;
  std::vector<double> bound;       // V(0) exp(-2 alpha t); NaN when alpha <= 0
  std::vector<bool> saturated;

  double thrust_ref_max = 0.0;
  StabilityReport stability;
  EnvelopeResult envelope;
  std::size_t steps = 0;           // integration steps taken

  std::size_t size() const { return t.size(); }
};

inline ReferenceSample scenario_reference(double t, const ScenarioConfig& cfg) {
  ReferenceSample ref = reference(t, cfg.trajectory, cfg.environment);
  if (cfg.disturbance.active_at(t)) ref.gravity_offset = cfg.disturbance.gravity_offset;
  return ref;
}

inline double max_reference_thrust(const ScenarioConfig& cfg) {
  double best = 0.0;
  const std::size_t n = cfg.steps();
  for (std::size_t k = 0; k <= n; ++k) {
    best = std::max(best, reference(k * cfg.timestep, cfg.trajectory, cfg.environment).thrust);
  }
  return best;
}

/// Runs the scenario. Rows are logged every `log_stride` steps plus the final
/// step. The envelope is checked on the logged rows before any disturbance
/// switches on.
inline TrajectoryLog run_closed_loop(const ScenarioConfig& cfg) {
  validate_scenario(cfg);
  TrajectoryLog log;
  log.thrust_ref_max = max_reference_thrust(cfg);
  log.stability = gain_condition_check(cfg.gains, log.thrust_ref_max);
  const double alpha = log.stability.alpha;

  const std::size_t n = cfg.steps();
  const double h = cfg.timestep;
  GroupElement x = compose(reference(0.0, cfg.trajectory, cfg.environment).X,
                           cfg.initial_error_element());
  ControllerState state;
  double v0 = 0.0;
  for (std::size_t k = 0; k <= n; ++k) {
    const double t = k * h;
    const ReferenceSample ref = scenario_reference(t, cfg);
    Environment plant = cfg.environment;
    plant.gravity += ref.gravity_offset;

    Tangent xi;
    ControlOutput out;
    try {
      xi = error_state(ref.X, x);
      out = control_step(xi, ref, cfg.environment, cfg.gains, state, h, cfg.controller);
    } catch (const std::exception& e) {
      throw SimulationAborted(k, t, x, xi, e.what());
    }
    state = out.state;
    if (k == 0) v0 = out.diagnostics.lyapunov;

    if (k % cfg.log_stride == 0 || k == n) {
      log.t.push_back(t);
      log.state.push_back(x);
      log.reference.push_back(ref.X);
      log.xi.push_back(xi);
      log.errors.push_back(out.diagnostics.errors);
      log.input.push_back(out.u);
      log.lyapunov.push_back(out.diagnostics.lyapunov);
      log.bound.push_back(alpha > 0.0 ? v0 * std::exp(-2.0 * alpha * t)
                                      : std::numeric_limits<double>::quiet_NaN());
      log.saturated.push_back(out.diagnostics.saturated);
    }
    if (k < n) {
      try {
        x = step(x, out.u, plant, h);
      } catch (const std::exception& e) {
        throw SimulationAborted(k, t, x, xi, e.what());
      }
      if (!x.p.allFinite() || !x.v.allFinite() || !x.R.allFinite()) {
        throw SimulationAborted(k, t, x, xi, "plant state became non-finite");
      }
      ++log.steps;
    }
  }
  std::size_t checked = log.size();
  if (!cfg.disturbance.gravity_offset.isZero(0.0)) {
    checked = static_cast<std::size_t>(
        std::lower_bound(log.t.begin(), log.t.end(), cfg.disturbance.start_time) - log.t.begin());
  }
  log.envelope = envelope_check(std::span<const double>(log.t.data(), checked),
                                std::span<const double>(log.lyapunov.data(), checked), alpha,
                                cfg.envelope_tolerance);
  return log;
}

}  // namespace se23ctl
