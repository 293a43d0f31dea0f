// se23ctl: simulate scenarios, check gains, run the oracle suites.
//
// Exit codes: 0 success, 1 a check failed or the run aborted,
// 2 usage error, 3 unreadable or invalid scenario / output path.
//
// Output lines are `KEY field=value ...`; the last line is always
// `RESULT PASS` or `RESULT FAIL reason=... [failed=a,b,...]`.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "se23ctl/se23ctl.hpp"
#include "se23ctl/verify.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kUsage = 2;
constexpr int kInput = 3;

using se23ctl::format_double;

std::string default_out(const se23ctl::ScenarioConfig& cfg) {
  const char* dir = std::getenv("SE23CTL_OUT_DIR");
  std::filesystem::path base = dir && *dir ? dir : ".";
  return (base / (cfg.name + ".csv")).string();
}

void print_stability(const se23ctl::StabilityReport& r, double thrust_ref_max) {
  std::cout << "GAINS kappa_p=" << format_double(r.kappa_p)
            << " kappa_v=" << format_double(r.kappa_v) << " kappa_r=" << format_double(r.kappa_r)
            << " thrust_ref_max=" << format_double(thrust_ref_max)
            << " b_norm=" << format_double(r.b_norm) << " margin=" << format_double(r.margin)
            << " alpha=" << format_double(r.alpha)
            << " condition=" << (r.condition_holds ? "holds" : "violated") << '\n';
}

int input_error(const std::string& what) {
  std::cout << "RESULT FAIL reason=input error=\"" << what << "\"\n";
  return kInput;
}

int cmd_simulate(const std::string& scenario, std::string out) {
  se23ctl::ScenarioConfig cfg;
  try {
    cfg = se23ctl::load_scenario(scenario);
  } catch (const se23ctl::ConfigError& e) {
    return input_error(e.what());
  }
  if (out.empty()) out = default_out(cfg);
  se23ctl::TrajectoryLog log;
  try {
    log = se23ctl::run_closed_loop(cfg);
  } catch (const se23ctl::SimulationAborted& e) {
    std::cout << "ABORT step=" << e.step() << " t=" << format_double(e.time()) << " p=["
              << e.state().p.transpose() << "] cause=\"" << e.cause() << "\"\n";
    std::cout << "RESULT FAIL reason=aborted step=" << e.step() << '\n';
    return kFailed;
  }
  try {
    se23ctl::write_log(cfg, log, out);
  } catch (const std::exception& e) {
    return input_error(e.what());
  }
  print_stability(log.stability, log.thrust_ref_max);
  const se23ctl::EnvelopeResult& env = log.envelope;
  std::cout << "RUN scenario=" << cfg.name << " rows=" << log.size() << " steps=" << log.steps
            << " final_V=" << format_double(log.lyapunov.back()) << " csv=" << out << '\n';
  std::cout << "ENVELOPE applicable=" << (env.applicable ? "true" : "false")
            << " pass=" << (env.pass ? "true" : "false")
            << " tolerance=" << format_double(cfg.envelope_tolerance)
            << " worst_ratio=" << format_double(env.worst_ratio)
            << " worst_time=" << format_double(env.worst_time)
            << " measured_exponent=" << format_double(env.measured_exponent)
            << " violations=" << env.violations << " samples=" << env.samples << '\n';
  if (env.applicable && !env.pass) {
    std::cout << "RESULT FAIL reason=envelope violations=" << env.violations << '\n';
    return kFailed;
  }
  std::cout << "RESULT PASS" << (env.applicable ? "" : " note=gain-condition-violated") << '\n';
  return kOk;
}

int cmd_check_gains(const std::string& scenario) {
  se23ctl::ScenarioConfig cfg;
  try {
    cfg = se23ctl::load_scenario(scenario);
  } catch (const se23ctl::ConfigError& e) {
    return input_error(e.what());
  }
  const double tmax = se23ctl::max_reference_thrust(cfg);
  const se23ctl::StabilityReport r = se23ctl::gain_condition_check(cfg.gains, tmax);
  print_stability(r, tmax);
  if (!r.condition_holds) {
    std::cout << "RESULT FAIL reason=gain-condition margin=" << format_double(r.margin) << '\n';
    return kFailed;
  }
  std::cout << "RESULT PASS\n";
  return kOk;
}

int cmd_verify(const std::string& suite, std::uint64_t seed) {
  std::vector<std::string> names;
  if (suite == "all") {
    names = se23ctl::verify::suite_names();
  } else {
    names = {suite};
  }
  std::vector<std::string> failed;
  for (const std::string& name : names) {
    const se23ctl::verify::SuiteResult r = se23ctl::verify::run_suite(name, seed);
    std::size_t passed = 0;
    for (const auto& p : r.properties) {
      const char* op = p.compare == se23ctl::verify::Compare::kBelow     ? "<"
                       : p.compare == se23ctl::verify::Compare::kAtLeast ? ">="
                                                                         : "==";
      std::cout << (p.pass ? "PASS " : "FAIL ") << p.suite << '.' << p.name
                << " value=" << format_double(p.value) << " require" << op
                << format_double(p.threshold);
      if (!p.detail.empty()) std::cout << " detail=\"" << p.detail << '"';
      std::cout << '\n';
      if (p.pass) {
        ++passed;
      } else {
        failed.push_back(p.suite + "." + p.name);
      }
    }
    std::cout << "SUITE " << r.suite << ' ' << (r.pass() ? "PASS" : "FAIL") << ' ' << passed
              << '/' << r.properties.size() << " seconds=" << format_double(r.seconds) << '\n';
  }
  if (!failed.empty()) {
    std::cout << "RESULT FAIL reason=properties failed=";
    for (std::size_t i = 0; i < failed.size(); ++i) std::cout << (i ? "," : "") << failed[i];
    std::cout << '\n';
    return kFailed;
  }
  std::cout << "RESULT PASS\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Log-linear backstepping on SE2(3): simulation and verification"};
  app.require_subcommand(1);

  std::string scenario, out;
  auto* sim = app.add_subcommand("simulate", "Run a closed-loop scenario and write the CSV log");
  sim->add_option("--scenario", scenario, "Scenario JSON file")->required();
  sim->add_option("--out", out, "CSV path (default $SE23CTL_OUT_DIR/<name>.csv)");

  std::string gains_scenario;
  auto* gains = app.add_subcommand("check-gains", "Evaluate the gain condition for a scenario");
  gains->add_option("--scenario", gains_scenario, "Scenario JSON file")->required();

  std::string suite = "all";
  std::uint64_t seed = 1;
  auto* ver = app.add_subcommand("verify", "Run oracle property suites");
  ver->add_option("--suite", suite, "Suite to run")
      ->check(CLI::IsMember({"so3", "se23", "lemma1", "closedloop", "all"}));
  ver->add_option("--seed", seed, "Base RNG seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cout << "RESULT FAIL reason=usage\n";
    return kUsage;
  }

  try {
    if (*sim) return cmd_simulate(scenario, out);
    if (*gains) return cmd_check_gains(gains_scenario);
    if (*ver) return cmd_verify(suite, seed);
  } catch (const std::exception& e) {
    std::cout << "RESULT FAIL reason=internal error=\"" << e.what() << "\"\n";
    return kFailed;
  }
  return kUsage;
}
