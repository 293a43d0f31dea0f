// One line per acceptance criterion:
//   CRITERION <n> PASS|FAIL <title> seconds=<s> [failed=a,b]
// followed by indented property lines. Exit status is the number of failed
// criteria (capped at 100).

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "se23ctl/se23ctl.hpp"
#include "se23ctl/verify.hpp"

namespace {

namespace fs = std::filesystem;
using se23ctl::format_double;
using se23ctl::verify::PropertyResult;

constexpr std::uint64_t kSeed = 1;

struct Criterion {
  int id;
  std::string title;
  std::vector<PropertyResult> properties;
  double seconds = 0.0;
  double time_limit = 0.0;  // 0: none
};

std::vector<PropertyResult> pick(const se23ctl::verify::SuiteResult& suite,
                                 const std::set<std::string>& names) {
  std::vector<PropertyResult> out;
  for (const auto& p : suite.properties) {
    if (names.count(p.name)) out.push_back(p);
  }
  if (out.size() != names.size()) {
    out.push_back({suite.suite, "missing_properties", false, 0.0, 0.0,
                   se23ctl::verify::Compare::kEqual, "suite did not report every property"});
  }
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

int run_cli(const std::string& scenario, const fs::path& out) {
  const std::string cmd = std::string("\"") + SE23CTL_CLI + "\" simulate --scenario \"" +
                          scenario + "\" --out \"" + out.string() + "\" > \"" + out.string() +
                          ".stdout\" 2>&1";
  return std::system(cmd.c_str());
}

Criterion determinism() {
  Criterion c{8, "simulate writes byte-identical CSV for identical config", {}, 0.0, 0.0};
  const fs::path dir = fs::temp_directory_path() / "se23ctl_acceptance";
  fs::create_directories(dir);
  for (const char* name : {"hover_recovery", "helix"}) {
    const std::string scenario = std::string(SE23CTL_SCENARIO_DIR) + "/" + name + ".json";
    const fs::path a = dir / (std::string(name) + "_a.csv");
    const fs::path b = dir / (std::string(name) + "_b.csv");
    const int ra = run_cli(scenario, a);
    const int rb = run_cli(scenario, b);
    const std::string ca = slurp(a), cb = slurp(b);
    const bool same = ra == 0 && rb == 0 && !ca.empty() && ca == cb &&
                      slurp(se23ctl::states_path(a.string())) ==
                          slurp(se23ctl::states_path(b.string()));
    c.properties.push_back({"cli", std::string(name) + "_csv_identical", same, same ? 1.0 : 0.0,
                            1.0, se23ctl::verify::Compare::kEqual,
                            std::to_string(ca.size()) + " bytes, exit " + std::to_string(ra) +
                                "/" + std::to_string(rb)});
  }
  return c;
}

bool report(const Criterion& c) {
  const bool time_ok = c.time_limit <= 0.0 || c.seconds < c.time_limit;
  std::vector<std::string> failed;
  for (const auto& p : c.properties) {
    if (!p.pass) failed.push_back(p.suite + "." + p.name);
  }
  if (!time_ok) failed.push_back("runtime");
  const bool pass = failed.empty() && !c.properties.empty();
  std::cout << "CRITERION " << c.id << ' ' << (pass ? "PASS" : "FAIL") << ' ' << c.title
            << " seconds=" << format_double(c.seconds);
  if (c.time_limit > 0.0) std::cout << " limit=" << format_double(c.time_limit);
  if (!failed.empty()) {
    std::cout << " failed=";
    for (std::size_t i = 0; i < failed.size(); ++i) std::cout << (i ? "," : "") << failed[i];
  }
  std::cout << '\n';
  for (const auto& p : c.properties) {
    const char* op = p.compare == se23ctl::verify::Compare::kBelow     ? "<"
                     : p.compare == se23ctl::verify::Compare::kAtLeast ? ">="
                                                                       : "==";
    std::cout << "    " << (p.pass ? "ok   " : "FAIL ") << p.suite << '.' << p.name
              << " value=" << format_double(p.value) << " require" << op
              << format_double(p.threshold);
    if (!p.detail.empty()) std::cout << " (" << p.detail << ')';
    std::cout << '\n';
  }
  return pass;
}

}  // namespace

int main() {
  using namespace se23ctl::verify;
  std::vector<Criterion> criteria;

  const SuiteResult so3 = so3_suite(kSeed);
  criteria.push_back({1, "SO(3) closed forms vs quadrature, branch continuity", so3.properties,
                      so3.seconds, 10.0});

  const SuiteResult se23 = se23_suite(kSeed);
  criteria.push_back({2, "SE2(3) exp/log roundtrip, inverse Jacobians, mirror identity",
                      pick(se23, {"exp_log_roundtrip", "jl_inv_times_series",
                                  "jr_inv_times_series", "mirror_identity_mismatches"}),
                      se23.seconds});
  criteria.push_back({3, "BCH convention, second-order remainder",
                      pick(se23, {"bch_min_order"}), se23.seconds});

  const SuiteResult lemma = lemma1_suite(kSeed);
  criteria.push_back({4, "exact log-error dynamics, finite-difference order", lemma.properties,
                      lemma.seconds});

  criteria.push_back({5, "C-term commutator equals (xi_v, 0, 0)",
                      pick(se23, {"c_term_mismatches"}), se23.seconds});

  const SuiteResult loop = closedloop_suite(kSeed);
  criteria.push_back({6, "closed-loop exponential envelope, gain condition",
                      pick(loop, {"gain_margin_60I", "alpha_60I", "hover_envelope_worst_ratio",
                                  "linear_envelope_worst_ratio", "violating_40I_flagged"}),
                      loop.seconds, 30.0});
  criteria.push_back({7, "hover equilibrium invariant over 1e4 steps",
                      pick(loop, {"hover_equilibrium_drift"}), loop.seconds});

  const auto start = std::chrono::steady_clock::now();
  Criterion det = determinism();
  det.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  criteria.push_back(det);

  int failures = 0;
  for (const Criterion& c : criteria) {
    if (!report(c)) ++failures;
  }
  std::cout << (failures == 0 ? "RESULT PASS" : "RESULT FAIL") << " criteria="
            << criteria.size() - failures << '/' << criteria.size() << '\n';
  return std::min(failures, 100);
}
