#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "se23ctl/se23ctl.hpp"

namespace se23ctl {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "se23ctl_harness_test";
  fs::create_directories(dir);
  return dir / name;
}

std::string field_of(const std::string& text) {
  try {
    parse_scenario(text);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "<accepted>";
}

ScenarioConfig hover_recovery() {
  return parse_scenario(std::string(R"({
    "gains": {"K_p": 1, "K_v": 1, "K_r": 60},
    "initial_error": {"position": [1, 0, 0]},
    "horizon": 10.0, "timestep": 0.001, "log_stride": 10})"));
}

TEST(Scenario, EmptyObjectGivesDefaults) {
  const ScenarioConfig c = parse_scenario(std::string("{}"));
  EXPECT_EQ(c.trajectory.kind, TrajectoryKind::kHover);
  EXPECT_EQ(c.horizon, 10.0);
  EXPECT_EQ(c.timestep, 1e-3);
  EXPECT_EQ(c.steps(), 10000u);
  EXPECT_EQ(c.log_stride, 1u);
  EXPECT_EQ(c.gains.kr, 60.0 * Mat3::Identity());
  EXPECT_EQ(c.gains.kp, Mat3::Identity());
  EXPECT_EQ(c.environment.gravity, Vec3(0, 0, -9.81));
  EXPECT_EQ(c.envelope_tolerance, 0.05);
  EXPECT_TRUE(c.initial.isZero(0.0));
}

TEST(Scenario, GainForms) {
  const ScenarioConfig c = parse_scenario(std::string(
      R"({"gains": {"K_p": 2, "K_v": [1, 2, 3], "K_r": [[60, 1, 0], [1, 60, 0], [0, 0, 60]]}})"));
  EXPECT_EQ(c.gains.kp, 2.0 * Mat3::Identity());
  EXPECT_EQ(c.gains.kv, Vec3(1, 2, 3).asDiagonal().toDenseMatrix());
  EXPECT_EQ(c.gains.kr(0, 1), 1.0);
}

TEST(Scenario, RejectionsNameTheField) {
  EXPECT_EQ(field_of(R"({"gains": {"K_r": [[60, 1, 0], [0, 60, 0], [0, 0, 60]]}})"), "gains.K_r");
  EXPECT_EQ(field_of(R"({"gains": {"K_p": -1}})"), "gains.K_p");
  EXPECT_EQ(field_of(R"({"environment": {"thrust_axis": [0, 0, 1.001]}})"), "environment");
  EXPECT_EQ(field_of(R"({"gain": {}})"), "gain");
  EXPECT_EQ(field_of(R"({"trajectory": {"kind": "hover", "radious": 1}})"), "trajectory.radious");
  EXPECT_EQ(field_of(R"({"trajectory": {"kind": "loop"}})"), "trajectory.kind");
  EXPECT_EQ(field_of(R"({"horizon": 1.0, "timestep": 0.3})"), "timestep");
  EXPECT_EQ(field_of(R"({"log_stride": 0})"), "log_stride");
  EXPECT_EQ(field_of(R"({"initial_error": {"rotation": [3.2, 0, 0]}})"), "initial_error.rotation");
  EXPECT_EQ(field_of(R"({"initial_error": {}, "initial_offset": {}})"), "initial_offset");
  EXPECT_EQ(field_of("{"), "<file>");
}

TEST(Scenario, JsonRoundtrip) {
  const ScenarioConfig c = hover_recovery();
  const ScenarioConfig back = parse_scenario(to_json(c));
  EXPECT_EQ(to_json(back), to_json(c));
}

TEST(Scenario, ShippedScenariosLoad) {
  int count = 0;
  for (const auto& entry : fs::directory_iterator(SE23CTL_SCENARIO_DIR)) {
    if (entry.path().extension() != ".json") continue;
    SCOPED_TRACE(entry.path().string());
    EXPECT_NO_THROW(load_scenario(entry.path().string()));
    ++count;
  }
  EXPECT_GE(count, 6);
}

TEST(Simulation, HoverEquilibriumStaysPut) {
  ScenarioConfig c;
  c.log_stride = 100;
  const TrajectoryLog log = run_closed_loop(c);
  EXPECT_EQ(log.steps, 10000u);
  for (const Tangent& xi : log.xi) EXPECT_LT(xi.norm(), 1e-10);
  EXPECT_TRUE(log.envelope.pass);
}

TEST(Simulation, HoverRecoveryWithinEnvelope) {
  const TrajectoryLog log = run_closed_loop(hover_recovery());
  ASSERT_TRUE(log.envelope.applicable);
  EXPECT_TRUE(log.envelope.pass) << "worst ratio " << log.envelope.worst_ratio;
  EXPECT_LT(log.envelope.worst_ratio, 1.05);
  EXPECT_EQ(log.size(), 1001u);
  EXPECT_NEAR(log.lyapunov.front(), 0.5 * (1.0 + 1.0 + 1.0 / (9.81 * 9.81)), 1e-12);
  EXPECT_LT(log.lyapunov.back(), 1e-6);
  for (std::size_t i = 0; i < log.size(); ++i) {
    EXPECT_NEAR(log.bound[i], log.lyapunov.front() * std::exp(-log.t[i]), 1e-12);
  }
}

TEST(Simulation, CircleTracks) {
  const ScenarioConfig c = load_scenario(std::string(SE23CTL_SCENARIO_DIR) + "/circle.json");
  const TrajectoryLog log = run_closed_loop(c);
  EXPECT_TRUE(log.envelope.pass) << "worst ratio " << log.envelope.worst_ratio;
  EXPECT_LT(log.xi.back().norm(), 1e-3);
  EXPECT_LT((log.state.back().p - log.reference.back().p).norm(), 1e-3);
}

TEST(Simulation, ViolatingGainsHaveNoEnvelope) {
  ScenarioConfig c = hover_recovery();
  c.gains.kr = 40.0 * Mat3::Identity();
  const TrajectoryLog log = run_closed_loop(c);
  EXPECT_FALSE(log.stability.condition_holds);
  EXPECT_FALSE(log.envelope.applicable);
  for (double b : log.bound) EXPECT_TRUE(std::isnan(b));
}

TEST(Simulation, DisturbanceExcludedFromEnvelope) {
  ScenarioConfig c = hover_recovery();
  c.disturbance.gravity_offset = Vec3(0.3, 0, -0.2);
  c.disturbance.start_time = 2.0;
  const TrajectoryLog log = run_closed_loop(c);
  EXPECT_EQ(log.envelope.samples, 200u);
  EXPECT_TRUE(log.envelope.pass);
}

TEST(Simulation, AbortReportsStep) {
  const ScenarioConfig c = parse_scenario(std::string(
      R"({"horizon": 1, "initial_offset": {"rotation": [3.1, 0, 0], "velocity": [0, 5, 0]}})"));
  try {
    run_closed_loop(c);
    FAIL() << "expected an abort";
  } catch (const SimulationAborted& e) {
    EXPECT_EQ(e.step(), 1u);
    EXPECT_DOUBLE_EQ(e.time(), 1e-3);
    EXPECT_NE(std::string(e.what()).find("step 1"), std::string::npos);
  }
}

TEST(Simulation, Deterministic) {
  const ScenarioConfig c = load_scenario(std::string(SE23CTL_SCENARIO_DIR) + "/helix.json");
  std::ostringstream a, b;
  write_csv(run_closed_loop(c), a);
  write_csv(run_closed_loop(c), b);
  EXPECT_EQ(a.str(), b.str());
}

TEST(LogIo, NumberFormatRoundtrips) {
  for (double x : {0.0, -0.0, 1.0 / 3.0, 9.81, 1e-300, -2.2250738585072014e-308, 6.02e23,
                   std::nextafter(1.0, 2.0)}) {
    const double back = parse_double(format_double(x));
    EXPECT_EQ(std::signbit(back), std::signbit(x));
    EXPECT_EQ(back, x);
  }
  EXPECT_TRUE(std::isnan(parse_double(format_double(std::nan("")))));
  EXPECT_EQ(format_double(-INFINITY), "-inf");
  EXPECT_THROW(parse_double("1.5x"), std::runtime_error);
}

TEST(LogIo, CsvRoundtripIsExact) {
  const ScenarioConfig c = hover_recovery();
  const TrajectoryLog log = run_closed_loop(c);
  const fs::path csv = scratch("recovery.csv");
  write_log(c, log, csv.string());
  const CsvTable t = read_csv(csv.string());
  ASSERT_EQ(t.header.size(), kLogColumns);
  EXPECT_EQ(t.header.front(), "t");
  EXPECT_EQ(t.header.back(), "bound");
  ASSERT_EQ(t.rows.size(), log.size());
  for (std::size_t i = 0; i < log.size(); ++i) {
    const auto row = log_row(log, i);
    for (std::size_t k = 0; k < kLogColumns; ++k) ASSERT_EQ(t.rows[i][k], row[k]);
  }
  const CsvTable states = read_csv(states_path(csv.string()));
  EXPECT_EQ(states.header.size(), 1u + 2 * 15);
  EXPECT_EQ(states.rows.size(), log.size());
}

TEST(LogIo, SidecarContents) {
  const ScenarioConfig c = hover_recovery();
  const TrajectoryLog log = run_closed_loop(c);
  const fs::path csv = scratch("sidecar.csv");
  write_log(c, log, csv.string());
  const nlohmann::json j = nlohmann::json::parse(slurp(sidecar_path(csv.string())));
  EXPECT_EQ(j["schema"], "se23ctl.run/1");
  EXPECT_EQ(j["columns"].size(), kLogColumns);
  EXPECT_EQ(j["rows"], log.size());
  EXPECT_EQ(j["steps"], 10000);
  EXPECT_EQ(j["states_file"], "sidecar.csv.states.csv");
  EXPECT_EQ(j["stability"]["alpha"].get<double>(), log.stability.alpha);
  EXPECT_TRUE(j["stability"]["condition_holds"].get<bool>());
  EXPECT_TRUE(j["envelope"]["pass"].get<bool>());
  EXPECT_EQ(parse_scenario(j["config"]).horizon, 10.0);
}

TEST(LogIo, EmptyLogIsHeaderOnly) {
  std::ostringstream os;
  write_csv(TrajectoryLog{}, os);
  const std::string s = os.str();
  EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 1);
  EXPECT_EQ(std::count(s.begin(), s.end(), ','), static_cast<long>(kLogColumns - 1));
}

TEST(LogIo, WriteLogIsByteStable) {
  const ScenarioConfig c = hover_recovery();
  const fs::path a = scratch("a.csv"), b = scratch("b.csv");
  write_log(c, run_closed_loop(c), a.string());
  write_log(c, run_closed_loop(c), b.string());
  EXPECT_EQ(slurp(a), slurp(b));
  EXPECT_EQ(slurp(states_path(a.string())), slurp(states_path(b.string())));
}

TEST(LogIo, UnwritablePathThrows) {
  const ScenarioConfig c = parse_scenario(std::string(R"({"horizon": 0.01})"));
  EXPECT_THROW(write_log(c, run_closed_loop(c), "/nonexistent-dir/x.csv"), std::runtime_error);
}

}  // namespace
}  // namespace se23ctl
