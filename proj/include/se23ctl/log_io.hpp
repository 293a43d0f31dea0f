#pragma once

// Run artifacts.
//
//   <out>.csv            25 columns, one row per logged step:
//                        t, xi_p[3], xi_v[3], xi_r[3], e_p[3], e_v[3], e_r[3],
//                        T, omega[3], V, bound
//   <out>.csv.meta.json  expanded scenario, stability report, envelope result
//   <out>.csv.states.csv t, actual p/v/R and reference p/v/R (R row-major)
//
// Numbers are written with 17 significant digits by std::to_chars (locale
// independent, exact roundtrip). Non-finite values print as nan / inf.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <vector>

#include <nlohmann/json.hpp>

#include "se23ctl/scenario.hpp"
#include "se23ctl/simulation.hpp"

namespace se23ctl {

inline constexpr std::size_t kLogColumns = 25;

inline const std::array<std::string, kLogColumns>& log_columns() {
  static const std::array<std::string, kLogColumns> names = {
      "t",      "xi_p_x", "xi_p_y", "xi_p_z", "xi_v_x",  "xi_v_y",  "xi_v_z",
      "xi_r_x", "xi_r_y", "xi_r_z", "e_p_x",  "e_p_y",   "e_p_z",   "e_v_x",
      "e_v_y",  "e_v_z",  "e_r_x",  "e_r_y",  "e_r_z",   "T",       "omega_x",
      "omega_y", "omega_z", "V",    "bound"};
  return names;
}

inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double x = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), x);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw std::runtime_error("bad number '" + std::string(s) + "'");
  }
  return x;
}

inline std::array<double, kLogColumns> log_row(const TrajectoryLog& log, std::size_t i) {
  std::array<double, kLogColumns> r{};
  std::size_t c = 0;
  r[c++] = log.t[i];
  for (Eigen::Index k = 0; k < 9; ++k) r[c++] = log.xi[i](k);
  for (const Vec3* v : {&log.errors[i].e_p, &log.errors[i].e_v, &log.errors[i].e_r}) {
    for (int k = 0; k < 3; ++k) r[c++] = (*v)(k);
  }
  r[c++] = log.input[i].thrust;
  for (int k = 0; k < 3; ++k) r[c++] = log.input[i].omega(k);
  r[c++] = log.lyapunov[i];
  r[c++] = log.bound[i];
  return r;
}

template <typename Row>
void write_csv_row(std::ostream& os, const Row& row) {
  bool first = true;
  for (const auto& x : row) {
    if (!first) os << ',';
    os << format_double(x);
    first = false;
  }
  os << '\n';
}

inline void write_csv(const TrajectoryLog& log, std::ostream& os) {
  const auto& cols = log_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << '\n';
  for (std::size_t i = 0; i < log.size(); ++i) write_csv_row(os, log_row(log, i));
}

inline void write_states_csv(const TrajectoryLog& log, std::ostream& os) {
  os << "t";
  for (const char* who : {"", "ref_"}) {
    for (const char* q : {"p", "v"}) {
      for (const char* a : {"x", "y", "z"}) os << ',' << who << q << '_' << a;
    }
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) os << ',' << who << "R_" << r << c;
    }
  }
  os << '\n';
  for (std::size_t i = 0; i < log.size(); ++i) {
    std::vector<double> row{log.t[i]};
    for (const GroupElement* x : {&log.state[i], &log.reference[i]}) {
      for (int k = 0; k < 3; ++k) row.push_back(x->p(k));
      for (int k = 0; k < 3; ++k) row.push_back(x->v(k));
      for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) row.push_back(x->R(r, c));
      }
    }
    write_csv_row(os, row);
  }
}

inline nlohmann::json stability_json(const StabilityReport& r) {
  return {{"kappa_p", r.kappa_p},       {"kappa_v", r.kappa_v}, {"kappa_r", r.kappa_r},
          {"b_norm", r.b_norm},         {"margin", r.margin},   {"alpha", r.alpha},
          {"condition_holds", r.condition_holds}};
}

inline nlohmann::json envelope_json(const EnvelopeResult& e, double tol) {
  return {{"applicable", e.applicable},
          {"pass", e.pass},
          {"tolerance", tol},
          {"worst_ratio", e.worst_ratio},
          {"worst_time", e.worst_time},
          {"measured_exponent", e.measured_exponent},
          {"violations", e.violations},
          {"samples", e.samples}};
}

inline nlohmann::json sidecar_json(const ScenarioConfig& cfg, const TrajectoryLog& log,
                                   const std::string& states_file) {
  nlohmann::json j;
  j["schema"] = "se23ctl.run/1";
  j["columns"] = log_columns();
  j["rows"] = log.size();
  j["steps"] = log.steps;
  j["states_file"] = states_file;
  j["thrust_ref_max"] = log.thrust_ref_max;
  j["saturated_rows"] = std::count(log.saturated.begin(), log.saturated.end(), true);
  j["config"] = to_json(cfg);
  j["stability"] = stability_json(log.stability);
  j["envelope"] = envelope_json(log.envelope, cfg.envelope_tolerance);
  return j;
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path);
}

inline std::string sidecar_path(const std::string& csv) { return csv + ".meta.json"; }
inline std::string states_path(const std::string& csv) { return csv + ".states.csv"; }

/// Writes the CSV, the states CSV and the sidecar next to `csv_path`.
inline void write_log(const ScenarioConfig& cfg, const TrajectoryLog& log,
                      const std::string& csv_path) {
  std::ostringstream csv;
  write_csv(log, csv);
  write_file(csv_path, csv.str());
  std::ostringstream states;
  write_states_csv(log, states);
  write_file(states_path(csv_path), states.str());
  const std::string states_name =
      std::filesystem::path(states_path(csv_path)).filename().string();
  write_file(sidecar_path(csv_path), sidecar_json(cfg, log, states_name).dump(2) + "\n");
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

inline CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  CsvTable table;
  std::string line;
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = s.find(',', start);
      out.push_back(s.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    return out;
  };
  if (!std::getline(in, line)) throw std::runtime_error(path + ": missing header");
  table.header = split(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> cells = split(line);
    if (cells.size() != table.header.size()) {
      throw std::runtime_error(path + ": row " + std::to_string(table.rows.size() + 1) +
                               " has " + std::to_string(cells.size()) + " cells");
    }
    std::vector<double> row;
    row.reserve(cells.size());
    for (const std::string& c : cells) row.push_back(parse_double(c));
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace se23ctl
