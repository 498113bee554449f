#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ivp.hpp"
#include "polar.hpp"
#include "shooting.hpp"
#include "sweep.hpp"

namespace minkshoot {

// Shortest round-trip decimal form; all numeric output funnels through here
// so identical runs produce byte-identical files.
inline std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string json_number(double x) {
  if (!std::isfinite(x)) return "null";
  return fmt17(x);
}

inline std::string json_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 8);
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char b[8];
          std::snprintf(b, sizeof b, "\\u%04x", static_cast<unsigned char>(c));
          out += b;
        } else {
          out += c;
        }
    }
  }
  return out;
}

inline void write_file(const std::string& path, const std::string& content) {
  std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("write_file: cannot open " + path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw std::runtime_error("write_file: short write to " + path);
}

// One row per stored sample, first column the radius.
inline std::string csv_trajectory(const Trajectory& traj) {
  std::string out = "r,u,v,uprime\n";
  for (std::size_t i = 0; i < traj.r.size(); ++i)
    out += fmt17(traj.r[i]) + "," + fmt17(traj.u[i]) + "," + fmt17(traj.v[i]) + "," +
           fmt17(traj.uprime[i]) + "\n";
  return out;
}

inline std::string csv_polar(const PolarPath& path) {
  std::string out = "r,theta,rho\n";
  for (std::size_t i = 0; i < path.r.size(); ++i)
    out += fmt17(path.r[i]) + "," + fmt17(path.theta[i]) + "," + fmt17(path.rho[i]) +
           "\n";
  return out;
}

inline std::string csv_eigen(const std::vector<double>& spectrum) {
  std::string out = "k,lambda\n";
  for (std::size_t i = 0; i < spectrum.size(); ++i)
    out += std::to_string(i + 1) + "," + fmt17(spectrum[i]) + "\n";
  return out;
}

inline std::string csv_sweep(const SweepResult& res) {
  std::string out = "q,side,crossings,d\n";
  for (const auto& p : res.points)
    out += fmt17(p.q) + "," + side_name(p.side) + "," + std::to_string(p.crossings) +
           "," + fmt17(p.d) + "\n";
  return out;
}

// One gnuplot index block per branch, separated by double blank lines, so
// `plot 'file' index N with lines` draws a single branch.
inline std::string gnuplot_branches(const SweepResult& res) {
  std::string out;
  bool first = true;
  for (Side side : {Side::below, Side::above}) {
    for (int j = 1;; ++j) {
      std::string block;
      for (const auto& p : res.points)
        if (p.side == side && p.crossings == j)
          block += fmt17(p.q) + " " + fmt17(p.d) + "\n";
      bool any_higher = false;
      for (const auto& p : res.points)
        if (p.side == side && p.crossings >= j) any_higher = true;
      if (block.empty() && !any_higher) break;
      if (!block.empty()) {
        if (!first) out += "\n\n";
        out += std::string("# side=") + side_name(side) + " j=" + std::to_string(j) +
               "\n" + block;
        first = false;
      }
    }
  }
  return out;
}

inline std::string json_shoot_summary(const ShotResult& shot, int crossings,
                                      const std::string& csv_path) {
  std::string out = "{\n";
  out += "  \"d\": " + json_number(shot.d) + ",\n";
  out += "  \"theta_end\": " + json_number(shot.theta_end) + ",\n";
  out += "  \"half_turns\": " + std::to_string(shot.half_turns) + ",\n";
  out += "  \"crossings\": " + std::to_string(crossings) + ",\n";
  out += "  \"csv_path\": \"" + json_escape(csv_path) + "\"\n";
  out += "}\n";
  return out;
}

inline std::string json_solve_array(const std::vector<SolutionProfile>& profiles,
                                    const std::vector<std::string>& csv_paths) {
  std::string out = "[\n";
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    const auto& p = profiles[i];
    out += "  {\"d\": " + json_number(p.d) + ", \"side\": \"" + side_name(p.side) +
           "\", \"crossings\": " + std::to_string(p.crossings) +
           ", \"endpoint_residual\": " + json_number(p.endpoint_residual) +
           ", \"min_u\": " + json_number(p.min_u) + ", \"profile_csv_path\": \"" +
           json_escape(i < csv_paths.size() ? csv_paths[i] : "") + "\"}";
    out += i + 1 < profiles.size() ? ",\n" : "\n";
  }
  out += "]\n";
  return out;
}

inline std::string json_verify_array(const std::vector<VerifyReport>& reports) {
  auto flag = [](bool b) { return b ? "true" : "false"; };
  std::string out = "[\n";
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto& v = reports[i];
    out += "  {\"d\": " + json_number(v.d) + ", \"passed\": " + flag(v.passed) +
           ", \"endpoint_slope\": " + json_number(v.endpoint_slope) +
           ", \"endpoint_residual\": " + json_number(v.endpoint_residual) +
           ", \"min_u\": " + json_number(v.min_u) +
           ", \"max_equation_residual\": " + json_number(v.max_equation_residual) +
           ", \"crossings_angle\": " + std::to_string(v.crossings_angle) +
           ", \"crossings_sign\": " + std::to_string(v.crossings_sign) +
           ", \"sup_distance\": " + json_number(v.sup_distance) +
           ", \"positivity_ok\": " + flag(v.positivity_ok) +
           ", \"endpoint_ok\": " + flag(v.endpoint_ok) +
           ", \"residual_ok\": " + flag(v.residual_ok) +
           ", \"crossings_ok\": " + flag(v.crossings_ok) + "}";
    out += i + 1 < reports.size() ? ",\n" : "\n";
  }
  out += "]\n";
  return out;
}

inline std::string json_sweep_summary(const SweepResult& res, int k_max) {
  std::string out = "{\n";
  out += "  \"q_lo\": " +
         json_number(res.q_grid.empty() ? 0.0 : res.q_grid.front()) + ",\n";
  out += "  \"q_hi\": " +
         json_number(res.q_grid.empty() ? 0.0 : res.q_grid.back()) + ",\n";
  out += "  \"q_steps\": " +
         std::to_string(res.q_grid.empty() ? 0 : res.q_grid.size() - 1) + ",\n";
  out += "  \"k_max\": " + std::to_string(k_max) + ",\n";
  out += "  \"points\": " + std::to_string(res.points.size()) + ",\n";
  out += "  \"spectrum\": [";
  for (std::size_t i = 0; i < res.spectrum.size(); ++i)
    out += (i ? ", " : "") + json_number(res.spectrum[i]);
  out += "],\n";
  out += "  \"onsets\": [\n";
  for (std::size_t i = 0; i < res.onsets.size(); ++i) {
    const auto& on = res.onsets[i];
    out += std::string("    {\"side\": \"") + side_name(on.side) +
           "\", \"crossings\": " + std::to_string(on.crossings) +
           ", \"present\": " + (on.present ? "true" : "false") +
           ", \"q_lo\": " + (on.present ? json_number(on.q_lo) : "null") +
           ", \"q_hi\": " + (on.present ? json_number(on.q_hi) : "null") + "}";
    out += i + 1 < res.onsets.size() ? ",\n" : "\n";
  }
  out += "  ],\n";
  out += "  \"gaps\": [\n";
  for (std::size_t i = 0; i < res.gaps.size(); ++i) {
    const auto& g = res.gaps[i];
    out += std::string("    {\"q\": ") + json_number(g.q) + ", \"side\": \"" +
           side_name(g.side) + "\", \"crossings\": " + std::to_string(g.crossings) +
           ", \"reason\": \"" + json_escape(g.reason) + "\"}";
    out += i + 1 < res.gaps.size() ? ",\n" : "\n";
  }
  out += "  ]\n";
  out += "}\n";
  return out;
}

}  // namespace minkshoot
