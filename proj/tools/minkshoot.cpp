#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "minkshoot/minkshoot.hpp"

namespace ms = minkshoot;

namespace {

struct RunConfig {
  int N = 1;
  double R1 = 0.0;
  double R2 = 1.0;
  double q = 15.0;
  double r = 3.0;
  double tol = 1e-8;
  int jobs = 1;
  std::string out_dir = ".";
};

std::string join_out(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

// --scan-points wins over the env seed, which wins over the default.
int resolve_scan_points(int flag_value, bool flag_given) {
  if (flag_given) {
    if (flag_value < 2) throw std::invalid_argument("--scan-points must be >= 2");
    return flag_value;
  }
  const char* env = std::getenv("MINKSHOOT_SEED_GRID");
  if (!env || !*env) return 256;
  char* end = nullptr;
  long v = std::strtol(env, &end, 10);
  if (!end || *end != '\0' || v < 2 || v > 1000000)
    throw std::invalid_argument(
        "MINKSHOOT_SEED_GRID must be an integer in [2, 1000000]");
  return static_cast<int>(v);
}

void apply_config_file(const std::string& path, RunConfig& cfg, CLI::Option* oN,
                       CLI::Option* oR1, CLI::Option* oR2, CLI::Option* oq,
                       CLI::Option* orr) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw std::invalid_argument("config: parse error in " + path + ": " + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("config: root must be an object");
  try {
    for (const auto& [key, val] : j.items()) {
      if (key == "N") {
        if (oN->count() == 0) cfg.N = val.get<int>();
      } else if (key == "R1") {
        if (oR1->count() == 0) cfg.R1 = val.get<double>();
      } else if (key == "R2") {
        if (oR2->count() == 0) cfg.R2 = val.get<double>();
      } else if (key == "q") {
        if (oq->count() == 0) cfg.q = val.get<double>();
      } else if (key == "r") {
        if (orr->count() == 0) cfg.r = val.get<double>();
      } else {
        throw std::invalid_argument("config: unknown key \"" + key + "\"");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("config: bad value type in " + path + ": " + e.what());
  }
}

int cmd_eigen(const RunConfig& cfg, int kmax) {
  if (kmax < 1) throw std::invalid_argument("eigen: --kmax must be >= 1");
  ms::Geometry geom(cfg.N, cfg.R1, cfg.R2);
  double eig_tol = std::fmin(cfg.tol, 1e-10);
  auto spectrum = ms::radial_spectrum(geom, kmax, eig_tol);
  std::string csv = ms::csv_eigen(spectrum);
  std::cout << csv;
  ms::write_file(join_out(cfg.out_dir, "eigen.csv"), csv);
  return 0;
}

int cmd_shoot(const RunConfig& cfg, double d, double alpha) {
  ms::Geometry geom(cfg.N, cfg.R1, cfg.R2);
  ms::Nonlinearity nl = ms::make_prototype(cfg.q, cfg.r);
  ms::ShotResult shot = ms::shoot(geom, nl, d, cfg.tol);
  ms::PolarPath pol = ms::to_polar(*shot.traj, nl.s0, alpha);
  int crossings = ms::crossing_report(pol).count;
  std::string traj_path = join_out(cfg.out_dir, "trajectory.csv");
  ms::write_file(traj_path, ms::csv_trajectory(*shot.traj));
  ms::write_file(join_out(cfg.out_dir, "polar.csv"), ms::csv_polar(pol));
  std::cout << ms::json_shoot_summary(shot, crossings, traj_path);
  return 0;
}

int cmd_solve(const RunConfig& cfg, int k, int scan_pts, bool scan_given,
              double beyond) {
  ms::Geometry geom(cfg.N, cfg.R1, cfg.R2);
  ms::Nonlinearity nl = ms::make_prototype(cfg.q, cfg.r);
  ms::SolveOptions opts;
  opts.scan_points = resolve_scan_points(scan_pts, scan_given);
  opts.beyond_dstar = beyond;
  opts.jobs = cfg.jobs;

  ms::SolveResult res;
  int code = 0;
  try {
    res = ms::solve_all(geom, nl, k, cfg.tol, opts);
  } catch (const ms::incomplete_solve_error& e) {
    std::cerr << e.what() << "\n";
    res = e.result();
    code = 5;
  }

  std::vector<std::string> csv_paths;
  std::map<std::pair<int, int>, int> slot;
  for (const auto& p : res.profiles) {
    int i = slot[{p.side == ms::Side::below ? 0 : 1, p.crossings}]++;
    std::string name = std::string("profile_") + ms::side_name(p.side) +
                       std::to_string(p.crossings) + "_" + std::to_string(i) + ".csv";
    std::string full = join_out(cfg.out_dir, name);
    ms::write_file(full, ms::csv_trajectory(*p.traj));
    csv_paths.push_back(full);
  }
  std::string solve_json = ms::json_solve_array(res.profiles, csv_paths);
  ms::write_file(join_out(cfg.out_dir, "solve.json"), solve_json);
  std::string flog;
  for (const auto& f : res.failures)
    flog += std::string("side=") + ms::side_name(f.side) +
            " j=" + std::to_string(f.crossings) + ": " + f.reason + "\n";
  ms::write_file(join_out(cfg.out_dir, "failures.log"), flog);
  std::cout << solve_json;
  return code;
}

int cmd_verify(const RunConfig& cfg, const std::string& in_flag) {
  ms::Geometry geom(cfg.N, cfg.R1, cfg.R2);
  ms::Nonlinearity nl = ms::make_prototype(cfg.q, cfg.r);
  std::string path = in_flag.empty() ? join_out(cfg.out_dir, "solve.json") : in_flag;
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("verify: cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw std::invalid_argument("verify: parse error in " + path + ": " + e.what());
  }
  if (!j.is_array()) throw std::invalid_argument("verify: expected a JSON array");

  double tol_refine = std::fmin(cfg.tol, 1e-10);
  std::vector<ms::VerifyReport> reports;
  bool all_passed = true;
  try {
    for (const auto& entry : j) {
      double d = entry.at("d").get<double>();
      std::string side_s = entry.at("side").get<std::string>();
      int crossings = entry.at("crossings").get<int>();
      ms::Side side = side_s == "above" ? ms::Side::above : ms::Side::below;
      ms::SolutionProfile prof = ms::make_profile(geom, nl, d, side, tol_refine);
      prof.crossings = crossings;
      ms::VerifyReport rep = ms::verify_solution(geom, nl, prof);
      all_passed = all_passed && rep.passed;
      reports.push_back(rep);
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("verify: malformed entry in " + path + ": " + e.what());
  }
  std::string out_json = ms::json_verify_array(reports);
  ms::write_file(join_out(cfg.out_dir, "verify.json"), out_json);
  std::cout << out_json;
  return all_passed ? 0 : 4;
}

int cmd_sweep(const RunConfig& cfg, double q_lo, double q_hi, int steps, int kmax,
              int scan_pts, bool scan_given) {
  ms::Geometry geom(cfg.N, cfg.R1, cfg.R2);
  ms::SolveOptions opts;
  opts.scan_points = resolve_scan_points(scan_pts, scan_given);
  opts.jobs = cfg.jobs;
  ms::SweepResult res = ms::sweep_q(geom, cfg.r, q_lo, q_hi, steps, kmax, cfg.tol, opts);

  ms::write_file(join_out(cfg.out_dir, "sweep.csv"), ms::csv_sweep(res));
  ms::write_file(join_out(cfg.out_dir, "sweep_branches.dat"),
                 ms::gnuplot_branches(res));
  std::string summary = ms::json_sweep_summary(res, kmax);
  ms::write_file(join_out(cfg.out_dir, "sweep.json"), summary);
  std::string flog;
  for (const auto& g : res.gaps)
    flog += "q=" + ms::fmt17(g.q) + " side=" + ms::side_name(g.side) +
            " j=" + std::to_string(g.crossings) + ": " + g.reason + "\n";
  ms::write_file(join_out(cfg.out_dir, "failures.log"), flog);
  std::cout << summary;
  return res.points.empty() && !res.gaps.empty() ? 5 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Shooting solver for radial Neumann profiles of the "
               "Minkowski-curvature equation"};
  app.fallthrough();
  app.require_subcommand(1);

  RunConfig cfg;
  std::string config_path;
  auto* oN = app.add_option("--N", cfg.N, "space dimension (default 1)");
  auto* oR1 = app.add_option("--R1", cfg.R1, "inner radius, 0 for a ball");
  auto* oR2 = app.add_option("--R2", cfg.R2, "outer radius (default 1)");
  auto* oq = app.add_option("--q", cfg.q, "superlinear exponent (default 15)");
  auto* orr = app.add_option("--r", cfg.r, "sublinear exponent (default 3)");
  app.add_option("--tol", cfg.tol, "integration tolerance (default 1e-8)");
  app.add_option("--jobs", cfg.jobs, "worker threads for scans (default 1)");
  app.add_option("--out", cfg.out_dir, "output directory (default .)");
  app.add_option("--config", config_path, "JSON config file with keys N,R1,R2,q,r");

  auto* c_eigen = app.add_subcommand("eigen", "tabulate radial Neumann eigenvalues");
  int kmax = 6;
  c_eigen->add_option("--kmax", kmax, "number of eigenvalues (default 6)");

  auto* c_shoot = app.add_subcommand("shoot", "integrate one shot from height d");
  double d_shot = 0.5;
  double alpha = 1.0;
  c_shoot->add_option("--d", d_shot, "shooting height u(R1)")->required();
  c_shoot->add_option("--alpha", alpha, "polar scaling for the angle output");

  auto* c_solve = app.add_subcommand("solve", "find all profiles with 1..k crossings");
  int k_solve = 1;
  int solve_pts = 0;
  double beyond = 1.0;
  c_solve->add_option("--k", k_solve, "largest crossing count (default 1)");
  auto* o_solve_pts =
      c_solve->add_option("--scan-points", solve_pts,
                          "scan grid size (default 256 or MINKSHOOT_SEED_GRID)");
  c_solve->add_option("--beyond-dstar", beyond,
                      "extend the above-side scan past d* by this factor");

  auto* c_verify = app.add_subcommand("verify", "re-check a stored solve result");
  std::string in_flag;
  c_verify->add_option("--in", in_flag, "solve.json to verify (default <out>/solve.json)");

  auto* c_sweep = app.add_subcommand("sweep", "branch diagram over a q range");
  double q_lo = 4.0, q_hi = 50.0;
  int steps = 200;
  int sweep_kmax = 2;
  int sweep_pts = 0;
  c_sweep->add_option("--q-lo", q_lo, "lower end of the q range (default 4)");
  c_sweep->add_option("--q-hi", q_hi, "upper end of the q range (default 50)");
  c_sweep->add_option("--steps", steps, "uniform q steps (default 200)");
  c_sweep->add_option("--kmax", sweep_kmax, "largest crossing count tracked (default 2)");
  auto* o_sweep_pts =
      c_sweep->add_option("--scan-points", sweep_pts,
                          "scan grid size (default 256 or MINKSHOOT_SEED_GRID)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (!config_path.empty())
      apply_config_file(config_path, cfg, oN, oR1, oR2, oq, orr);
    if (!(cfg.tol >= 1e-13 && cfg.tol <= 1e-4))
      throw std::invalid_argument("--tol must lie in [1e-13, 1e-4]");

    if (c_eigen->parsed()) return cmd_eigen(cfg, kmax);
    if (c_shoot->parsed()) return cmd_shoot(cfg, d_shot, alpha);
    if (c_solve->parsed())
      return cmd_solve(cfg, k_solve, solve_pts, o_solve_pts->count() > 0, beyond);
    if (c_verify->parsed()) return cmd_verify(cfg, in_flag);
    if (c_sweep->parsed())
      return cmd_sweep(cfg, q_lo, q_hi, steps, sweep_kmax, sweep_pts,
                       o_sweep_pts->count() > 0);
    std::cerr << "no subcommand\n";
    return 1;
  } catch (const ms::hypothesis_error& e) {
    std::cerr << e.what() << "\n";
    return 4;
  } catch (const ms::search_failure_error& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const ms::integration_error& e) {
    std::cerr << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
}
