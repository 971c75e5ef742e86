#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "hk/experiments.hpp"
#include "hk/io.hpp"
#include "hk/lifting.hpp"
#include "hk/log.hpp"
#include "hk/transport.hpp"

namespace {

using namespace hk;

void add_solver_flags(CLI::App* cmd, SolverConfig& cfg) {
  cmd->add_option("--epsilon-start", cfg.epsilon_start,
                  "initial entropic regularization")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--epsilon-min", cfg.epsilon_min,
                  "final entropic regularization")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--tol", cfg.tol, "scaling-update stopping tolerance")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--max-iters", cfg.max_iters,
                  "iteration cap per annealing stage")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--threads", cfg.threads, "worker threads for scaling loops")
      ->check(CLI::PositiveNumber);
}

std::string need_dir(const std::string& out) {
  if (out.empty()) fail(ErrorKind::Usage, "--out directory is required");
  std::filesystem::create_directories(out);
  return out + "/";
}

std::vector<double> parse_times(const std::string& spec) {
  std::vector<double> out;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      fail(ErrorKind::Usage, "bad time value '" + item + "'");
    }
    if (out.back() < 0.0 || out.back() > 1.0)
      fail(ErrorKind::Usage, "interpolation times must lie in [0, 1]");
  }
  if (out.empty()) fail(ErrorKind::Usage, "no interpolation times given");
  return out;
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Hellinger-Kantorovich geometry on discrete measures"};
  app.require_subcommand(1);

  SolverConfig scfg;
  std::string in0, in1, out, tangent_file;
  int n_steps = 32;
  double t_value = 1.0, dt = 1.0, prune = 1e-12;
  bool barycentric = false, characteristic = false;

  auto* dist = app.add_subcommand("dist", "HK distance between two clouds");
  dist->add_option("source", in0, "source CSV")->required();
  dist->add_option("target", in1, "target CSV")->required();
  add_solver_flags(dist, scfg);

  auto* logc = app.add_subcommand("log", "HK logarithmic map");
  logc->add_option("source", in0)->required();
  logc->add_option("target", in1)->required();
  logc->add_option("--out", out, "tangent CSV to write")->required();
  logc->add_option("--dt", dt, "time-step scaling (tangent carries 1/dt)");
  logc->add_flag("--barycentric", barycentric,
                 "use plain barycentric tangents instead of edgewise");
  add_solver_flags(logc, scfg);

  auto* expc = app.add_subcommand("exp", "HK exponential map");
  expc->add_option("tangent", tangent_file, "tangent CSV (anchor included)")
      ->required();
  expc->add_option("--t", t_value, "evaluation time");
  expc->add_option("--out", out, "cloud CSV to write")->required();

  auto* interp = app.add_subcommand("interpolate", "HK geodesic interpolation");
  interp->add_option("source", in0)->required();
  interp->add_option("target", in1)->required();
  std::string times_spec = "0.5";
  interp->add_option("--times", times_spec, "comma-separated times in [0,1]");
  interp->add_option("--out", out, "output directory")->required();
  interp->add_option("--prune", prune, "relative plan pruning threshold");
  add_solver_flags(interp, scfg);

  auto* lift = app.add_subcommand("lift", "isometric lift of the geodesic");
  lift->add_option("source", in0)->required();
  lift->add_option("target", in1)->required();
  lift->add_option("--n-steps", n_steps, "grid resolution")
      ->check(CLI::PositiveNumber);
  lift->add_option("--out", out, "output directory")->required();
  lift->add_option("--prune", prune, "relative plan pruning threshold");
  lift->add_flag("--characteristic", characteristic,
                 "characteristic grid (no per-step solves)");
  add_solver_flags(lift, scfg);

  auto* pt = app.add_subcommand("pt", "approximate HK parallel transport");
  pt->add_option("source", in0)->required();
  pt->add_option("target", in1)->required();
  pt->add_option("--tangent-file", tangent_file, "tangent CSV to transport")
      ->required();
  pt->add_option("--n-steps", n_steps, "transport resolution")
      ->check(CLI::PositiveNumber);
  pt->add_option("--out", out, "output directory")->required();
  pt->add_option("--prune", prune, "relative plan pruning threshold");
  pt->add_flag("--characteristic", characteristic,
               "characteristic grid (no per-step solves)");
  add_solver_flags(pt, scfg);

  auto* conept = app.add_subcommand("cone-pt",
                                    "closed-form cone parallel transport");
  double cx0 = 1.0, cr0 = 0.5, cx1 = 3.0, cr1 = 1.0, ca0 = 0.0, cb0 = 0.75;
  int samples = 100;
  conept->add_option("--x0", cx0);
  conept->add_option("--r0", cr0)->check(CLI::PositiveNumber);
  conept->add_option("--x1", cx1);
  conept->add_option("--r1", cr1)->check(CLI::PositiveNumber);
  conept->add_option("--a0", ca0, "spatial component of the tangent");
  conept->add_option("--b0", cb0, "radial component of the tangent");
  conept->add_option("--samples", samples)->check(CLI::PositiveNumber);
  conept->add_option("--out", out, "trajectory CSV (stdout if omitted)");

  auto* exper = app.add_subcommand("experiment", "seeded simulations");
  std::string exp_name;
  exper->add_option("name", exp_name,
                    "mass-growth | mean-shift | cov-change | interpolation | "
                    "cone-pt")
      ->required();
  std::uint64_t seed = 0;
  exper->add_option("--seed", seed, "RNG seed");
  exper->add_option("--out", out, "artifact directory");
  ExperimentConfig ecfg;
  exper->add_option("--n-steps", ecfg.n_steps)->check(CLI::PositiveNumber);
  int M1 = 2000, M2 = 1000, M3 = 500, n = 1000, n0 = 1000, n1 = 2000;
  double variance = 2.0;
  std::vector<double> means = {-0.25, 0.0, 0.35};
  std::vector<double> variances = {0.01, 0.01, 0.02};
  exper->add_option("--M1", M1)->check(CLI::PositiveNumber);
  exper->add_option("--M2", M2)->check(CLI::PositiveNumber);
  exper->add_option("--M3", M3)->check(CLI::PositiveNumber);
  exper->add_option("--n", n)->check(CLI::PositiveNumber);
  exper->add_option("--n0", n0)->check(CLI::PositiveNumber);
  exper->add_option("--n1", n1)->check(CLI::PositiveNumber);
  exper->add_option("--variance", variance)->check(CLI::PositiveNumber);
  exper->add_option("--means", means, "three cloud means")->expected(3);
  exper->add_option("--variances", variances, "three cloud variances")
      ->expected(3);
  add_solver_flags(exper, ecfg.solver);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (dist->parsed()) {
    const auto a = load_measure(in0);
    const auto b = load_measure(in1);
    const auto sol = solve_let(a, b, scfg);
    if (!sol.converged)
      log_info("solver stopped at iteration cap (reporting best iterate)");
    std::printf("%.12g\n", sol.hk_distance);
    return 0;
  }

  if (logc->parsed()) {
    const auto a = load_measure(in0);
    const auto b = load_measure(in1);
    const auto sol = solve_let(a, b, scfg);
    const HKTangent u =
        hk_log(a, b, sol, dt,
               barycentric ? TangentMode::Barycentric : TangentMode::Edgewise);
    save_tangent(out, u);
    return 0;
  }

  if (expc->parsed()) {
    const HKTangent u = load_tangent(tangent_file);
    ExpDiagnostics diag;
    const DiscreteMeasure result = hk_exp(u.anchor, u, t_value, &diag);
    if (diag.dropped_atoms > 0)
      log_info("exp map dropped %d atoms carrying mass %.6g",
               diag.dropped_atoms, diag.dropped_mass);
    save_measure(out, result);
    return 0;
  }

  if (interp->parsed()) {
    const auto a = load_measure(in0);
    const auto b = load_measure(in1);
    const auto sol = solve_let(a, b, scfg);
    const std::string dir = need_dir(out);
    int idx = 0;
    for (double t : parse_times(times_spec)) {
      auto [base, cone] = hk_interpolate(a, b, sol, t, prune);
      save_measure(dir + "base_" + std::to_string(idx) + ".csv", base);
      save_cone_measure(dir + "cone_" + std::to_string(idx) + ".csv", cone);
      ++idx;
    }
    return 0;
  }

  if (lift->parsed() || pt->parsed()) {
    const auto a = load_measure(in0);
    const auto b = load_measure(in1);
    LiftConfig lcfg;
    lcfg.solver = scfg;
    lcfg.plan_prune_rel = prune;
    lcfg.mode =
        characteristic ? LiftMode::Characteristic : LiftMode::Resolve;
    const std::string dir = need_dir(out);
    if (lift->parsed()) {
      const LiftedPath path = isometric_lift(a, b, n_steps, lcfg);
      for (int k = 0; k <= n_steps; ++k) {
        save_measure(dir + "base_" + std::to_string(k) + ".csv",
                     path.base_measures[k]);
        save_cone_measure(dir + "cone_" + std::to_string(k) + ".csv",
                          path.measures[k]);
        if (k < n_steps)
          save_cone_field(dir + "tangent_" + std::to_string(k) + ".csv",
                          path.tangents[k]);
      }
    } else {
      const HKTangent u = load_tangent(tangent_file);
      const TransportResult res = hk_parallel_transport(a, b, u, n_steps, lcfg);
      save_tangent(dir + "transported.csv", res.transported);
      save_trace(dir + "norms.csv", "field_norm", res.per_step_norms);
    }
    return 0;
  }

  if (conept->parsed()) {
    Vec x0(1), x1(1);
    x0 << cx0;
    x1 << cx1;
    const ConeGeodesic g = make_geodesic(ConePoint(x0, cr0),
                                         ConePoint(x1, cr1));
    ConeTangentVec u0;
    u0.base = g.z0;
    u0.a = Vec::Constant(1, ca0);
    u0.b = cb0;
    std::ostringstream body;
    body.precision(17);
    body << "t,x,r,a,b\n";
    for (int k = 0; k < samples; ++k) {
      const double t = samples == 1 ? 0.0 : double(k) / (samples - 1);
      const ConeTangentVec ut = cone_parallel_transport(g, u0, t);
      body << t << "," << ut.base.x[0] << "," << ut.base.r << "," << ut.a[0]
           << "," << ut.b << "\n";
    }
    if (out.empty()) {
      std::cout << body.str();
    } else {
      std::ofstream f(out);
      if (!f) fail(ErrorKind::Io, "cannot write " + out);
      f << body.str();
    }
    return 0;
  }

  if (exper->parsed()) {
    ecfg.out_dir = out;
    ExperimentReport rep;
    if (exp_name == "mass-growth")
      rep = exp_mass_growth(seed, M1, M2, M3, variance, ecfg);
    else if (exp_name == "mean-shift")
      rep = exp_mean_shift(seed, n, {means[0], means[1], means[2]}, variance,
                           ecfg);
    else if (exp_name == "cov-change")
      rep = exp_cov_change(seed, n, {variances[0], variances[1], variances[2]},
                           ecfg);
    else if (exp_name == "interpolation")
      rep = exp_interpolation(seed, n0, n1, ecfg);
    else if (exp_name == "cone-pt")
      rep = exp_cone_pt_figure(ecfg);
    else
      fail(ErrorKind::Usage, "unknown experiment '" + exp_name + "'");
    std::cout << rep.to_json_string() << "\n";
    return rep.passed ? 0 : 1;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const hk::Error& e) {
    hk::log_error("%s", e.what());
    switch (e.kind()) {
      case hk::ErrorKind::Usage:
        return 2;
      case hk::ErrorKind::Io:
        return 3;
      default:
        return 4;
    }
  } catch (const std::exception& e) {
    hk::log_error("%s", e.what());
    return 4;
  }
}
