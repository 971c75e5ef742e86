#include "hk/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <vector>

#include "json.hpp"

#include "hk/io.hpp"
#include "hk/log.hpp"
#include "hk/maps.hpp"
#include "hk/rng.hpp"
#include "hk/transport.hpp"

namespace hk {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kDiameterTarget = 1.5;  // strictly inside pi/2

DiscreteMeasure sample_gaussian_cloud(Rng& rng, int n, double mean,
                                      double variance) {
  Mat pts(n, 1);
  for (int i = 0; i < n; ++i)
    pts(i, 0) = rng.normal(mean, std::sqrt(variance));
  return DiscreteMeasure(std::move(pts), Vec::Ones(n));
}

// One common centroid-anchored rescale so the union of all clouds fits the
// diameter budget; relative geometry between clouds is preserved.
double common_rescale(std::vector<DiscreteMeasure*> clouds, double target) {
  int n = 0;
  for (auto* c : clouds) n += c->size();
  Mat pool(n, clouds.front()->dim());
  Vec ms(n);
  int at = 0;
  for (auto* c : clouds) {
    pool.middleRows(at, c->size()) = c->points();
    ms.segment(at, c->size()) = c->masses();
    at += c->size();
  }
  DiscreteMeasure pooled(pool, ms);
  const double diam = support_diameter(pooled);
  if (diam <= target) return 1.0;
  const double scale = target / diam;
  Eigen::RowVectorXd centroid =
      (pooled.masses().transpose() * pooled.points()) / total_mass(pooled);
  for (auto* c : clouds) {
    Mat pts = c->points();
    pts.rowwise() -= centroid;
    pts *= scale;
    pts.rowwise() += centroid;
    *c = DiscreteMeasure(std::move(pts), c->masses());
  }
  return scale;
}

double second_central_moment(const DiscreteMeasure& m) {
  const double tm = total_mass(m);
  Eigen::RowVectorXd mean = (m.masses().transpose() * m.points()) / tm;
  double s = 0.0;
  for (int i = 0; i < m.size(); ++i)
    s += m.mass(i) * (m.point(i) - mean).squaredNorm();
  return s / tm;
}

double mean1d(const DiscreteMeasure& m) {
  return (m.masses().transpose() * m.points())(0, 0) / total_mass(m);
}

bool norms_non_increasing(const std::vector<double>& norms, double slack) {
  for (size_t k = 1; k < norms.size(); ++k)
    if (norms[k] > norms[k - 1] * (1.0 + slack)) return false;
  return true;
}

std::string maybe_dir(const ExperimentConfig& cfg) {
  if (cfg.out_dir.empty()) return {};
  std::filesystem::create_directories(cfg.out_dir);
  return cfg.out_dir + "/";
}

// Share of the radial variance that lives inside position clusters
// (1-d clouds, single-linkage clustering at pos_tol). Zero means the radius
// is a function of the base point at this resolution; values near one mean
// the conditional radial law genuinely spreads.
double radial_mixing_score(const ConeMeasure& lambda, double pos_tol) {
  const int n = lambda.size();
  if (n == 0) return 0.0;
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return lambda.points()(a, 0) < lambda.points()(b, 0);
  });
  double total_mass_sum = 0.0, mean_r = 0.0;
  for (int i = 0; i < n; ++i) {
    total_mass_sum += lambda.mass(i);
    mean_r += lambda.mass(i) * lambda.radii()[i];
  }
  mean_r /= total_mass_sum;
  double total_var = 0.0;
  for (int i = 0; i < n; ++i) {
    const double d = lambda.radii()[i] - mean_r;
    total_var += lambda.mass(i) * d * d;
  }
  total_var /= total_mass_sum;
  if (total_var <= 1e-30) return 0.0;

  double within = 0.0;
  size_t lo = 0;
  while (lo < order.size()) {
    size_t hi = lo + 1;
    while (hi < order.size() &&
           lambda.points()(order[hi], 0) - lambda.points()(order[hi - 1], 0) <=
               pos_tol)
      ++hi;
    double cm = 0.0, cr = 0.0;
    for (size_t k = lo; k < hi; ++k) {
      cm += lambda.mass(order[k]);
      cr += lambda.mass(order[k]) * lambda.radii()[order[k]];
    }
    cr /= cm;
    for (size_t k = lo; k < hi; ++k) {
      const double d = lambda.radii()[order[k]] - cr;
      within += lambda.mass(order[k]) * d * d;
    }
    lo = hi;
  }
  within /= total_mass_sum;
  return std::sqrt(within / total_var);
}

void moment_block(ExperimentReport& rep, const std::string& tag,
                  const DiscreteMeasure& m) {
  rep.metrics["mass_" + tag] = total_mass(m);
  rep.metrics["mean_" + tag] = mean1d(m);
  rep.metrics["m2_" + tag] = second_central_moment(m);
}

// Shared three-cloud pipeline: tangent log(mu2 -> mu3) transported to mu1,
// then mu4 = exp(mu1, transported).
struct ParallelRun {
  DiscreteMeasure mu4;
  TransportResult transport;
  LetSolution sol23;
  HKTangent u;
};

ParallelRun run_parallel_pipeline(const DiscreteMeasure& mu1,
                                  const DiscreteMeasure& mu2,
                                  const DiscreteMeasure& mu3,
                                  const ExperimentConfig& cfg) {
  ParallelRun out;
  out.sol23 = solve_let(mu2, mu3, cfg.solver);
  out.u = hk_log(mu2, mu3, out.sol23, 1.0);
  LiftConfig lift;
  lift.solver = cfg.solver;
  lift.mode = LiftMode::Characteristic;
  lift.plan_prune_rel = cfg.plan_prune_rel;
  out.transport = hk_parallel_transport(mu2, mu1, out.u, cfg.n_steps, lift);
  out.mu4 = hk_exp(out.transport.transported.anchor, out.transport.transported,
                   1.0);
  return out;
}

}  // namespace

std::string ExperimentReport::to_json_string() const {
  nlohmann::json j;
  j["name"] = name;
  j["seed"] = seed;
  j["rng"] = rng;
  j["parameters"] = parameters;
  j["metrics"] = metrics;
  j["artifacts"] = artifacts;
  j["passed"] = passed;
  return j.dump(2);
}

void ExperimentReport::write_json(const std::string& path) const {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Io, "cannot write " + path);
  out << to_json_string() << "\n";
}

ExperimentReport exp_mass_growth(std::uint64_t seed, int M1, int M2, int M3,
                                 double variance,
                                 const ExperimentConfig& cfg) {
  if (M1 < 1 || M2 < 1 || M3 < 1)
    fail(ErrorKind::Usage, "mass-growth: counts must be >= 1");
  ExperimentReport rep;
  rep.name = "mass-growth";
  rep.seed = seed;
  rep.parameters = {{"M1", double(M1)}, {"M2", double(M2)},
                    {"M3", double(M3)}, {"variance", variance},
                    {"n_steps", double(cfg.n_steps)}};

  Rng rng(seed);
  DiscreteMeasure mu1 = sample_gaussian_cloud(rng, M1, 0.0, variance);
  DiscreteMeasure mu2 = sample_gaussian_cloud(rng, M2, 0.0, variance);
  DiscreteMeasure mu3 = sample_gaussian_cloud(rng, M3, 0.0, variance);
  common_rescale({&mu1, &mu2, &mu3}, kDiameterTarget);

  ParallelRun run = run_parallel_pipeline(mu1, mu2, mu3, cfg);

  const double beta23 = 0.5 * (std::sqrt(double(M3) / M2) - 1.0);
  const double beta_pt = beta23 * std::sqrt(double(M2) / M1);
  const double predicted = M1 * std::pow(2.0 * beta_pt + 1.0, 2.0);
  const double mu4_mass = total_mass(run.mu4);

  rep.metrics["mu4_mass"] = mu4_mass;
  rep.metrics["predicted_mass"] = predicted;
  rep.metrics["rel_error"] = std::abs(mu4_mass - predicted) / predicted;
  rep.metrics["beta23"] = beta23;
  rep.metrics["beta_pt"] = beta_pt;
  rep.metrics["hk_23"] = run.sol23.hk_distance;
  rep.metrics["tangent_norm"] = hk_norm(run.u);
  rep.metrics["norm_nonincreasing"] =
      norms_non_increasing(run.transport.per_step_norms, 1e-9) ? 1.0 : 0.0;
  moment_block(rep, "mu1", mu1);
  moment_block(rep, "mu2", mu2);
  moment_block(rep, "mu3", mu3);
  moment_block(rep, "mu4", run.mu4);

  rep.passed = rep.metrics["rel_error"] <= 0.05 &&
               rep.metrics["norm_nonincreasing"] == 1.0;

  if (const std::string dir = maybe_dir(cfg); !dir.empty()) {
    save_measure(dir + "mu1.csv", mu1);
    save_measure(dir + "mu2.csv", mu2);
    save_measure(dir + "mu3.csv", mu3);
    save_measure(dir + "mu4.csv", run.mu4);
    save_tangent(dir + "transported.csv", run.transport.transported);
    save_trace(dir + "norms.csv", "field_norm", run.transport.per_step_norms);
    rep.artifacts = {dir + "mu1.csv", dir + "mu2.csv", dir + "mu3.csv",
                     dir + "mu4.csv", dir + "transported.csv",
                     dir + "norms.csv"};
    rep.write_json(dir + "report.json");
    rep.artifacts.push_back(dir + "report.json");
  }
  return rep;
}

ExperimentReport exp_mean_shift(std::uint64_t seed, int n,
                                std::array<double, 3> means, double variance,
                                const ExperimentConfig& cfg) {
  if (n < 1) fail(ErrorKind::Usage, "mean-shift: n must be >= 1");
  ExperimentReport rep;
  rep.name = "mean-shift";
  rep.seed = seed;
  rep.parameters = {{"n", double(n)},        {"mean1", means[0]},
                    {"mean2", means[1]},     {"mean3", means[2]},
                    {"variance", variance},  {"n_steps", double(cfg.n_steps)}};

  Rng rng(seed);
  DiscreteMeasure mu1 = sample_gaussian_cloud(rng, n, means[0], variance);
  DiscreteMeasure mu2 = sample_gaussian_cloud(rng, n, means[1], variance);
  DiscreteMeasure mu3 = sample_gaussian_cloud(rng, n, means[2], variance);
  common_rescale({&mu1, &mu2, &mu3}, kDiameterTarget);

  ParallelRun run = run_parallel_pipeline(mu1, mu2, mu3, cfg);

  const double hk23 = run.sol23.hk_distance;
  const double hk14 = solve_let(mu1, run.mu4, cfg.solver).hk_distance;
  rep.metrics["hk_14"] = hk14;
  rep.metrics["hk_23"] = hk23;
  rep.metrics["rel_gap"] = std::abs(hk14 - hk23) / hk23;
  rep.metrics["norm_nonincreasing"] =
      norms_non_increasing(run.transport.per_step_norms, 1e-9) ? 1.0 : 0.0;
  moment_block(rep, "mu1", mu1);
  moment_block(rep, "mu2", mu2);
  moment_block(rep, "mu3", mu3);
  moment_block(rep, "mu4", run.mu4);

  rep.passed = rep.metrics["rel_gap"] <= 0.02 &&
               rep.metrics["norm_nonincreasing"] == 1.0;

  if (const std::string dir = maybe_dir(cfg); !dir.empty()) {
    save_measure(dir + "mu1.csv", mu1);
    save_measure(dir + "mu2.csv", mu2);
    save_measure(dir + "mu3.csv", mu3);
    save_measure(dir + "mu4.csv", run.mu4);
    save_trace(dir + "norms.csv", "field_norm", run.transport.per_step_norms);
    rep.artifacts = {dir + "mu1.csv", dir + "mu2.csv", dir + "mu3.csv",
                     dir + "mu4.csv", dir + "norms.csv"};
    rep.write_json(dir + "report.json");
    rep.artifacts.push_back(dir + "report.json");
  }
  return rep;
}

ExperimentReport exp_cov_change(std::uint64_t seed, int n,
                                std::array<double, 3> variances,
                                const ExperimentConfig& cfg) {
  if (n < 1) fail(ErrorKind::Usage, "cov-change: n must be >= 1");
  ExperimentReport rep;
  rep.name = "cov-change";
  rep.seed = seed;
  rep.parameters = {{"n", double(n)},          {"var1", variances[0]},
                    {"var2", variances[1]},    {"var3", variances[2]},
                    {"n_steps", double(cfg.n_steps)}};

  Rng rng(seed);
  DiscreteMeasure mu1 = sample_gaussian_cloud(rng, n, 0.0, variances[0]);
  DiscreteMeasure mu2 = sample_gaussian_cloud(rng, n, 0.0, variances[1]);
  DiscreteMeasure mu3 = sample_gaussian_cloud(rng, n, 0.0, variances[2]);
  common_rescale({&mu1, &mu2, &mu3}, kDiameterTarget);

  ParallelRun run = run_parallel_pipeline(mu1, mu2, mu3, cfg);

  moment_block(rep, "mu1", mu1);
  moment_block(rep, "mu2", mu2);
  moment_block(rep, "mu3", mu3);
  moment_block(rep, "mu4", run.mu4);
  const double r_out = rep.metrics["m2_mu4"] / rep.metrics["m2_mu1"];
  const double r_in = rep.metrics["m2_mu3"] / rep.metrics["m2_mu2"];
  rep.metrics["moment_ratio_out"] = r_out;
  rep.metrics["moment_ratio_in"] = r_in;
  rep.metrics["ratio_consistency"] = r_out / r_in;
  rep.metrics["mass_variation"] =
      std::abs(total_mass(run.mu4) - total_mass(mu1)) / total_mass(mu1);
  rep.metrics["norm_nonincreasing"] =
      norms_non_increasing(run.transport.per_step_norms, 1e-9) ? 1.0 : 0.0;
  rep.passed = rep.metrics["norm_nonincreasing"] == 1.0;

  if (const std::string dir = maybe_dir(cfg); !dir.empty()) {
    save_measure(dir + "mu1.csv", mu1);
    save_measure(dir + "mu2.csv", mu2);
    save_measure(dir + "mu3.csv", mu3);
    save_measure(dir + "mu4.csv", run.mu4);
    rep.artifacts = {dir + "mu1.csv", dir + "mu2.csv", dir + "mu3.csv",
                     dir + "mu4.csv"};
    rep.write_json(dir + "report.json");
    rep.artifacts.push_back(dir + "report.json");
  }
  return rep;
}

ExperimentReport exp_interpolation(std::uint64_t seed, int n0, int n1,
                                   const ExperimentConfig& cfg) {
  if (n0 < 1 || n1 < 1)
    fail(ErrorKind::Usage, "interpolation: counts must be >= 1");
  ExperimentReport rep;
  rep.name = "interpolation";
  rep.seed = seed;
  rep.parameters = {{"n0", double(n0)},
                    {"n1", double(n1)},
                    {"n_steps", double(cfg.n_steps)}};

  Rng rng(seed);
  DiscreteMeasure mu0 = sample_gaussian_cloud(rng, n0, -0.5, 0.1);
  DiscreteMeasure mu1 = sample_gaussian_cloud(rng, n1, 0.5, 0.1);
  common_rescale({&mu0, &mu1}, kDiameterTarget);

  const int N = cfg.n_steps;
  LetSolution sol = solve_let(mu0, mu1, cfg.solver);
  const double pos_tol = kDiameterTarget / 200.0;
  const double score_cut = 0.1;

  const std::string dir = maybe_dir(cfg);
  int let_det = 0;
  double let_score_max = 0.0;
  for (int k = 0; k <= N; ++k) {
    const double t = double(k) / N;
    auto [base, cone] = hk_interpolate(mu0, mu1, sol, t, cfg.plan_prune_rel);
    const double score = radial_mixing_score(cone, pos_tol);
    let_score_max = std::max(let_score_max, score);
    if (score < score_cut) ++let_det;
    if (!dir.empty()) {
      save_measure(dir + "let_base_" + std::to_string(k) + ".csv", base);
      save_cone_measure(dir + "let_cone_" + std::to_string(k) + ".csv", cone);
    }
    if (k == 0) rep.metrics["mass_t0"] = total_mass(base);
    if (k == N) rep.metrics["mass_t1"] = total_mass(base);
  }
  rep.metrics["let_deterministic_steps"] = let_det;
  rep.metrics["let_mixing_score_max"] = let_score_max;

  LiftConfig lift;
  lift.solver = cfg.solver;
  lift.mode = LiftMode::Characteristic;
  lift.plan_prune_rel = cfg.plan_prune_rel;
  LiftedPath path = isometric_lift(mu0, mu1, N, lift);
  int iso_det = 0;
  int iso_strict = 0;
  double iso_score_max = 0.0;
  for (int k = 0; k <= N; ++k) {
    const double score = radial_mixing_score(path.measures[k], pos_tol);
    iso_score_max = std::max(iso_score_max, score);
    if (score < score_cut) ++iso_det;
    if (path.measures[k].deterministic_radial()) ++iso_strict;
    if (!dir.empty()) {
      save_measure(dir + "iso_base_" + std::to_string(k) + ".csv",
                   path.base_measures[k]);
      save_cone_measure(dir + "iso_cone_" + std::to_string(k) + ".csv",
                        path.measures[k]);
    }
  }
  rep.metrics["iso_deterministic_steps"] = iso_det;
  rep.metrics["iso_strict_deterministic_steps"] = iso_strict;
  rep.metrics["iso_mixing_score_max"] = iso_score_max;
  rep.metrics["mass_mu0"] = total_mass(mu0);
  rep.metrics["mass_mu1"] = total_mass(mu1);

  const double m0err =
      std::abs(rep.metrics["mass_t0"] - rep.metrics["mass_mu0"]);
  const double m1err =
      std::abs(rep.metrics["mass_t1"] - rep.metrics["mass_mu1"]);
  rep.passed = iso_det == N + 1 && iso_strict == N + 1 &&
               m0err <= 1e-9 * total_mass(mu0) &&
               m1err <= 1e-9 * total_mass(mu1);

  if (!dir.empty()) {
    rep.write_json(dir + "report.json");
    rep.artifacts.push_back(dir + "report.json");
  }
  return rep;
}

ExperimentReport exp_cone_pt_figure(const ExperimentConfig& cfg) {
  ExperimentReport rep;
  rep.name = "cone-pt";
  rep.seed = 0;
  rep.parameters = {{"x0", 1.0}, {"r0", 0.5}, {"x1", 3.0},
                    {"r1", 1.0}, {"b0", 0.75}};

  Vec x0(1), x1(1);
  x0 << 1.0;
  x1 << 3.0;
  const ConePoint z0(x0, 0.5), z1(x1, 1.0);
  const ConeGeodesic g = make_geodesic(z0, z1);
  ConeTangentVec u0;
  u0.base = z0;
  u0.a = Vec::Zero(1);
  u0.b = 0.75;

  const int samples = 100;
  double max_dev = 0.0, max_drift = 0.0;
  const double norm0 = cone_norm(u0);
  std::vector<std::array<double, 5>> closed(samples), oracle(samples);
  for (int k = 0; k < samples; ++k) {
    const double t = double(k) / (samples - 1);
    const ConeTangentVec ut = cone_parallel_transport(g, u0, t);
    const ConeTangentVec uo = cone_pt_ode_oracle(g, u0, t);
    closed[k] = {t, ut.base.x[0], ut.base.r, ut.a[0], ut.b};
    oracle[k] = {t, uo.base.x[0], uo.base.r, uo.a[0], uo.b};
    max_dev = std::max({max_dev, std::abs(ut.a[0] - uo.a[0]),
                        std::abs(ut.b - uo.b)});
    max_drift = std::max(max_drift, std::abs(cone_norm(ut) - norm0));
  }
  rep.metrics["max_component_dev"] = max_dev;
  rep.metrics["norm_drift"] = max_drift;
  rep.passed = max_dev <= 1e-6 && max_drift <= 1e-10;

  if (const std::string dir = maybe_dir(cfg); !dir.empty()) {
    auto dump = [&](const std::string& p,
                    const std::vector<std::array<double, 5>>& rows) {
      std::ofstream out(p);
      if (!out) fail(ErrorKind::Io, "cannot write " + p);
      out.precision(17);
      out << "t,x,r,a,b\n";
      for (const auto& r : rows)
        out << r[0] << "," << r[1] << "," << r[2] << "," << r[3] << ","
            << r[4] << "\n";
    };
    dump(dir + "trajectory.csv", closed);
    dump(dir + "trajectory_ode.csv", oracle);
    rep.artifacts = {dir + "trajectory.csv", dir + "trajectory_ode.csv"};
    rep.write_json(dir + "report.json");
    rep.artifacts.push_back(dir + "report.json");
  }
  return rep;
}

}  // namespace hk
