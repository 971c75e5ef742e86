#include "hk/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hk/cone.hpp"
#include "hk/log.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace hk {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kInf = std::numeric_limits<double>::infinity();

// p log(p/q) - p + q, the integrand of F(p/q) q with F(s) = s log s - s + 1.
double kl_term(double p, double q) {
  if (p <= 0.0) return q;
  return p * std::log(p / q) - p + q;
}

struct Problem {
  Mat cost;    // n0 x n1, kInf where infeasible
  Mat cost_t;  // transpose, for cache-friendly row access
  Vec log_a, log_b;
  std::vector<char> row_feasible, col_feasible;
};

Problem build_problem(const Mat& cost, const Vec& a, const Vec& b) {
  Problem p;
  p.cost = cost;
  p.cost_t = cost.transpose();
  p.log_a = a.array().log();
  p.log_b = b.array().log();
  p.row_feasible.assign(cost.rows(), 0);
  p.col_feasible.assign(cost.cols(), 0);
  for (int i = 0; i < cost.rows(); ++i)
    for (int j = 0; j < cost.cols(); ++j)
      if (std::isfinite(cost(i, j))) {
        p.row_feasible[i] = 1;
        p.col_feasible[j] = 1;
      }
  return p;
}

// One log-sum-exp: lse(base - col / eps). Returns -inf when every entry is
// masked (cost +inf).
double masked_lse(const Vec& base, const auto& cost_col, double inv_eps,
                  Vec& buf) {
  buf = base - inv_eps * cost_col;
  const double m = buf.maxCoeff();
  if (!std::isfinite(m)) return -kInf;
  return m + std::log((buf.array() - m).exp().sum());
}

// Alternating scaling updates at a fixed epsilon. lf, lg are log-scalings
// (dual potentials divided by epsilon). `damping` is 1/(1+eps) for the
// KL-relaxed problem and 1 for balanced marginals.
struct StageResult {
  int iterations = 0;
  bool converged = false;
};

StageResult run_stage(const Problem& p, double eps, double damping,
                      double tol, int max_iters, int threads, Vec& lf,
                      Vec& lg) {
  const int n0 = static_cast<int>(p.cost.rows());
  const int n1 = static_cast<int>(p.cost.cols());
  const double inv_eps = 1.0 / eps;
#ifdef _OPENMP
  const int nthreads = std::max(1, threads);
#else
  (void)threads;
  const int nthreads = 1;
#endif
  std::vector<Vec> bufs(nthreads);
  for (auto& b : bufs) b.resize(std::max(n0, n1));

  StageResult res;
  for (int it = 0; it < max_iters; ++it) {
    double err = 0.0;
    Vec rhs_b = p.log_b + lg;
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(nthreads) \
    reduction(max : err) if (nthreads > 1)
#endif
    for (int i = 0; i < n0; ++i) {
      if (!p.row_feasible[i]) continue;
#ifdef _OPENMP
      Vec& buf = bufs[omp_get_thread_num()];
#else
      Vec& buf = bufs[0];
#endif
      const double lse = masked_lse(rhs_b, p.cost_t.col(i), inv_eps, buf);
      const double next = -damping * lse;
      err = std::max(err, std::abs(next - lf[i]));
      lf[i] = next;
    }
    Vec rhs_a = p.log_a + lf;
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(nthreads) \
    reduction(max : err) if (nthreads > 1)
#endif
    for (int j = 0; j < n1; ++j) {
      if (!p.col_feasible[j]) continue;
#ifdef _OPENMP
      Vec& buf = bufs[omp_get_thread_num()];
#else
      Vec& buf = bufs[0];
#endif
      const double lse = masked_lse(rhs_a, p.cost.col(j), inv_eps, buf);
      const double next = -damping * lse;
      err = std::max(err, std::abs(next - lg[j]));
      lg[j] = next;
    }
    ++res.iterations;
    if (err < tol) {
      res.converged = true;
      break;
    }
  }
  return res;
}

Mat extract_plan(const Problem& p, double eps, const Vec& lf, const Vec& lg) {
  const int n0 = static_cast<int>(p.cost.rows());
  const int n1 = static_cast<int>(p.cost.cols());
  Mat plan(n0, n1);
  const double inv_eps = 1.0 / eps;
  for (int j = 0; j < n1; ++j)
    for (int i = 0; i < n0; ++i) {
      const double c = p.cost(i, j);
      plan(i, j) = std::isfinite(c)
                       ? std::exp(p.log_a[i] + lf[i] + p.log_b[j] + lg[j] -
                                  c * inv_eps)
                       : 0.0;
    }
  return plan;
}

// E(pi) without the entropy term: marginal KL penalties plus transport cost.
double energy(const Mat& cost, const Mat& plan, const Vec& a, const Vec& b) {
  const int n0 = static_cast<int>(cost.rows());
  const int n1 = static_cast<int>(cost.cols());
  double e = 0.0;
  for (int i = 0; i < n0; ++i) e += kl_term(plan.row(i).sum(), a[i]);
  for (int j = 0; j < n1; ++j) e += kl_term(plan.col(j).sum(), b[j]);
  for (int j = 0; j < n1; ++j)
    for (int i = 0; i < n0; ++i)
      if (plan(i, j) > 0.0) e += cost(i, j) * plan(i, j);
  return e;
}

std::vector<double> anneal_schedule(const SolverConfig& cfg) {
  std::vector<double> eps;
  double e = std::max(cfg.epsilon_start, cfg.epsilon_min);
  eps.push_back(e);
  while (e > cfg.epsilon_min) {
    e = std::max(e * cfg.anneal_factor, cfg.epsilon_min);
    eps.push_back(e);
  }
  return eps;
}

}  // namespace

double ground_cost(const Eigen::RowVectorXd& x, const Eigen::RowVectorXd& y) {
  if (x.size() != y.size())
    fail(ErrorKind::DimensionMismatch, "ground_cost dimension mismatch");
  const double L = (x - y).norm();
  if (L >= kPi / 2.0) return kInf;
  return -2.0 * std::log(std::cos(L));
}

LetSolution solve_let(const DiscreteMeasure& mu0, const DiscreteMeasure& mu1,
                      const SolverConfig& cfg) {
  if (mu0.empty() || mu1.empty())
    fail(ErrorKind::EmptyMeasure, "solve_let requires nonempty measures");
  if (mu0.dim() != mu1.dim())
    fail(ErrorKind::DimensionMismatch, "solve_let dimension mismatch");
  const int n0 = mu0.size(), n1 = mu1.size();

  Mat cost(n0, n1);
  bool any_feasible = false;
  double max_cross = 0.0;
  for (int j = 0; j < n1; ++j)
    for (int i = 0; i < n0; ++i) {
      cost(i, j) = ground_cost(mu0.point(i), mu1.point(j));
      if (std::isfinite(cost(i, j))) any_feasible = true;
      max_cross = std::max(max_cross, (mu0.point(i) - mu1.point(j)).norm());
    }
  if (!any_feasible)
    fail(ErrorKind::NoFeasiblePair,
         "every atom pair is at distance >= pi/2 (pure-Hellinger regime)");
  const double diam = std::max({max_cross, mu0.size() > 1 ? support_diameter(mu0) : 0.0,
                                mu1.size() > 1 ? support_diameter(mu1) : 0.0});
  if (diam >= kPi / 2.0)
    log_info("combined support diameter %.6f >= pi/2; reaction-only mass may appear",
             diam);

  Problem p = build_problem(cost, mu0.masses(), mu1.masses());
  Vec lf = Vec::Zero(n0), lg = Vec::Zero(n1);

  LetSolution sol;
  double prev_eps = 0.0;
  for (double eps : anneal_schedule(cfg)) {
    if (prev_eps > 0.0) {
      // keep dual potentials continuous across the stage change
      const double ratio = prev_eps / eps;
      lf *= ratio;
      lg *= ratio;
    }
    const double damping = 1.0 / (1.0 + eps);
    StageResult st = run_stage(p, eps, damping, cfg.tol, cfg.max_iters,
                               cfg.threads, lf, lg);
    sol.iterations += st.iterations;
    sol.converged = st.converged;
    sol.epsilon_final = eps;
    Mat plan = extract_plan(p, eps, lf, lg);
    sol.stage_energies.push_back(energy(cost, plan, mu0.masses(), mu1.masses()));
    prev_eps = eps;
    log_debug("let stage eps=%.3e iters=%d converged=%d E=%.12e", eps,
              st.iterations, int(st.converged), sol.stage_energies.back());
  }

  sol.coupling.weights = extract_plan(p, sol.epsilon_final, lf, lg);
  sol.coupling.source_marginal = sol.coupling.weights.rowwise().sum();
  sol.coupling.target_marginal = sol.coupling.weights.colwise().sum();
  const double e = sol.stage_energies.back();
  sol.hk_distance = std::sqrt(std::max(e, 0.0));

  sol.u_source = Vec::Zero(n0);
  sol.u_target = Vec::Zero(n1);
  for (int i = 0; i < n0; ++i) {
    const double m = sol.coupling.source_marginal[i];
    if (m <= 1e-15 * mu0.mass(i))
      sol.zero_marginal_rows.push_back(i);
    else
      sol.u_source[i] = mu0.mass(i) / m;
  }
  for (int j = 0; j < n1; ++j) {
    const double m = sol.coupling.target_marginal[j];
    if (m <= 1e-15 * mu1.mass(j))
      sol.zero_marginal_cols.push_back(j);
    else
      sol.u_target[j] = mu1.mass(j) / m;
  }
  return sol;
}

Mat barycentric_map(const LetSolution& sol, const DiscreteMeasure& mu0,
                    const DiscreteMeasure& mu1) {
  const int n0 = mu0.size();
  Mat out(n0, mu1.dim());
  for (int i = 0; i < n0; ++i) {
    const double m = sol.coupling.source_marginal[i];
    if (m <= 1e-15 * mu0.mass(i))
      fail(ErrorKind::ZeroMarginal,
           "barycentric_map: zero marginal at source atom " +
               std::to_string(i));
    out.row(i) = (sol.coupling.weights.row(i) * mu1.points()) / m;
  }
  return out;
}

std::pair<Vec, Vec> density_factors(const LetSolution& sol,
                                    const DiscreteMeasure& mu0,
                                    const DiscreteMeasure& mu1) {
  if (!sol.zero_marginal_rows.empty())
    fail(ErrorKind::ZeroMarginal,
         "density_factors: zero marginal at source atom " +
             std::to_string(sol.zero_marginal_rows.front()));
  if (!sol.zero_marginal_cols.empty())
    fail(ErrorKind::ZeroMarginal,
         "density_factors: zero marginal at target atom " +
             std::to_string(sol.zero_marginal_cols.front()));
  return {sol.u_source, sol.u_target};
}

BalancedSolution cone_wasserstein(const ConeMeasure& lambda0,
                                  const ConeMeasure& lambda1,
                                  const SolverConfig& cfg) {
  if (lambda0.empty() || lambda1.empty())
    fail(ErrorKind::EmptyMeasure, "cone_wasserstein requires nonempty inputs");
  const double m0 = total_mass(lambda0), m1 = total_mass(lambda1);
  if (std::abs(m0 - m1) > 1e-9 * std::max(m0, m1))
    fail(ErrorKind::Solver,
         "cone_wasserstein requires equal total masses");
  const int n0 = lambda0.size(), n1 = lambda1.size();
  Mat cost(n0, n1);
  for (int j = 0; j < n1; ++j) {
    const ConePoint zj = lambda1.atom(j);
    for (int i = 0; i < n0; ++i) {
      const double d = cone_distance(lambda0.atom(i), zj);
      cost(i, j) = d * d;
    }
  }

  Problem p = build_problem(cost, lambda0.masses(), lambda1.masses());
  Vec lf = Vec::Zero(n0), lg = Vec::Zero(n1);
  BalancedSolution out;
  double prev_eps = 0.0;
  for (double eps : anneal_schedule(cfg)) {
    if (prev_eps > 0.0) {
      const double ratio = prev_eps / eps;
      lf *= ratio;
      lg *= ratio;
    }
    StageResult st = run_stage(p, eps, /*damping=*/1.0, cfg.tol,
                               cfg.max_iters, cfg.threads, lf, lg);
    out.iterations += st.iterations;
    out.converged = st.converged;
    prev_eps = eps;
  }
  Mat plan = extract_plan(p, prev_eps, lf, lg);

  // Round to exact marginals so the reported cost is primal-feasible.
  const Vec& a = lambda0.masses();
  const Vec& b = lambda1.masses();
  Vec row = plan.rowwise().sum();
  for (int i = 0; i < n0; ++i)
    if (row[i] > a[i]) plan.row(i) *= a[i] / row[i];
  Vec col = plan.colwise().sum();
  for (int j = 0; j < n1; ++j)
    if (col[j] > b[j]) plan.col(j) *= b[j] / col[j];
  Vec def_r = a - plan.rowwise().sum();
  Vec def_c = b - plan.colwise().sum();
  const double deficit = def_r.sum();
  if (deficit > 0.0) plan += (def_r * def_c.transpose()) / deficit;

  double w2 = 0.0;
  for (int j = 0; j < n1; ++j)
    for (int i = 0; i < n0; ++i) w2 += cost(i, j) * plan(i, j);
  out.distance = std::sqrt(std::max(w2, 0.0));
  return out;
}

}  // namespace hk
