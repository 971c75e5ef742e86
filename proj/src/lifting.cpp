#include "hk/lifting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "hk/log.hpp"

namespace hk {

namespace {

constexpr double kRadialFloor = 1e-8;

struct PairList {
  std::vector<int> src, tgt;
  std::vector<double> w;
  double pruned_mass = 0.0;
  int n0 = 0, n1 = 0;

  int size() const { return static_cast<int>(w.size()); }
};

// Keeps entries above prune_rel * max plus every row's and column's heaviest
// entry so all atoms stay represented.
PairList prune_plan(const Mat& plan, double prune_rel) {
  const int n0 = static_cast<int>(plan.rows());
  const int n1 = static_cast<int>(plan.cols());
  PairList out;
  out.n0 = n0;
  out.n1 = n1;
  const double thr = prune_rel * plan.maxCoeff();
  std::vector<int> row_arg(n0, -1), col_arg(n1, -1);
  for (int i = 0; i < n0; ++i) {
    double best = -1.0;
    for (int j = 0; j < n1; ++j)
      if (plan(i, j) > best) {
        best = plan(i, j);
        row_arg[i] = j;
      }
  }
  for (int j = 0; j < n1; ++j) {
    double best = -1.0;
    for (int i = 0; i < n0; ++i)
      if (plan(i, j) > best) {
        best = plan(i, j);
        col_arg[j] = i;
      }
  }
  for (int i = 0; i < n0; ++i)
    for (int j = 0; j < n1; ++j) {
      const double w = plan(i, j);
      if (w <= 0.0) continue;
      const bool keep = w > thr || row_arg[i] == j || col_arg[j] == i;
      if (keep) {
        out.src.push_back(i);
        out.tgt.push_back(j);
        out.w.push_back(w);
      } else {
        out.pruned_mass += w;
      }
    }
  return out;
}

ConePoint lifted_source(const DiscreteMeasure& mu0, const LetSolution& sol,
                        int i) {
  return ConePoint(mu0.point(i).transpose(), std::sqrt(sol.u_source[i]));
}

ConePoint lifted_target(const DiscreteMeasure& mu1, const LetSolution& sol,
                        int j) {
  return ConePoint(mu1.point(j).transpose(), std::sqrt(sol.u_target[j]));
}

void check_regime(const LetSolution& sol) {
  if (!sol.zero_marginal_rows.empty() || !sol.zero_marginal_cols.empty())
    fail(ErrorKind::SingularPart,
         "lift requires the reaction-transport regime: " +
             std::to_string(sol.zero_marginal_rows.size()) + " source / " +
             std::to_string(sol.zero_marginal_cols.size()) +
             " target atoms would couple to the apex");
}

// Per-edge local log-map quantities with 1/dt scaling.
void edge_tangent(const Eigen::RowVectorXd& from, const Eigen::RowVectorXd& to,
                  double ratio, double inv_dt, Eigen::RowVectorXd& v_out,
                  double& beta_out) {
  if (ratio <= 1e-12)
    fail(ErrorKind::NegativeRatio, "lift: nonpositive density ratio");
  const Eigen::RowVectorXd diff = to - from;
  const double L = diff.norm();
  const double root = std::sqrt(ratio);
  if (L < 1e-14)
    v_out.setZero();
  else
    v_out = (root * std::sin(L) * inv_dt / L) * diff;
  beta_out = 0.5 * inv_dt * (root * std::cos(L) - 1.0);
}

}  // namespace

double field_norm(const ConeTangentField& V) {
  double s = 0.0;
  for (int i = 0; i < V.anchor.size(); ++i) {
    const double r = V.anchor.radii()[i];
    s += V.anchor.mass(i) *
         (r * r * V.a.row(i).squaredNorm() + V.b[i] * V.b[i]);
  }
  return std::sqrt(s);
}

ConeTangentField lift_tangent(const HKTangent& u, const ConeMeasure& lambda) {
  const int n = lambda.size();
  if (u.anchor.size() != n || u.v.rows() != n)
    fail(ErrorKind::AtomMismatch,
         "lift_tangent: atom count mismatch between tangent and lift");
  for (int i = 0; i < n; ++i)
    if ((u.anchor.point(i) - lambda.points().row(i)).norm() > 1e-9)
      fail(ErrorKind::AtomMismatch,
           "lift_tangent: lifted atoms not aligned with the tangent anchor");
  ConeTangentField V;
  V.anchor = lambda;
  V.a = u.v;
  V.b = (2.0 * u.beta.array() * lambda.radii().array()).matrix();
  return V;
}

HKTangent project_tangent(const ConeTangentField& V) {
  const int n = V.anchor.size();
  HKTangent u;
  u.anchor = project_measure(V.anchor);
  if (u.anchor.size() != n)
    fail(ErrorKind::AtomMismatch,
         "project_tangent: lift is not deterministic-radial atom-to-atom");
  u.v = V.a;
  u.beta.resize(n);
  for (int i = 0; i < n; ++i) {
    const double r = V.anchor.radii()[i];
    if (r <= 0.0)
      fail(ErrorKind::ApexPoint, "project_tangent: apex atom");
    u.beta[i] = V.b[i] / (2.0 * r);
  }
  return u;
}

LetLift let_lift(const DiscreteMeasure& mu0, const DiscreteMeasure& mu1,
                 const LetSolution& sol) {
  check_regime(sol);
  const int n0 = mu0.size(), n1 = mu1.size();
  LetLift out;
  Vec r0(n0), r1(n1);
  for (int i = 0; i < n0; ++i) r0[i] = std::sqrt(sol.u_source[i]);
  for (int j = 0; j < n1; ++j) r1[j] = std::sqrt(sol.u_target[j]);
  out.lambda0 = ConeMeasure(mu0.points(), r0, sol.coupling.source_marginal);
  out.lambda1 = ConeMeasure(mu1.points(), r1, sol.coupling.target_marginal);
  out.cone_plan = sol.coupling;
  return out;
}

std::pair<DiscreteMeasure, ConeMeasure> hk_interpolate(
    const DiscreteMeasure& mu0, const DiscreteMeasure& mu1,
    const LetSolution& sol, double t, double prune_rel) {
  check_regime(sol);
  PairList pairs = prune_plan(sol.coupling.weights, prune_rel);
  const int m = pairs.size();
  Mat pts(m, mu0.dim());
  Vec radii(m), masses(m);
  for (int e = 0; e < m; ++e) {
    const ConePoint z = cone_geodesic_point(
        t, lifted_source(mu0, sol, pairs.src[e]),
        lifted_target(mu1, sol, pairs.tgt[e]));
    pts.row(e) = z.x.transpose();
    radii[e] = z.r;
    masses[e] = pairs.w[e];
  }
  ConeMeasure lambda_t(std::move(pts), std::move(radii), std::move(masses));
  return {project_measure(lambda_t), lambda_t};
}

namespace {

// Shared step assembly: given edges with aggregation weights m_ij (rows
// summing to lambda_k masses), set the next radii to sqrt(mass_{k+1}/m_j).
// This makes project(lambda_{k+1}) = mu_{k+1} and keeps the lambda masses
// equal to the coupling pushforward, so field norms telescope exactly.
ConeMeasure advance_lift(const DiscreteMeasure& base_next,
                         const LiftStep& step, const ConeMeasure& lambda_k) {
  const int n_next = base_next.size();
  Vec m_in = Vec::Zero(n_next);
  for (int e = 0; e < static_cast<int>(step.weight.size()); ++e)
    m_in[step.tgt[e]] += step.weight[e];
  Vec radii(n_next);
  for (int j = 0; j < n_next; ++j) {
    if (m_in[j] <= 1e-15)
      fail(ErrorKind::ZeroIncomingMass,
           "lift step: no incoming mass at atom " + std::to_string(j));
    radii[j] = std::sqrt(base_next.mass(j) / m_in[j]);
    if (radii[j] < kRadialFloor)
      fail(ErrorKind::RadialUnderflow,
           "lift step: radius " + std::to_string(radii[j]) + " at atom " +
               std::to_string(j));
  }
  return ConeMeasure(base_next.points(), std::move(radii), std::move(m_in));
}

void fill_primary(LiftStep& step, int n_src) {
  step.primary.assign(n_src, -1);
  std::vector<double> best(n_src, -1.0);
  for (int e = 0; e < static_cast<int>(step.weight.size()); ++e) {
    if (step.weight[e] > best[step.src[e]]) {
      best[step.src[e]] = step.weight[e];
      step.primary[step.src[e]] = step.tgt[e];
    }
  }
}

}  // namespace

LiftedPath isometric_lift(const DiscreteMeasure& mu0,
                          const DiscreteMeasure& mu1, int n_steps,
                          const LiftConfig& cfg) {
  if (n_steps < 1) fail(ErrorKind::Usage, "isometric_lift: n_steps >= 1");
  const int N = n_steps;
  const double dt = 1.0 / N;

  LetSolution global = solve_let(mu0, mu1, cfg.solver);
  check_regime(global);

  LiftedPath path;
  path.times.resize(N + 1);
  for (int k = 0; k <= N; ++k) path.times[k] = double(k) / N;

  if (cfg.mode == LiftMode::Resolve) {
    PairList pairs = prune_plan(global.coupling.weights, cfg.plan_prune_rel);
    path.pruned_mass = pairs.pruned_mass;
    // Plan-based grid of base measures.
    path.base_measures.reserve(N + 1);
    for (int k = 0; k <= N; ++k)
      path.base_measures.push_back(
          hk_interpolate(mu0, mu1, global, path.times[k], cfg.plan_prune_rel)
              .first);

    const DiscreteMeasure& b0 = path.base_measures[0];
    path.measures.push_back(
        ConeMeasure(b0.points(), Vec::Ones(b0.size()), b0.masses()));

    for (int k = 0; k < N; ++k) {
      const DiscreteMeasure& cur = path.base_measures[k];
      const DiscreteMeasure& nxt = path.base_measures[k + 1];
      SolverConfig local_cfg = cfg.solver;
      if (cfg.local_relative_epsilon) {
        // scale the annealing window by the squared displacement scale of
        // this step so the entropic blur shrinks with the grid
        double scale = 0.0;
        for (int i = 0; i < cur.size(); ++i) {
          double best = std::numeric_limits<double>::infinity();
          for (int j = 0; j < nxt.size(); ++j)
            best = std::min(best,
                            (cur.point(i) - nxt.point(j)).squaredNorm());
          scale = std::max(scale, best);
        }
        scale = std::max(scale, 1e-10);
        local_cfg.epsilon_start = cfg.solver.epsilon_start * scale;
        local_cfg.epsilon_min = cfg.solver.epsilon_min * scale;
      }
      LetSolution local = solve_let(cur, nxt, local_cfg);
      HKTangent vt = hk_log(cur, nxt, local, dt, cfg.tangent_mode);
      path.tangents.push_back(lift_tangent(vt, path.measures[k]));

      PairList edges = prune_plan(local.coupling.weights, cfg.plan_prune_rel);
      LiftStep step;
      step.src = edges.src;
      step.tgt = edges.tgt;
      step.weight.resize(edges.size());
      // conditional weights over the kept edges, scaled by lambda_k masses
      Vec row_kept = Vec::Zero(cur.size());
      for (int e = 0; e < edges.size(); ++e)
        row_kept[edges.src[e]] += edges.w[e];
      for (int e = 0; e < edges.size(); ++e)
        step.weight[e] = path.measures[k].mass(edges.src[e]) * edges.w[e] /
                         row_kept[edges.src[e]];
      fill_primary(step, cur.size());
      path.measures.push_back(advance_lift(nxt, step, path.measures[k]));
      path.steps.push_back(std::move(step));
    }
  } else {
    // Characteristic mode: collapse each source row to its conditional
    // barycenter, ride the per-atom cone geodesics, and only couple back to
    // the true target atoms on the final step.
    PairList pairs = prune_plan(global.coupling.weights, cfg.plan_prune_rel);
    path.pruned_mass = pairs.pruned_mass;
    const int n0 = mu0.size();
    const int n1 = mu1.size();
    Vec wrow = Vec::Zero(n0), wcol = Vec::Zero(n1);
    Mat ybar = Mat::Zero(n0, mu0.dim());
    Vec u1bar = Vec::Zero(n0);
    for (int e = 0; e < pairs.size(); ++e) {
      wrow[pairs.src[e]] += pairs.w[e];
      wcol[pairs.tgt[e]] += pairs.w[e];
      ybar.row(pairs.src[e]) += pairs.w[e] * mu1.point(pairs.tgt[e]);
      u1bar[pairs.src[e]] += pairs.w[e] * global.u_target[pairs.tgt[e]];
    }
    for (int i = 0; i < n0; ++i) {
      ybar.row(i) /= wrow[i];
      u1bar[i] /= wrow[i];
    }
    std::vector<ConePoint> zs(n0), zt(n0);
    for (int i = 0; i < n0; ++i) {
      zs[i] = ConePoint(mu0.point(i).transpose(),
                        std::sqrt(global.u_source[i]));
      zt[i] = ConePoint(ybar.row(i).transpose(), std::sqrt(u1bar[i]));
    }

    path.base_measures.push_back(mu0);
    for (int k = 1; k < N; ++k) {
      Mat pts(n0, mu0.dim());
      Vec ms(n0);
      for (int i = 0; i < n0; ++i) {
        const ConePoint z = cone_geodesic_point(path.times[k], zs[i], zt[i]);
        pts.row(i) = z.x.transpose();
        ms[i] = wrow[i] * z.r * z.r;
      }
      path.base_measures.push_back(DiscreteMeasure(std::move(pts), std::move(ms)));
    }
    path.base_measures.push_back(mu1);

    path.measures.push_back(
        ConeMeasure(mu0.points(), Vec::Ones(n0), mu0.masses()));

    Eigen::RowVectorXd ve(mu0.dim());
    double be = 0.0;
    for (int k = 0; k < N; ++k) {
      const DiscreteMeasure& cur = path.base_measures[k];
      const DiscreteMeasure& nxt = path.base_measures[k + 1];
      const ConeMeasure& lam = path.measures[k];
      LiftStep step;
      ConeTangentField V;
      V.anchor = lam;
      V.a = Mat::Zero(cur.size(), mu0.dim());
      V.b = Vec::Zero(cur.size());
      if (k < N - 1) {
        // one self-edge per characteristic
        step.src.resize(n0);
        step.tgt.resize(n0);
        step.weight.resize(n0);
        for (int i = 0; i < n0; ++i) {
          step.src[i] = i;
          step.tgt[i] = i;
          step.weight[i] = lam.mass(i);
          const double ratio = nxt.mass(i) / cur.mass(i);
          edge_tangent(cur.point(i), nxt.point(i), ratio, N, ve, be);
          V.a.row(i) = ve;
          V.b[i] = 2.0 * be * lam.radii()[i];
        }
      } else {
        // final step couples back to the true target atoms via the plan
        step.src = pairs.src;
        step.tgt = pairs.tgt;
        step.weight.resize(pairs.size());
        for (int e = 0; e < pairs.size(); ++e) {
          const int i = pairs.src[e];
          const int j = pairs.tgt[e];
          const double p = pairs.w[e] / wrow[i];
          step.weight[e] = lam.mass(i) * p;
          const double ratio =
              (mu1.mass(j) / wcol[j]) * (wrow[i] / cur.mass(i));
          edge_tangent(cur.point(i), mu1.point(j), ratio, N, ve, be);
          V.a.row(i) += p * ve;
          V.b[i] += p * 2.0 * be * lam.radii()[i];
        }
      }
      fill_primary(step, cur.size());
      path.tangents.push_back(std::move(V));
      path.measures.push_back(advance_lift(nxt, step, lam));
      path.steps.push_back(std::move(step));
    }
  }
  return path;
}

}  // namespace hk
