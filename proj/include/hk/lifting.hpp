#pragma once

#include <vector>

#include "hk/cone.hpp"
#include "hk/maps.hpp"
#include "hk/measure.hpp"
#include "hk/solver.hpp"

namespace hk {

// Tangent field over a cone measure, one (a, b) vector per atom.
// Field norm: sum_i w_i (r_i^2 |a_i|^2 + b_i^2).
struct ConeTangentField {
  ConeMeasure anchor;
  Mat a;  // n x d
  Vec b;  // n
};

double field_norm(const ConeTangentField& V);

// L(v, beta)(x, r) = (v(x), 2 beta(x) r). Exact isometry onto the lifted
// subspace; requires lambda deterministic-radial and atom-aligned with the
// tangent anchor.
ConeTangentField lift_tangent(const HKTangent& u, const ConeMeasure& lambda);

// P[a + b dr](x) = (a, b / (2r)), the isometric inverse of lift_tangent on
// deterministic lifts. Throws on apex atoms.
HKTangent project_tangent(const ConeTangentField& V);

// Optimal lift of a measure pair from a LET solution: coupled pair (i, j)
// contributes lifted atoms (x_i, sqrt(u0_i)) and (y_j, sqrt(u1_j)) carrying
// the plan weight.
struct LetLift {
  ConeMeasure lambda0, lambda1;
  Coupling cone_plan;  // plan over the lifted atoms (pair-indexed rows/cols)
};

LetLift let_lift(const DiscreteMeasure& mu0, const DiscreteMeasure& mu1,
                 const LetSolution& sol);

// Cone-geodesic displacement interpolation of the lifted plan at time t.
// Returns the projected base measure and the cone interpolant carrying the
// plan weights. prune_rel drops plan entries below prune_rel * max entry
// (each row/column keeps at least its heaviest entry).
std::pair<DiscreteMeasure, ConeMeasure> hk_interpolate(
    const DiscreteMeasure& mu0, const DiscreteMeasure& mu1,
    const LetSolution& sol, double t, double prune_rel = 1e-12);

enum class LiftMode {
  Resolve,         // plan-based grid, per-step LET re-solves
  Characteristic,  // barycentric-collapsed grid, analytic local factors;
                   // scales to large clouds, no per-step solver calls
};

struct LiftConfig {
  SolverConfig solver;
  LiftMode mode = LiftMode::Resolve;
  TangentMode tangent_mode = TangentMode::Edgewise;
  double plan_prune_rel = 1e-12;
  // Resolve mode only: scale the local solver epsilons by the squared
  // displacement scale of each step instead of using them absolutely.
  bool local_relative_epsilon = false;
};

// One step of the discrete lifted path: the correspondence realizing T_k as
// weighted edges between consecutive atom clouds.
struct LiftStep {
  std::vector<int> src, tgt;  // edge endpoints (atom indices)
  Vec weight;                 // aggregation mass m_ij, rows sum to lambda_k
  std::vector<int> primary;   // heaviest outgoing edge per source atom
};

struct LiftedPath {
  Vec times;                                 // N+1 grid values k/N
  std::vector<ConeMeasure> measures;         // lambda_k, deterministic radial
  std::vector<DiscreteMeasure> base_measures;  // mu_{t_k}
  std::vector<ConeTangentField> tangents;    // V_k anchored on measures[k]
  std::vector<LiftStep> steps;               // N correspondences
  double pruned_mass = 0.0;                  // plan mass dropped by pruning
};

// Isometric lifting of the discrete HK geodesic between mu0 and mu1:
// grid measures from the lifted-plan interpolation, radii advanced by the
// local density-factor ratios (telescoping multiplicative update), lifted
// tangent fields per step.
LiftedPath isometric_lift(const DiscreteMeasure& mu0,
                          const DiscreteMeasure& mu1, int n_steps,
                          const LiftConfig& cfg = {});

}  // namespace hk
