#pragma once

#include "hk/measure.hpp"
#include "hk/solver.hpp"

namespace hk {

// Transport-reaction tangent field anchored on a discrete measure: one
// velocity v_i in R^d and one reaction rate beta_i per atom.
// Metric: |u|^2 = sum_i a_i (|v_i|^2 + 4 beta_i^2).
struct HKTangent {
  DiscreteMeasure anchor;
  Mat v;     // n x d
  Vec beta;  // n
};

double hk_norm(const HKTangent& u);

enum class TangentMode {
  Edgewise,     // average per-edge log-map quantities with conditional
                // weights P_ij (default)
  Barycentric,  // collapse each row to its conditional barycenter first
};

// Logarithmic map built from a LET solution, scaled by 1/dt. Requires every
// source atom to carry positive coupling marginal.
HKTangent hk_log(const DiscreteMeasure& mu0, const DiscreteMeasure& mu1,
                 const LetSolution& sol, double dt = 1.0,
                 TangentMode mode = TangentMode::Edgewise);

// Exponential map: atom (x_i, a_i) moves to
//   x_i + (v_i/|v_i|) atan2(t|v_i|, 1 + 2 t beta_i)
// with mass a_i ((t|v_i|)^2 + (1 + 2 t beta_i)^2). Atoms whose scaling
// vanishes are dropped; their count and mass are reported via diagnostics.
struct ExpDiagnostics {
  int dropped_atoms = 0;
  double dropped_mass = 0.0;
};

DiscreteMeasure hk_exp(const DiscreteMeasure& mu0, const HKTangent& u,
                       double t, ExpDiagnostics* diag = nullptr);

}  // namespace hk
