#pragma once

#include <vector>

#include "hk/lifting.hpp"

namespace hk {

struct TransportResult {
  HKTangent transported;   // anchored on the final grid measure (= mu1)
  // Coupling-weighted field norm of the lifted tangent: initial value
  // followed by the value after each step. Non-increasing by construction.
  std::vector<double> per_step_norms;
  int n_steps = 0;
  double dropped_mass = 0.0;  // plan mass lost to pruning (diagnostic)
};

// Approximate HK parallel transport of u0 along the geodesic from mu0 to
// mu1: lift, transport each cone vector along the per-edge cone geodesics of
// the lifted path, aggregate incoming edges by their coupling mass, project
// back at the end. No tangent-space projection is applied between steps.
TransportResult hk_parallel_transport(const DiscreteMeasure& mu0,
                                      const DiscreteMeasure& mu1,
                                      const HKTangent& u0, int n_steps,
                                      const LiftConfig& cfg = {});

// Same, reusing an already computed lifted path (u0 anchored on its first
// base measure). When `trace` is given it receives the lifted field after
// every step (N entries).
TransportResult transport_along(const LiftedPath& path, const HKTangent& u0,
                                std::vector<ConeTangentField>* trace = nullptr);

struct ConvergenceRow {
  int n_steps = 0;
  double deviation = 0.0;  // HK-metric distance to the reference transport
};

// Deviation of the transported tangent from a reference run at
// 4 * max(n_list) steps, on the common anchor mu1. Rows come back in the
// order of n_list (ascending required).
std::vector<ConvergenceRow> transport_convergence_study(
    const DiscreteMeasure& mu0, const DiscreteMeasure& mu1,
    const HKTangent& u0, const std::vector<int>& n_list,
    const LiftConfig& cfg = {});

}  // namespace hk
