#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "hk/lifting.hpp"
#include "hk/solver.hpp"

namespace hk {

struct ExperimentReport {
  std::string name;
  std::uint64_t seed = 0;
  std::string rng = "splitmix64-v1";
  std::map<std::string, double> parameters;
  std::map<std::string, double> metrics;
  std::vector<std::string> artifacts;
  bool passed = true;  // every asserted tolerance met

  std::string to_json_string() const;
  void write_json(const std::string& path) const;
};

struct ExperimentConfig {
  // Larger epsilon floor and looser stopping than the library defaults:
  // the simulation clouds run to a few thousand atoms.
  SolverConfig solver{0.1, 5e-3, 0.5, 1e-7, 4000, 1};
  int n_steps = 32;
  double plan_prune_rel = 1e-8;
  std::string out_dir;  // empty: write no artifact files
};

// Three clouds sampled from the same centered Gaussian with different atom
// counts; the tangent pushing mu2 to mu3 is transported to mu1 and the mass
// of mu4 = exp(mu1, transported) is compared with the closed-form
// prediction M1 (2 beta_pt + 1)^2, beta_pt = beta23 sqrt(M2/M1).
ExperimentReport exp_mass_growth(std::uint64_t seed, int M1, int M2, int M3,
                                 double variance, const ExperimentConfig& cfg);

// Equal-count Gaussian clouds with offset means; checks the parallel
// transport isometry HK(mu1, mu4) = HK(mu2, mu3).
ExperimentReport exp_mean_shift(std::uint64_t seed, int n,
                                std::array<double, 3> means, double variance,
                                const ExperimentConfig& cfg);

// Fixed-mean clouds with differing variances; reports how the second
// central moment ratio propagates along parallel geodesics.
ExperimentReport exp_cov_change(std::uint64_t seed, int n,
                                std::array<double, 3> variances,
                                const ExperimentConfig& cfg);

// Emits the plan-based interpolation of the lifted pair (non-deterministic
// conditional radial law at interior times) next to the characteristic lift
// (deterministic at every grid point).
ExperimentReport exp_interpolation(std::uint64_t seed, int n0, int n1,
                                   const ExperimentConfig& cfg);

// Trajectory of transporting (0, 0.75) from (1.0, 0.5) to (3.0, 1.0) in
// closed form against the ODE integrator.
ExperimentReport exp_cone_pt_figure(const ExperimentConfig& cfg);

}  // namespace hk
