#pragma once

#include <vector>

#include "hk/measure.hpp"

namespace hk {

struct SolverConfig {
  double epsilon_start = 0.1;
  double epsilon_min = 1e-3;
  double anneal_factor = 0.5;
  double tol = 1e-9;        // max change of log-scalings per iteration
  int max_iters = 10000;    // per annealing stage
  int threads = 1;
};

// Entropy-transport plan with its soft marginals (row and column sums).
struct Coupling {
  Mat weights;           // n0 x n1, zero wherever the ground cost is infinite
  Vec source_marginal;   // weights * 1
  Vec target_marginal;   // weights^T * 1
};

struct LetSolution {
  Coupling coupling;
  double hk_distance = 0.0;  // sqrt of the entropy-transport value E(pi)
  Vec u_source;              // a_i / (pi 1)_i
  Vec u_target;              // b_j / (pi^T 1)_j
  double epsilon_final = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<int> zero_marginal_rows;   // diagnostic, empty in the
  std::vector<int> zero_marginal_cols;   // reaction-transport regime
  std::vector<double> stage_energies;    // E(pi) after each annealing stage
};

// Ground cost of the entropy-transport problem: -2 log cos |x - y| below
// pi/2, +infinity beyond.
double ground_cost(const Eigen::RowVectorXd& x, const Eigen::RowVectorXd& y);

// Log-domain unbalanced Sinkhorn scaling with KL-relaxed marginals
// (relaxation strength 1) and geometric epsilon annealing. The reported
// hk_distance evaluates E at the returned plan without the entropy term.
LetSolution solve_let(const DiscreteMeasure& mu0, const DiscreteMeasure& mu1,
                      const SolverConfig& cfg = {});

// Conditional barycenters ybar_i = sum_j pi_ij y_j / (pi 1)_i.
// Throws ZeroMarginal (reporting the atom index) on a vanished row.
Mat barycentric_map(const LetSolution& sol, const DiscreteMeasure& mu0,
                    const DiscreteMeasure& mu1);

// Density factors of the Lebesgue decompositions mu_i = u_i pi_i.
std::pair<Vec, Vec> density_factors(const LetSolution& sol,
                                    const DiscreteMeasure& mu0,
                                    const DiscreteMeasure& mu1);

struct BalancedSolution {
  double distance = 0.0;   // sqrt of the rounded plan cost
  int iterations = 0;
  bool converged = false;
};

// Balanced entropic optimal transport between two cone measures of equal
// total mass under the squared cone distance, with the entropic plan
// rounded to exact marginals before evaluating the cost. Used to check
// lift optimality W_C(lambda0, lambda1) = HK(mu0, mu1).
BalancedSolution cone_wasserstein(const ConeMeasure& lambda0,
                                  const ConeMeasure& lambda1,
                                  const SolverConfig& cfg = {});

}  // namespace hk
