#include "hk/maps.hpp"

#include <cmath>

namespace hk {

namespace {

constexpr double kVelocityFloor = 1e-14;  // |v| below this means "stay put"
constexpr double kRatioFloor = 1e-12;     // u ratios below this are broken

void check_anchor(const DiscreteMeasure& mu, const HKTangent& u,
                  const char* what) {
  if (u.anchor.size() != mu.size() || u.v.rows() != mu.size() ||
      u.beta.size() != mu.size())
    fail(ErrorKind::AtomMismatch,
         std::string(what) + ": tangent not anchored on the measure");
}

}  // namespace

double hk_norm(const HKTangent& u) {
  double s = 0.0;
  for (int i = 0; i < u.anchor.size(); ++i)
    s += u.anchor.mass(i) *
         (u.v.row(i).squaredNorm() + 4.0 * u.beta[i] * u.beta[i]);
  return std::sqrt(s);
}

HKTangent hk_log(const DiscreteMeasure& mu0, const DiscreteMeasure& mu1,
                 const LetSolution& sol, double dt, TangentMode mode) {
  if (!sol.zero_marginal_rows.empty())
    fail(ErrorKind::ZeroMarginal,
         "hk_log: zero marginal at source atom " +
             std::to_string(sol.zero_marginal_rows.front()));
  const int n0 = mu0.size();
  const int n1 = mu1.size();
  HKTangent u;
  u.anchor = mu0;
  u.v = Mat::Zero(n0, mu0.dim());
  u.beta = Vec::Zero(n0);

  auto edge = [&](int i, const Eigen::RowVectorXd& y, double ratio,
                  Eigen::RowVectorXd& v_out, double& beta_out) {
    if (ratio <= kRatioFloor)
      fail(ErrorKind::NegativeRatio,
           "hk_log: nonpositive density ratio at atom " + std::to_string(i));
    const Eigen::RowVectorXd diff = y - mu0.point(i);
    const double L = diff.norm();
    const double root = std::sqrt(ratio);
    if (L < kVelocityFloor) {
      v_out.setZero();
    } else {
      v_out = (root * std::sin(L) / (dt * L)) * diff;
    }
    beta_out = (root * std::cos(L) - 1.0) / (2.0 * dt);
  };

  Eigen::RowVectorXd ve(mu0.dim());
  double be = 0.0;
  if (mode == TangentMode::Barycentric) {
    const Mat ybar = barycentric_map(sol, mu0, mu1);
    for (int i = 0; i < n0; ++i) {
      const double rowm = sol.coupling.source_marginal[i];
      // conditional average of the target density factor
      double u1_bar = 0.0;
      for (int j = 0; j < n1; ++j)
        u1_bar += sol.coupling.weights(i, j) * sol.u_target[j];
      u1_bar /= rowm;
      edge(i, ybar.row(i), u1_bar / sol.u_source[i], ve, be);
      u.v.row(i) = ve;
      u.beta[i] = be;
    }
  } else {
    for (int i = 0; i < n0; ++i) {
      const double rowm = sol.coupling.source_marginal[i];
      for (int j = 0; j < n1; ++j) {
        const double w = sol.coupling.weights(i, j);
        if (w <= 0.0) continue;
        edge(i, mu1.point(j), sol.u_target[j] / sol.u_source[i], ve, be);
        const double p = w / rowm;
        u.v.row(i) += p * ve;
        u.beta[i] += p * be;
      }
    }
  }
  return u;
}

DiscreteMeasure hk_exp(const DiscreteMeasure& mu0, const HKTangent& u,
                       double t, ExpDiagnostics* diag) {
  check_anchor(mu0, u, "hk_exp");
  const int n = mu0.size();
  Mat pts(n, mu0.dim());
  Vec ms(n);
  ExpDiagnostics local;
  for (int i = 0; i < n; ++i) {
    const double vn = u.v.row(i).norm();
    const double at = t * vn;
    const double bt = 1.0 + 2.0 * t * u.beta[i];
    if (std::abs(at) < kVelocityFloor && std::abs(bt) < kVelocityFloor) {
      // the exp map annihilates this atom (set S_t)
      ++local.dropped_atoms;
      local.dropped_mass += mu0.mass(i);
      ms[i] = 0.0;
      pts.row(i) = mu0.point(i);
      continue;
    }
    ms[i] = mu0.mass(i) * (at * at + bt * bt);
    if (vn < kVelocityFloor) {
      pts.row(i) = mu0.point(i);
    } else {
      pts.row(i) = mu0.point(i) + (std::atan2(at, bt) / vn) * u.v.row(i);
    }
  }
  if (diag != nullptr) *diag = local;
  return DiscreteMeasure(std::move(pts), std::move(ms));
}

}  // namespace hk
