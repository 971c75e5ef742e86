#include "hk/transport.hpp"

#include <algorithm>
#include <cmath>

namespace hk {

namespace {

double field_norm_raw(const ConeMeasure& lam, const Mat& a, const Vec& b) {
  double s = 0.0;
  for (int i = 0; i < lam.size(); ++i) {
    const double r = lam.radii()[i];
    s += lam.mass(i) * (r * r * a.row(i).squaredNorm() + b[i] * b[i]);
  }
  return std::sqrt(s);
}

}  // namespace

TransportResult transport_along(const LiftedPath& path, const HKTangent& u0,
                                std::vector<ConeTangentField>* trace) {
  const int N = static_cast<int>(path.steps.size());
  TransportResult out;
  out.n_steps = N;
  out.dropped_mass = path.pruned_mass;

  ConeTangentField U = lift_tangent(u0, path.measures[0]);
  Mat a = U.a;
  Vec b = U.b;
  out.per_step_norms.push_back(field_norm_raw(path.measures[0], a, b));

  for (int k = 0; k < N; ++k) {
    const LiftStep& step = path.steps[k];
    const ConeMeasure& cur = path.measures[k];
    const ConeMeasure& nxt = path.measures[k + 1];
    Mat a_next = Mat::Zero(nxt.size(), a.cols());
    Vec b_next = Vec::Zero(nxt.size());
    Vec m_in = Vec::Zero(nxt.size());
    for (int e = 0; e < static_cast<int>(step.weight.size()); ++e) {
      const int i = step.src[e];
      const int j = step.tgt[e];
      const double m = step.weight[e];
      const ConePoint zi = cur.atom(i);
      const ConePoint zj = nxt.atom(j);
      ConeTangentVec ui;
      ui.base = zi;
      ui.a = a.row(i).transpose();
      ui.b = b[i];
      if ((zi.x - zj.x).norm() == 0.0 && zi.r == zj.r) {
        a_next.row(j) += m * a.row(i);
        b_next[j] += m * b[i];
      } else {
        const ConeGeodesic g = make_geodesic(zi, zj);
        const ConeTangentVec ut = cone_parallel_transport(g, ui, 1.0);
        a_next.row(j) += m * ut.a.transpose();
        b_next[j] += m * ut.b;
      }
      m_in[j] += m;
    }
    for (int j = 0; j < nxt.size(); ++j) {
      if (m_in[j] <= 1e-15)
        fail(ErrorKind::ZeroIncomingMass,
             "transport: no incoming mass at atom " + std::to_string(j));
      a_next.row(j) /= m_in[j];
      b_next[j] /= m_in[j];
    }
    a = std::move(a_next);
    b = std::move(b_next);
    out.per_step_norms.push_back(field_norm_raw(nxt, a, b));
    if (trace != nullptr) {
      ConeTangentField snap;
      snap.anchor = nxt;
      snap.a = a;
      snap.b = b;
      trace->push_back(std::move(snap));
    }
  }

  ConeTangentField Ufinal;
  Ufinal.anchor = path.measures[N];
  Ufinal.a = std::move(a);
  Ufinal.b = std::move(b);
  out.transported = project_tangent(Ufinal);
  return out;
}

TransportResult hk_parallel_transport(const DiscreteMeasure& mu0,
                                      const DiscreteMeasure& mu1,
                                      const HKTangent& u0, int n_steps,
                                      const LiftConfig& cfg) {
  LiftedPath path = isometric_lift(mu0, mu1, n_steps, cfg);
  return transport_along(path, u0);
}

std::vector<ConvergenceRow> transport_convergence_study(
    const DiscreteMeasure& mu0, const DiscreteMeasure& mu1,
    const HKTangent& u0, const std::vector<int>& n_list,
    const LiftConfig& cfg) {
  if (n_list.empty()) fail(ErrorKind::Usage, "convergence study: empty list");
  for (size_t k = 1; k < n_list.size(); ++k)
    if (n_list[k] <= n_list[k - 1])
      fail(ErrorKind::Usage, "convergence study: n_list must ascend");

  const int n_ref = 4 * n_list.back();
  TransportResult ref = hk_parallel_transport(mu0, mu1, u0, n_ref, cfg);

  std::vector<ConvergenceRow> rows;
  for (int n : n_list) {
    TransportResult run = hk_parallel_transport(mu0, mu1, u0, n, cfg);
    const HKTangent& x = run.transported;
    const HKTangent& y = ref.transported;
    if (x.anchor.size() != y.anchor.size())
      fail(ErrorKind::AtomMismatch,
           "convergence study: runs ended on different supports");
    double s = 0.0;
    for (int j = 0; j < x.anchor.size(); ++j) {
      const double db = x.beta[j] - y.beta[j];
      s += x.anchor.mass(j) *
           ((x.v.row(j) - y.v.row(j)).squaredNorm() + 4.0 * db * db);
    }
    rows.push_back({n, std::sqrt(s)});
  }
  return rows;
}

}  // namespace hk
