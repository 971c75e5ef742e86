#pragma once

#include <functional>

#include "hk/measure.hpp"

namespace hk {

// Tangent vector a + b * d/dr anchored at a cone point z = (x, r).
// Cone metric tensor: |u|^2 = r^2 |a|^2 + b^2.
struct ConeTangentVec {
  ConePoint base;
  Vec a;        // spatial component
  double b = 0.0;  // radial component
};

double cone_norm(const ConeTangentVec& u);

// Geodesic data between two cone points away from the apex.
// r(t)^2 = s^2 t^2 + 2 r0 rdot0 t + r0^2 and q = r^2 xdot is constant.
struct ConeGeodesic {
  ConePoint z0, z1;
  double speed = 0.0;      // s = d_C(z0, z1)
  ConeTangentVec v0;       // initial velocity = cone_log(z0, z1)
  Vec q;                   // angular-momentum invariant r^2 * xdot
  double c = 0.0;          // |q|
  double rdot0 = 0.0;      // initial radial speed

  double radius_at(double t) const;
  double radius_sq_at(double t) const;
};

// d_C^2 = r0^2 + r1^2 - 2 r0 r1 cos(min(|x0-x1|, pi))
double cone_distance(const ConePoint& z0, const ConePoint& z1);

// Constant-speed geodesic point Z(s; z0, z1). Requires both radii positive
// and |x0 - x1| < pi.
ConePoint cone_geodesic_point(double s, const ConePoint& z0,
                              const ConePoint& z1);

ConePoint cone_exp(const ConePoint& z0, const ConeTangentVec& v);

// Requires r0 > 0 and |x1 - x0| < pi.
ConeTangentVec cone_log(const ConePoint& z0, const ConePoint& z1);

ConeGeodesic make_geodesic(const ConePoint& z0, const ConePoint& z1);

// Closed-form parallel transport of u0 (anchored at g.z0) to time t in [0,1].
ConeTangentVec cone_parallel_transport(const ConeGeodesic& g,
                                       const ConeTangentVec& u0, double t);

// Fixed-step RK4 integration of the parallel transport system
//   adot + (rdot/r) a + (b/r) v = 0,   bdot - r <a, v> = 0
// along r(t), v(t) = q / r(t)^2. Ground truth for the closed form.
ConeTangentVec cone_pt_ode_oracle(const ConeGeodesic& g,
                                  const ConeTangentVec& u0, double t,
                                  double step = 1e-4);

// Product-form vector field on the cone: X(x) + w(r) d/dr with X spatial and
// w radial. Used to evaluate the covariant derivative case split in tests.
struct ConeProductField {
  std::function<Vec(const Vec&)> spatial;    // X(x), may be null for none
  std::function<double(double)> radial;      // w(r), may be null for none
};

// Covariant derivative nabla_F G at a cone point, assembled from the
// warped-product case split. Spatial derivatives of G.spatial are taken by
// central differences with step fd_step.
ConeTangentVec cone_covariant_derivative(const ConeProductField& F,
                                         const ConeProductField& G,
                                         const ConePoint& at,
                                         double fd_step = 1e-5);

// Covariant derivative D_t u of a field t -> (a, b) along a curve
// t -> (x, r), all sampled as callables; time derivatives by central
// differences. Vanishes identically for parallel fields, and equals the
// geodesic equation residual when u = gamma-dot.
ConeTangentVec covariant_derivative_along(
    const std::function<ConePoint(double)>& curve,
    const std::function<ConeTangentVec(double)>& field, double t,
    double fd_step = 1e-4);

}  // namespace hk
