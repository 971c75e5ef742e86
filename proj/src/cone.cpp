#include "hk/cone.hpp"

#include <algorithm>
#include <cmath>

namespace hk {

namespace {

constexpr double kPi = 3.14159265358979323846;

double clamp_unit(double v) { return std::min(1.0, std::max(-1.0, v)); }

void check_same_dim(const ConePoint& z0, const ConePoint& z1) {
  if (z0.x.size() != z1.x.size())
    fail(ErrorKind::DimensionMismatch, "cone points of different dimension");
}

void check_not_apex(const ConePoint& z, const char* what) {
  if (z.r <= 0.0)
    fail(ErrorKind::ApexPoint, std::string(what) + " anchored at the apex");
}

}  // namespace

double cone_norm(const ConeTangentVec& u) {
  const double r = u.base.r;
  return std::sqrt(r * r * u.a.squaredNorm() + u.b * u.b);
}

double ConeGeodesic::radius_sq_at(double t) const {
  const double r0 = z0.r;
  return speed * speed * t * t + 2.0 * r0 * rdot0 * t + r0 * r0;
}

double ConeGeodesic::radius_at(double t) const {
  return std::sqrt(std::max(radius_sq_at(t), 0.0));
}

double cone_distance(const ConePoint& z0, const ConePoint& z1) {
  check_same_dim(z0, z1);
  const double theta = std::min((z0.x - z1.x).norm(), kPi);
  const double d2 = z0.r * z0.r + z1.r * z1.r -
                    2.0 * z0.r * z1.r * std::cos(theta);
  return std::sqrt(std::max(d2, 0.0));
}

ConePoint cone_geodesic_point(double s, const ConePoint& z0,
                              const ConePoint& z1) {
  check_same_dim(z0, z1);
  if (z0.r <= 0.0 || z1.r <= 0.0)
    fail(ErrorKind::ApexPoint, "cone geodesic with an apex endpoint");
  const double theta = (z1.x - z0.x).norm();
  if (theta >= kPi)
    fail(ErrorKind::DiameterViolation,
         "cone geodesic needs base separation < pi");
  const double r0 = z0.r, r1 = z1.r;
  const double R2 = (1.0 - s) * (1.0 - s) * r0 * r0 + s * s * r1 * r1 +
                    2.0 * s * (1.0 - s) * r0 * r1 * std::cos(theta);
  const double R = std::sqrt(std::max(R2, 0.0));
  double rho;
  if (theta < 1e-8) {
    // removable 0/0: limit of arccos(...)/theta
    rho = s * r1 / ((1.0 - s) * r0 + s * r1);
  } else {
    const double arg =
        clamp_unit(((1.0 - s) * r0 + s * r1 * std::cos(theta)) / R);
    rho = std::acos(arg) / theta;
  }
  ConePoint out;
  out.x = (1.0 - rho) * z0.x + rho * z1.x;
  out.r = R;
  return out;
}

ConePoint cone_exp(const ConePoint& z0, const ConeTangentVec& v) {
  check_not_apex(z0, "cone_exp");
  const double vn = v.a.norm();
  const double r0 = z0.r;
  ConePoint out;
  out.r = std::sqrt(vn * vn * r0 * r0 + (v.b + r0) * (v.b + r0));
  if (vn == 0.0) {
    out.x = z0.x;
  } else {
    const double theta = std::atan2(r0 * vn, v.b + r0);
    out.x = z0.x + (theta / vn) * v.a;
  }
  return out;
}

ConeTangentVec cone_log(const ConePoint& z0, const ConePoint& z1) {
  check_same_dim(z0, z1);
  check_not_apex(z0, "cone_log");
  const double theta = (z1.x - z0.x).norm();
  if (theta >= kPi)
    fail(ErrorKind::DiameterViolation, "cone_log needs base separation < pi");
  ConeTangentVec out;
  out.base = z0;
  if (theta == 0.0) {
    out.a = Vec::Zero(z0.x.size());
  } else {
    out.a = (std::sin(theta) * z1.r / (theta * z0.r)) * (z1.x - z0.x);
  }
  out.b = z1.r * std::cos(theta) - z0.r;
  return out;
}

ConeGeodesic make_geodesic(const ConePoint& z0, const ConePoint& z1) {
  ConeGeodesic g;
  g.z0 = z0;
  g.z1 = z1;
  g.speed = cone_distance(z0, z1);
  g.v0 = cone_log(z0, z1);
  g.rdot0 = g.v0.b;
  g.q = z0.r * z0.r * g.v0.a;
  g.c = g.q.norm();
  return g;
}

ConeTangentVec cone_parallel_transport(const ConeGeodesic& g,
                                       const ConeTangentVec& u0, double t) {
  const double r0 = g.z0.r;
  const double rt = g.radius_at(t);
  if (rt <= 0.0)
    fail(ErrorKind::ApexPoint, "parallel transport through the apex");
  ConeTangentVec out;
  out.base = cone_geodesic_point(t, g.z0, g.z1);
  const double s2 = g.speed * g.speed;
  if (g.c <= 1e-12 * s2 || g.speed == 0.0) {
    // radial (or degenerate) geodesic: spatial part rescales, radial rides
    out.a = (r0 / rt) * u0.a;
    out.b = u0.b;
    return out;
  }
  const Vec e = g.q / g.c;
  const double alpha0 = u0.a.dot(e);
  const Vec a_perp = u0.a - alpha0 * e;
  const double theta = std::atan((s2 * t + r0 * g.rdot0) / g.c) -
                       std::atan(r0 * g.rdot0 / g.c);
  const double ct = std::cos(theta), st = std::sin(theta);
  out.a = (r0 / rt) * a_perp +
          ((r0 * alpha0 * ct - u0.b * st) / rt) * e;
  out.b = r0 * alpha0 * st + u0.b * ct;
  return out;
}

ConeTangentVec cone_pt_ode_oracle(const ConeGeodesic& g,
                                  const ConeTangentVec& u0, double t,
                                  double step) {
  const double r0 = g.z0.r;
  const double rr0 = r0 * g.rdot0;
  const double s2 = g.speed * g.speed;
  auto radius = [&](double tau) {
    return std::sqrt(std::max(s2 * tau * tau + 2.0 * rr0 * tau + r0 * r0,
                              0.0));
  };
  auto rdot = [&](double tau) { return (s2 * tau + rr0) / radius(tau); };
  auto vfield = [&](double tau) {
    const double r = radius(tau);
    return Vec(g.q / (r * r));
  };
  // state y = (a, b)
  auto deriv = [&](double tau, const Vec& a, double b, Vec& da, double& db) {
    const double r = radius(tau);
    const Vec v = vfield(tau);
    da = -(rdot(tau) / r) * a - (b / r) * v;
    db = r * a.dot(v);
  };
  Vec a = u0.a;
  double b = u0.b;
  double tau = 0.0;
  const int nsteps = std::max(1, static_cast<int>(std::ceil(t / step)));
  const double h = t / nsteps;
  Vec k1a, k2a, k3a, k4a;
  double k1b, k2b, k3b, k4b;
  for (int i = 0; i < nsteps; ++i) {
    deriv(tau, a, b, k1a, k1b);
    deriv(tau + 0.5 * h, a + 0.5 * h * k1a, b + 0.5 * h * k1b, k2a, k2b);
    deriv(tau + 0.5 * h, a + 0.5 * h * k2a, b + 0.5 * h * k2b, k3a, k3b);
    deriv(tau + h, a + h * k3a, b + h * k3b, k4a, k4b);
    a += (h / 6.0) * (k1a + 2.0 * k2a + 2.0 * k3a + k4a);
    b += (h / 6.0) * (k1b + 2.0 * k2b + 2.0 * k3b + k4b);
    tau += h;
  }
  ConeTangentVec out;
  out.base = cone_geodesic_point(t, g.z0, g.z1);
  out.a = a;
  out.b = b;
  return out;
}

ConeTangentVec cone_covariant_derivative(const ConeProductField& F,
                                         const ConeProductField& G,
                                         const ConePoint& at, double fd_step) {
  check_not_apex(at, "cone_covariant_derivative");
  const int d = static_cast<int>(at.x.size());
  Vec X = F.spatial ? F.spatial(at.x) : Vec(Vec::Zero(d));
  const double v = F.radial ? F.radial(at.r) : 0.0;
  Vec Y = G.spatial ? G.spatial(at.x) : Vec(Vec::Zero(d));
  const double w = G.radial ? G.radial(at.r) : 0.0;

  // spatial: DY(x) . X + (w/r) X + (v/r) Y
  Vec spatial = Vec::Zero(d);
  if (G.spatial && X.norm() > 0.0) {
    for (int k = 0; k < d; ++k) {
      Vec xp = at.x, xm = at.x;
      xp[k] += fd_step;
      xm[k] -= fd_step;
      spatial += ((G.spatial(xp) - G.spatial(xm)) / (2.0 * fd_step)) * X[k];
    }
  }
  spatial += (w / at.r) * X + (v / at.r) * Y;

  // radial: -r <X, Y> + v w'(r)
  double radial = -at.r * X.dot(Y);
  if (F.radial && G.radial) {
    const double wp = (G.radial(at.r + fd_step) - G.radial(at.r - fd_step)) /
                      (2.0 * fd_step);
    radial += v * wp;
  }
  ConeTangentVec out;
  out.base = at;
  out.a = spatial;
  out.b = radial;
  return out;
}

ConeTangentVec covariant_derivative_along(
    const std::function<ConePoint(double)>& curve,
    const std::function<ConeTangentVec(double)>& field, double t,
    double fd_step) {
  const ConePoint z = curve(t);
  check_not_apex(z, "covariant_derivative_along");
  const ConePoint zp = curve(t + fd_step), zm = curve(t - fd_step);
  const Vec xdot = (zp.x - zm.x) / (2.0 * fd_step);
  const double rdot = (zp.r - zm.r) / (2.0 * fd_step);
  const ConeTangentVec up = field(t + fd_step), um = field(t - fd_step),
                       u = field(t);
  const Vec adot = (up.a - um.a) / (2.0 * fd_step);
  const double bdot = (up.b - um.b) / (2.0 * fd_step);
  ConeTangentVec out;
  out.base = z;
  out.a = adot + (rdot / z.r) * u.a + (u.b / z.r) * xdot;
  out.b = bdot - z.r * u.a.dot(xdot);
  return out;
}

}  // namespace hk
