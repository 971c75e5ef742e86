#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "hk/maps.hpp"
#include "hk/measure.hpp"
#include "hk/rng.hpp"
#include "hk/solver.hpp"

namespace hk::test {

inline DiscreteMeasure make_measure(const std::vector<std::vector<double>>& pts,
                                    const std::vector<double>& masses) {
  Mat p(static_cast<int>(pts.size()), static_cast<int>(pts.front().size()));
  Vec m(static_cast<int>(masses.size()));
  for (size_t i = 0; i < pts.size(); ++i) {
    for (size_t c = 0; c < pts[i].size(); ++c) p(int(i), int(c)) = pts[i][c];
    m[int(i)] = masses[i];
  }
  return DiscreteMeasure(std::move(p), std::move(m));
}

inline DiscreteMeasure dirac(const std::vector<double>& x, double mass) {
  return make_measure({x}, {mass});
}

// Jittered grid cloud with guaranteed minimum separation; keeps entropic
// leakage between distinct atoms negligible at the default epsilon floor.
inline DiscreteMeasure separated_cloud(Rng& rng, int n, int d, double spacing,
                                       bool unit_mass = true) {
  const int side = static_cast<int>(std::ceil(std::pow(double(n), 1.0 / d)));
  Mat pts(n, d);
  Vec ms(n);
  for (int i = 0; i < n; ++i) {
    int rem = i;
    for (int c = 0; c < d; ++c) {
      const int cell = rem % side;
      rem /= side;
      pts(i, c) = spacing * cell + rng.uniform(-0.2, 0.2) * spacing;
    }
    ms[i] = unit_mass ? 1.0 : rng.uniform(0.5, 2.0);
  }
  return DiscreteMeasure(std::move(pts), std::move(ms));
}

// Scalar golden-section search on [lo, hi].
inline double golden_min(const std::function<double(double)>& f, double lo,
                         double hi, double tol = 1e-12) {
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double c = b - phi * (b - a), d = a + phi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + phi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

// Entropy-transport value of a single-pair instance as a function of the
// lone coupling weight; the independent oracle for Dirac pairs.
inline double dirac_energy(double p, double m0, double m1, double L) {
  auto F = [](double s) { return s <= 0.0 ? 1.0 : s * std::log(s) - s + 1.0; };
  const double cost = -2.0 * std::log(std::cos(L));
  return m0 * F(p / m0) + m1 * F(p / m1) + p * cost;
}

inline double dirac_oracle_energy(double m0, double m1, double L) {
  const double hi = std::sqrt(m0 * m1);
  const double p = golden_min(
      [&](double q) { return dirac_energy(q, m0, m1, L); }, 0.0, hi);
  return dirac_energy(p, m0, m1, L);
}

// Primal projected-gradient minimizer of the entropy-transport objective
// over the coupling entries; usable for a handful of atoms per side.
inline double pg_let_oracle(const DiscreteMeasure& mu0,
                            const DiscreteMeasure& mu1, double tol = 1e-6,
                            int max_iters = 2000000) {
  const int n0 = mu0.size(), n1 = mu1.size();
  Mat cost(n0, n1);
  for (int i = 0; i < n0; ++i)
    for (int j = 0; j < n1; ++j)
      cost(i, j) = ground_cost(mu0.point(i), mu1.point(j));
  Mat pi(n0, n1);
  for (int i = 0; i < n0; ++i)
    for (int j = 0; j < n1; ++j)
      pi(i, j) = std::isfinite(cost(i, j))
                     ? 0.5 * std::sqrt(mu0.mass(i) * mu1.mass(j)) / n1
                     : 0.0;
  auto energy = [&](const Mat& p) {
    auto kl = [](double q, double ref) {
      if (q <= 0.0) return ref;
      return q * std::log(q / ref) - q + ref;
    };
    double e = 0.0;
    for (int i = 0; i < n0; ++i) e += kl(p.row(i).sum(), mu0.mass(i));
    for (int j = 0; j < n1; ++j) e += kl(p.col(j).sum(), mu1.mass(j));
    for (int i = 0; i < n0; ++i)
      for (int j = 0; j < n1; ++j)
        if (p(i, j) > 0.0) e += cost(i, j) * p(i, j);
    return e;
  };
  double step = 0.25;
  double cur = energy(pi);
  const double floor_w = 1e-300;
  for (int it = 0; it < max_iters; ++it) {
    Vec row = pi.rowwise().sum(), col = pi.colwise().sum();
    Mat grad(n0, n1);
    for (int i = 0; i < n0; ++i)
      for (int j = 0; j < n1; ++j)
        grad(i, j) = std::isfinite(cost(i, j))
                         ? std::log(std::max(row[i], floor_w) / mu0.mass(i)) +
                               std::log(std::max(col[j], floor_w) /
                                        mu1.mass(j)) +
                               cost(i, j)
                         : 0.0;
    Mat next = (pi - step * grad).cwiseMax(0.0);
    for (int i = 0; i < n0; ++i)
      for (int j = 0; j < n1; ++j)
        if (!std::isfinite(cost(i, j))) next(i, j) = 0.0;
    const double e_next = energy(next);
    if (e_next <= cur) {
      const double delta = cur - e_next;
      pi = next;
      cur = e_next;
      if (delta < tol * 1e-4 && it > 100) break;
    } else {
      step *= 0.5;
      if (step < 1e-14) break;
    }
  }
  return cur;
}

}  // namespace hk::test
