#include "hk/measure.hpp"

#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

namespace hk {

namespace {

std::vector<std::int64_t> quantize_row(const Eigen::RowVectorXd& p) {
  std::vector<std::int64_t> key(p.size());
  for (int k = 0; k < p.size(); ++k)
    key[k] = static_cast<std::int64_t>(std::llround(p[k] / kCoordQuantum));
  return key;
}

}  // namespace

DiscreteMeasure::DiscreteMeasure(Mat points, Vec masses) {
  if (points.rows() != masses.size())
    fail(ErrorKind::DimensionMismatch,
         "points/masses length mismatch in DiscreteMeasure");
  const double floor = kMassFloorRel * masses.array().max(0.0).sum();
  std::vector<int> keep;
  keep.reserve(masses.size());
  for (int i = 0; i < masses.size(); ++i)
    if (masses[i] > 0.0 && masses[i] >= floor) keep.push_back(i);
  points_.resize(static_cast<int>(keep.size()), points.cols());
  masses_.resize(static_cast<int>(keep.size()));
  for (int o = 0; o < static_cast<int>(keep.size()); ++o) {
    points_.row(o) = points.row(keep[o]);
    masses_[o] = masses[keep[o]];
  }
}

ConeMeasure::ConeMeasure(Mat points, Vec radii, Vec masses) {
  if (points.rows() != masses.size() || radii.size() != masses.size())
    fail(ErrorKind::DimensionMismatch,
         "points/radii/masses length mismatch in ConeMeasure");
  const double floor = kMassFloorRel * masses.array().max(0.0).sum();
  std::vector<int> keep;
  keep.reserve(masses.size());
  for (int i = 0; i < masses.size(); ++i) {
    if (radii[i] < 0.0)
      fail(ErrorKind::ApexPoint, "negative cone radius in ConeMeasure");
    if (masses[i] > 0.0 && masses[i] >= floor) keep.push_back(i);
  }
  points_.resize(static_cast<int>(keep.size()), points.cols());
  radii_.resize(static_cast<int>(keep.size()));
  masses_.resize(static_cast<int>(keep.size()));
  for (int o = 0; o < static_cast<int>(keep.size()); ++o) {
    points_.row(o) = points.row(keep[o]);
    radii_[o] = radii[keep[o]];
    masses_[o] = masses[keep[o]];
  }
}

bool ConeMeasure::deterministic_radial(double tol) const {
  std::map<std::vector<std::int64_t>, double> seen;
  for (int i = 0; i < size(); ++i) {
    auto key = quantize_row(points_.row(i));
    auto [it, inserted] = seen.emplace(std::move(key), radii_[i]);
    if (!inserted && std::abs(it->second - radii_[i]) > tol) return false;
  }
  return true;
}

double total_mass(const DiscreteMeasure& m) {
  double s = 0.0;
  for (int i = 0; i < m.size(); ++i) s += m.mass(i);
  return s;
}

double total_mass(const ConeMeasure& m) {
  double s = 0.0;
  for (int i = 0; i < m.size(); ++i) s += m.mass(i);
  return s;
}

double support_diameter(const DiscreteMeasure& m) {
  if (m.empty())
    fail(ErrorKind::EmptyMeasure, "support_diameter of empty measure");
  double best = 0.0;
  for (int i = 0; i < m.size(); ++i)
    for (int j = i + 1; j < m.size(); ++j) {
      const double d = (m.point(i) - m.point(j)).norm();
      if (d > best) best = d;
    }
  return best;
}

std::pair<DiscreteMeasure, double> rescale_to_diameter(
    const DiscreteMeasure& m, double target, bool allow_expand) {
  if (m.empty())
    fail(ErrorKind::EmptyMeasure, "rescale_to_diameter of empty measure");
  if (target <= 0.0)
    fail(ErrorKind::Usage, "rescale_to_diameter: target must be positive");
  const double diam = support_diameter(m);
  if (diam == 0.0 || (!allow_expand && diam <= target))
    return {m, 1.0};
  const double scale = target / diam;
  Eigen::RowVectorXd centroid =
      (m.masses().transpose() * m.points()) / total_mass(m);
  Mat pts = m.points();
  pts.rowwise() -= centroid;
  pts *= scale;
  pts.rowwise() += centroid;
  return {DiscreteMeasure(std::move(pts), m.masses()), scale};
}

DiscreteMeasure project_measure(const ConeMeasure& lambda) {
  // Stable first-appearance merge of coinciding base points.
  std::map<std::vector<std::int64_t>, int> index;
  std::vector<int> rep;          // representative input atom per output atom
  std::vector<double> out_mass;  // accumulated w * r^2
  for (int i = 0; i < lambda.size(); ++i) {
    const double r = lambda.radii()[i];
    const double wm = lambda.mass(i) * r * r;
    if (wm == 0.0) continue;  // apex contributes nothing
    auto key = quantize_row(lambda.points().row(i));
    auto [it, inserted] = index.emplace(std::move(key),
                                        static_cast<int>(rep.size()));
    if (inserted) {
      rep.push_back(i);
      out_mass.push_back(wm);
    } else {
      out_mass[it->second] += wm;
    }
  }
  Mat pts(static_cast<int>(rep.size()), lambda.dim());
  Vec ms(static_cast<int>(rep.size()));
  for (int o = 0; o < static_cast<int>(rep.size()); ++o) {
    pts.row(o) = lambda.points().row(rep[o]);
    ms[o] = out_mass[o];
  }
  return DiscreteMeasure(std::move(pts), std::move(ms));
}

bool radially_deterministic(const ConeMeasure& lambda, double pos_tol,
                            double r_tol) {
  if (pos_tol <= kCoordQuantum) return lambda.deterministic_radial(r_tol);
  // bucket atoms into cells of size pos_tol; only same/adjacent cells can
  // hold points within pos_tol of each other
  std::map<std::vector<std::int64_t>, std::vector<int>> cells;
  const int d = lambda.dim();
  for (int i = 0; i < lambda.size(); ++i) {
    std::vector<std::int64_t> key(d);
    for (int k = 0; k < d; ++k)
      key[k] = static_cast<std::int64_t>(
          std::floor(lambda.points()(i, k) / pos_tol));
    cells[key].push_back(i);
  }
  std::vector<std::vector<std::int64_t>> offsets;
  {
    std::vector<std::int64_t> off(d, -1);
    while (true) {
      offsets.push_back(off);
      int k = 0;
      while (k < d && ++off[k] > 1) off[k++] = -1;
      if (k == d) break;
    }
  }
  for (const auto& [key, idx] : cells) {
    for (const auto& off : offsets) {
      std::vector<std::int64_t> nb(d);
      for (int k = 0; k < d; ++k) nb[k] = key[k] + off[k];
      if (nb < key) continue;  // visit each unordered cell pair once
      auto it = cells.find(nb);
      if (it == cells.end()) continue;
      for (int i : idx)
        for (int j : it->second) {
          if (nb == key && j <= i) continue;
          if ((lambda.points().row(i) - lambda.points().row(j)).norm() <=
                  pos_tol &&
              std::abs(lambda.radii()[i] - lambda.radii()[j]) > r_tol)
            return false;
        }
    }
  }
  return true;
}

}  // namespace hk
