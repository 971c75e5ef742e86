#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "hk/error.hpp"

namespace hk {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Relative mass floor: atoms lighter than this fraction of the total are
// dropped at construction so later divisions by marginal masses stay sane.
inline constexpr double kMassFloorRel = 1e-15;

// Coordinates are quantized to this resolution when deciding whether two
// atoms occupy the same base point.
inline constexpr double kCoordQuantum = 1e-12;

// Weighted atom cloud on R^d. Immutable after construction.
class DiscreteMeasure {
 public:
  DiscreteMeasure() = default;

  // points: n x d (row per atom), masses: n. Nonpositive and sub-floor
  // masses are filtered.
  DiscreteMeasure(Mat points, Vec masses);

  int size() const { return static_cast<int>(masses_.size()); }
  bool empty() const { return size() == 0; }
  int dim() const { return static_cast<int>(points_.cols()); }

  const Mat& points() const { return points_; }
  const Vec& masses() const { return masses_; }
  Eigen::RowVectorXd point(int i) const { return points_.row(i); }
  double mass(int i) const { return masses_[i]; }

 private:
  Mat points_;  // n x d
  Vec masses_;  // n, strictly positive
};

// Point on the metric cone over R^d; r == 0 is the apex regardless of x.
struct ConePoint {
  Vec x;
  double r = 0.0;

  ConePoint() = default;
  ConePoint(Vec x_, double r_) : x(std::move(x_)), r(r_) {
    if (r < 0.0) fail(ErrorKind::ApexPoint, "cone radius must be >= 0");
  }
  bool is_apex() const { return r == 0.0; }
};

// Weighted atom cloud on the cone. Rows of points() pair with radii().
class ConeMeasure {
 public:
  ConeMeasure() = default;
  ConeMeasure(Mat points, Vec radii, Vec masses);

  int size() const { return static_cast<int>(masses_.size()); }
  bool empty() const { return size() == 0; }
  int dim() const { return static_cast<int>(points_.cols()); }

  const Mat& points() const { return points_; }
  const Vec& radii() const { return radii_; }
  const Vec& masses() const { return masses_; }
  ConePoint atom(int i) const { return ConePoint(points_.row(i), radii_[i]); }
  double mass(int i) const { return masses_[i]; }

  // True when no two atoms share a base point with radii differing by more
  // than 1e-12 (the deterministic conditional radial law).
  bool deterministic_radial(double tol = 1e-12) const;

 private:
  Mat points_;
  Vec radii_;  // nonnegative
  Vec masses_;
};

double total_mass(const DiscreteMeasure& m);
double total_mass(const ConeMeasure& m);

// Max pairwise Euclidean distance over atoms. Throws EmptyMeasure.
double support_diameter(const DiscreteMeasure& m);

// Scales points about the mass-weighted centroid so the support diameter
// equals `target`. With allow_expand == false a measure whose diameter is
// already <= target is returned unchanged. Returns {measure, scale}.
std::pair<DiscreteMeasure, double> rescale_to_diameter(
    const DiscreteMeasure& m, double target, bool allow_expand = true);

// Cone-to-base projection: atom (x, r) with mass w becomes base atom x with
// mass w * r^2. Apex atoms vanish; coinciding base points merge.
DiscreteMeasure project_measure(const ConeMeasure& lambda);

// Diagnostic used by the interpolation figures: clusters atoms whose base
// points lie within pos_tol of each other (single-linkage) and checks that
// radii agree within r_tol inside each cluster. With both tolerances at
// their strict defaults this reduces to deterministic_radial.
bool radially_deterministic(const ConeMeasure& lambda, double pos_tol,
                            double r_tol);

}  // namespace hk
