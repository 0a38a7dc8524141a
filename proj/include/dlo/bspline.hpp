#pragma once

#include <span>
#include <utility>
#include <vector>

#include "dlo/geometry.hpp"

namespace dlo {

/// Clamped uniform knot vector for n+1 control points of degree d:
/// d+1 zeros, interior 1..n-d, then d+1 copies of n-d+1.
std::vector<double> make_clamped_knots(int n, int d);

/// Cox-de Boor basis N_{i,d}(t), with 0/0 terms taken as 0. At the right end
/// of the domain the last non-empty knot span is treated as closed so that
/// clamped curves reach their final control point.
double basis(int i, int d, double t, std::span<const double> knots);

class BSplineCurve {
 public:
  BSplineCurve() = default;
  /// Builds a clamped curve; requires control_points.size() >= degree + 1.
  BSplineCurve(int degree, std::vector<Point2> control_points);
  /// Builds a curve from an explicit knot vector (used when deserializing).
  BSplineCurve(int degree, std::vector<Point2> control_points, std::vector<double> knots);

  int degree() const { return degree_; }
  /// Index of the last control point (control point count minus one).
  int n() const { return static_cast<int>(ctrl_.size()) - 1; }
  const std::vector<Point2>& control_points() const { return ctrl_; }
  const std::vector<double>& knots() const { return knots_; }
  double domain_begin() const { return knots_[static_cast<std::size_t>(degree_)]; }
  double domain_end() const { return knots_[ctrl_.size()]; }

  /// Point on the curve; t outside the domain is clamped.
  Point2 eval(double t) const;
  /// Row of basis values N_{0..n,d}(t).
  std::vector<double> basis_row(double t) const;
  /// dp/dt, analytic.
  Point2 derivative(double t) const;
  /// Unit tangent. Falls back to a one-sided finite difference when the
  /// analytic derivative vanishes; throws if that is zero as well.
  Point2 tangent(double t) const;

  /// Polyline length with 64 samples per knot span, refined until the
  /// relative change drops below 0.1%.
  double arc_length() const { return arc_length(domain_begin(), domain_end()); }
  double arc_length(double t0, double t1) const;

  /// Dense samples of [t0, t1] with the given number of points per knot span.
  std::vector<double> sample_parameters(double t0, double t1, int per_span = 64) const;

  BSplineCurve reversed() const;

 private:
  double clamp(double t) const;
  int find_span(double t) const;

  int degree_ = 0;
  std::vector<Point2> ctrl_;
  std::vector<double> knots_;
};

struct CentripetalResult {
  std::vector<double> params;
  bool had_duplicates = false;
};

/// Centripetal parameterization (chord-length exponent 1/2) of an ordered
/// point sequence, scaled so the first parameter is 0 and the last is domain_end.
CentripetalResult centripetal_params(std::span<const Point2> points, double domain_end);

struct OffsetPolylines {
  std::vector<Point2> left;   // displaced along +normal (tangent rotated +90 deg)
  std::vector<Point2> right;  // displaced along -normal
};

OffsetPolylines offset_polylines(const BSplineCurve& curve, double h, double t0, double t1, int per_span = 16);
inline OffsetPolylines offset_polylines(const BSplineCurve& curve, double h) {
  return offset_polylines(curve, h, curve.domain_begin(), curve.domain_end());
}

}  // namespace dlo
