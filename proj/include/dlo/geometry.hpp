#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace dlo {

/// Planar point or vector in millimeters.
struct Point2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Point2() = default;
  constexpr Point2(double px, double py) : x(px), y(py) {}

  constexpr Point2 operator+(const Point2& o) const { return {x + o.x, y + o.y}; }
  constexpr Point2 operator-(const Point2& o) const { return {x - o.x, y - o.y}; }
  constexpr Point2 operator-() const { return {-x, -y}; }
  constexpr Point2 operator*(double s) const { return {x * s, y * s}; }
  constexpr Point2 operator/(double s) const { return {x / s, y / s}; }
  constexpr Point2& operator+=(const Point2& o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  constexpr Point2& operator-=(const Point2& o) {
    x -= o.x;
    y -= o.y;
    return *this;
  }
  constexpr bool operator==(const Point2&) const = default;

  double norm() const { return std::hypot(x, y); }
  constexpr double squared_norm() const { return x * x + y * y; }
  bool finite() const { return std::isfinite(x) && std::isfinite(y); }
};

constexpr Point2 operator*(double s, const Point2& p) { return p * s; }
constexpr double dot(const Point2& a, const Point2& b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(const Point2& a, const Point2& b) { return a.x * b.y - a.y * b.x; }
inline double distance(const Point2& a, const Point2& b) { return (a - b).norm(); }
/// Counter-clockwise rotation by 90 degrees.
constexpr Point2 perp(const Point2& v) { return {-v.y, v.x}; }
Point2 normalized(const Point2& v);

using PointCloud2 = std::vector<Point2>;

Point2 centroid(const PointCloud2& pts);

/// Symmetric 2x2 matrix stored by its three unique entries.
struct SymMat2 {
  double xx = 0.0;
  double xy = 0.0;
  double yy = 0.0;

  static constexpr SymMat2 identity(double s = 1.0) { return {s, 0.0, s}; }
  static constexpr SymMat2 outer(const Point2& v) { return {v.x * v.x, v.x * v.y, v.y * v.y}; }

  constexpr SymMat2 operator+(const SymMat2& o) const { return {xx + o.xx, xy + o.xy, yy + o.yy}; }
  constexpr SymMat2 operator-(const SymMat2& o) const { return {xx - o.xx, xy - o.xy, yy - o.yy}; }
  constexpr SymMat2 operator*(double s) const { return {xx * s, xy * s, yy * s}; }
  constexpr SymMat2& operator+=(const SymMat2& o) {
    xx += o.xx;
    xy += o.xy;
    yy += o.yy;
    return *this;
  }
  constexpr bool operator==(const SymMat2&) const = default;

  constexpr double trace() const { return xx + yy; }
  constexpr double det() const { return xx * yy - xy * xy; }
  constexpr Point2 operator*(const Point2& v) const { return {xx * v.x + xy * v.y, xy * v.x + yy * v.y}; }
  /// Inverse; caller guarantees det() != 0.
  SymMat2 inverse() const;
  /// v^T M v
  constexpr double quad(const Point2& v) const { return xx * v.x * v.x + 2.0 * xy * v.x * v.y + yy * v.y * v.y; }
  bool is_psd() const;
  /// R M R^T for a rotation by angle theta.
  SymMat2 rotated(double theta) const;
};

struct Eigen2 {
  std::array<double, 2> values;   // descending
  std::array<Point2, 2> vectors;  // orthonormal, vectors[i] pairs with values[i]
};

/// Closed-form eigendecomposition of a symmetric 2x2 matrix.
Eigen2 eig_sym2(const SymMat2& m);

/// Moore-Penrose pseudoinverse. Singular values below
/// max(rows, cols) * sigma_max * 1e-12 are treated as zero.
Eigen::MatrixXd pinv(const Eigen::MatrixXd& m);

struct Ellipse {
  Point2 center;
  double semi_major = 0.0;
  double semi_minor = 0.0;
  double orientation = 0.0;  // radians of the major axis, in [0, pi)

  /// (p - c)^T S^{-1} (p - c) where S is the shape matrix of this ellipse; 1 on the boundary.
  double quadratic_form(const Point2& p) const;
  bool contains(const Point2& p) const { return quadratic_form(p) <= 1.0; }
};

/// Ellipse whose semi-axes are the square roots of the eigenvalues of 4*sigma.
/// Throws std::invalid_argument if sigma is not positive definite.
Ellipse ellipse_from_covariance(const SymMat2& sigma, const Point2& center);

/// Intersections of the line {through + s*direction} with the ellipse boundary,
/// ordered by s. Empty when the line misses the ellipse.
std::vector<Point2> line_ellipse_intersection(const Ellipse& e, const Point2& through, const Point2& direction);

struct PixelCoord {
  int col = 0;
  int row = 0;
  constexpr bool operator==(const PixelCoord&) const = default;
  constexpr auto operator<=>(const PixelCoord&) const = default;
};

/// 8-connected integer line from a to b inclusive.
std::vector<PixelCoord> bresenham(PixelCoord a, PixelCoord b);

}  // namespace dlo
