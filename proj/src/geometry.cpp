#include "dlo/geometry.hpp"

#include <algorithm>
#include <numbers>
#include <stdexcept>

namespace dlo {

Point2 normalized(const Point2& v) {
  const double n = v.norm();
  if (n == 0.0) return {0.0, 0.0};
  return v / n;
}

Point2 centroid(const PointCloud2& pts) {
  if (pts.empty()) throw std::invalid_argument("centroid of empty point set");
  Point2 s;
  for (const auto& p : pts) s += p;
  return s / static_cast<double>(pts.size());
}

SymMat2 SymMat2::inverse() const {
  const double d = det();
  return {yy / d, -xy / d, xx / d};
}

bool SymMat2::is_psd() const {
  const double eps = 1e-9 * trace() * trace();
  return xx >= 0.0 && yy >= 0.0 && det() >= -eps;
}

SymMat2 SymMat2::rotated(double theta) const {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  // R M R^T with R = [[c, -s], [s, c]]
  const double a = c * xx - s * xy;
  const double b = c * xy - s * yy;
  const double d = s * xx + c * xy;
  const double e = s * xy + c * yy;
  return {a * c - b * s, a * s + b * c, d * s + e * c};
}

Eigen2 eig_sym2(const SymMat2& m) {
  const double half_tr = 0.5 * (m.xx + m.yy);
  const double half_diff = 0.5 * (m.xx - m.yy);
  const double r = std::hypot(half_diff, m.xy);
  const double theta = 0.5 * std::atan2(m.xy, half_diff);
  const Point2 v1{std::cos(theta), std::sin(theta)};
  return {{half_tr + r, half_tr - r}, {v1, perp(v1)}};
}

Eigen::MatrixXd pinv(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return Eigen::MatrixXd(m.cols(), m.rows());
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double tol = static_cast<double>(std::max(m.rows(), m.cols())) * sv(0) * 1e-12;
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(sv.size());
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > tol) inv(i) = 1.0 / sv(i);
  }
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

double Ellipse::quadratic_form(const Point2& p) const {
  const Point2 d = p - center;
  const double c = std::cos(orientation);
  const double s = std::sin(orientation);
  const double u = c * d.x + s * d.y;
  const double v = -s * d.x + c * d.y;
  return (u * u) / (semi_major * semi_major) + (v * v) / (semi_minor * semi_minor);
}

Ellipse ellipse_from_covariance(const SymMat2& sigma, const Point2& center) {
  if (!(sigma.xx > 0.0) || !(sigma.det() > 0.0)) {
    throw std::invalid_argument("ellipse_from_covariance: covariance is not positive definite");
  }
  const Eigen2 es = eig_sym2(sigma);
  if (!(es.values[1] > 0.0)) {
    throw std::invalid_argument("ellipse_from_covariance: covariance is not positive definite");
  }
  double angle = std::atan2(es.vectors[0].y, es.vectors[0].x);
  if (angle < 0.0) angle += std::numbers::pi;
  if (angle >= std::numbers::pi) angle -= std::numbers::pi;
  return {center, 2.0 * std::sqrt(es.values[0]), 2.0 * std::sqrt(es.values[1]), angle};
}

std::vector<Point2> line_ellipse_intersection(const Ellipse& e, const Point2& through, const Point2& direction) {
  const double c = std::cos(e.orientation);
  const double s = std::sin(e.orientation);
  const Point2 d0 = through - e.center;
  // Line expressed in the ellipse frame, axes scaled to the unit circle.
  const double u0 = (c * d0.x + s * d0.y) / e.semi_major;
  const double v0 = (-s * d0.x + c * d0.y) / e.semi_minor;
  const double du = (c * direction.x + s * direction.y) / e.semi_major;
  const double dv = (-s * direction.x + c * direction.y) / e.semi_minor;
  const double qa = du * du + dv * dv;
  const double qb = 2.0 * (u0 * du + v0 * dv);
  const double qc = u0 * u0 + v0 * v0 - 1.0;
  const double disc = qb * qb - 4.0 * qa * qc;
  if (qa == 0.0 || disc < 0.0) return {};
  if (disc == 0.0) return {through + direction * (-qb / (2.0 * qa))};
  const double root = std::sqrt(disc);
  // Numerically stable pair of roots.
  const double q = -0.5 * (qb + std::copysign(root, qb));
  double s1 = q / qa;
  double s2 = (q != 0.0) ? qc / q : -s1;
  if (s1 > s2) std::swap(s1, s2);
  return {through + direction * s1, through + direction * s2};
}

std::vector<PixelCoord> bresenham(PixelCoord a, PixelCoord b) {
  // Always rasterize from the lexicographically smaller end so that the
  // pixel set does not depend on direction.
  const bool reversed = b < a;
  if (reversed) std::swap(a, b);
  std::vector<PixelCoord> out;
  const int dx = std::abs(b.col - a.col);
  const int dy = -std::abs(b.row - a.row);
  const int sx = a.col < b.col ? 1 : -1;
  const int sy = a.row < b.row ? 1 : -1;
  out.reserve(static_cast<std::size_t>(std::max(dx, -dy)) + 1);
  int err = dx + dy;
  PixelCoord p = a;
  while (true) {
    out.push_back(p);
    if (p == b) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      p.col += sx;
    }
    if (e2 <= dx) {
      err += dx;
      p.row += sy;
    }
  }
  if (reversed) std::reverse(out.begin(), out.end());
  return out;
}

}  // namespace dlo
