#include "dlo/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dlo {

BinaryGrid ground_truth_mask(const PointCloud2& points, const BinaryGrid& geometry) {
  return erode(dilate(rasterize_into(points, geometry), 1), 1);
}

BinaryGrid ground_truth_mask(const PointCloud2& points, double resolution) {
  return ground_truth_mask(points, grid_covering(points, resolution, 2));
}

BinaryGrid band_mask(std::span<const Point2> polyline, double half_width, const BinaryGrid& geometry) {
  BinaryGrid out = geometry.blank();
  std::vector<Point2> poly;
  for (const auto& p : polyline) {
    if (poly.empty() || !(poly.back() == p)) poly.push_back(p);
  }
  if (poly.size() < 2 || !(half_width > 0.0)) return out;
  const int w = geometry.width();
  const int h = geometry.height();
  std::vector<double> best(static_cast<std::size_t>(w) * static_cast<std::size_t>(h),
                           std::numeric_limits<double>::infinity());
  std::vector<char> behind_cap(best.size(), 0);
  const std::size_t nseg = poly.size() - 1;
  for (std::size_t s = 0; s < nseg; ++s) {
    const Point2 a = poly[s];
    const Point2 b = poly[s + 1];
    const Point2 ab = b - a;
    const double len2 = ab.squared_norm();
    const PixelCoord lo = geometry.pixel_of({std::min(a.x, b.x) - half_width, std::min(a.y, b.y) - half_width});
    const PixelCoord hi = geometry.pixel_of({std::max(a.x, b.x) + half_width, std::max(a.y, b.y) + half_width});
    for (int row = std::max(lo.row, 0); row <= std::min(hi.row, h - 1); ++row) {
      for (int col = std::max(lo.col, 0); col <= std::min(hi.col, w - 1); ++col) {
        const Point2 p = geometry.pixel_center({col, row});
        const double u = dot(p - a, ab) / len2;
        const double d = distance(p, a + ab * std::clamp(u, 0.0, 1.0));
        const bool cap = (s == 0 && u < 0.0) || (s + 1 == nseg && u > 1.0);
        const std::size_t idx = static_cast<std::size_t>(row) * w + col;
        if (d < best[idx] || (d == best[idx] && !cap)) {
          best[idx] = d;
          behind_cap[idx] = cap ? 1 : 0;
        }
      }
    }
  }
  for (int row = 0; row < h; ++row) {
    for (int col = 0; col < w; ++col) {
      const std::size_t idx = static_cast<std::size_t>(row) * w + col;
      if (best[idx] <= half_width && !behind_cap[idx]) out.set(col, row);
    }
  }
  return out;
}

void paint_ellipse(BinaryGrid& grid, const Ellipse& e) {
  const double r = e.semi_major;
  const PixelCoord lo = grid.pixel_of({e.center.x - r, e.center.y - r});
  const PixelCoord hi = grid.pixel_of({e.center.x + r, e.center.y + r});
  for (int row = std::max(lo.row, 0); row <= std::min(hi.row, grid.height() - 1); ++row) {
    for (int col = std::max(lo.col, 0); col <= std::min(hi.col, grid.width() - 1); ++col) {
      if (e.contains(grid.pixel_center({col, row}))) grid.set(col, row);
    }
  }
}

BinaryGrid estimate_mask(const ShapeEstimate& shape, const BinaryGrid& geometry) {
  const auto poly = centerline_polyline(shape);
  BinaryGrid out = band_mask(poly, shape.half_width, geometry);
  for (const auto& e : shape.ellipses) paint_ellipse(out, e);
  return out;
}

double iou(const BinaryGrid& a, const BinaryGrid& b) {
  if (!a.same_geometry(b)) throw std::invalid_argument("iou: masks have different grid geometry");
  std::size_t inter = 0, uni = 0;
  for (int row = 0; row < a.height(); ++row) {
    for (int col = 0; col < a.width(); ++col) {
      const bool x = a.at(col, row);
      const bool y = b.at(col, row);
      inter += (x && y) ? 1 : 0;
      uni += (x || y) ? 1 : 0;
    }
  }
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

BinaryGrid geometry_covering(std::span<const Point2> points, double margin_mm, double resolution) {
  if (points.empty()) throw std::invalid_argument("geometry_covering: no points");
  double minx = points[0].x, maxx = points[0].x, miny = points[0].y, maxy = points[0].y;
  for (const auto& p : points) {
    minx = std::min(minx, p.x);
    maxx = std::max(maxx, p.x);
    miny = std::min(miny, p.y);
    maxy = std::max(maxy, p.y);
  }
  const Point2 origin{minx - margin_mm, miny - margin_mm};
  const int w = static_cast<int>(std::ceil((maxx - minx + 2.0 * margin_mm) / resolution)) + 1;
  const int h = static_cast<int>(std::ceil((maxy - miny + 2.0 * margin_mm) / resolution)) + 1;
  return BinaryGrid(w, h, resolution, origin);
}

std::vector<Point2> estimate_extent(const ShapeEstimate& shape) {
  std::vector<Point2> pts = centerline_polyline(shape);
  for (const auto& e : shape.ellipses) {
    const double r = e.semi_major;
    pts.push_back({e.center.x - r, e.center.y - r});
    pts.push_back({e.center.x + r, e.center.y + r});
  }
  return pts;
}

double truth_iou(const ShapeEstimate& shape, const GroundTruth& truth, double resolution) {
  std::vector<Point2> cover = estimate_extent(shape);
  cover.insert(cover.end(), truth.centerline.begin(), truth.centerline.end());
  const BinaryGrid geom = geometry_covering(cover, truth.width + 2.0 * resolution, resolution);
  return iou(estimate_mask(shape, geom), band_mask(truth.centerline, 0.5 * truth.width, geom));
}

}  // namespace dlo
