#pragma once

#include <cstdint>
#include <vector>

#include "dlo/geometry.hpp"

namespace dlo {

/// Occupancy raster in world millimeters. Pixel (col, row) covers
/// [origin.x + col*res, origin.x + (col+1)*res) x [origin.y + row*res, ...);
/// rows grow with +y.
class BinaryGrid {
 public:
  BinaryGrid() = default;
  BinaryGrid(int width, int height, double resolution, Point2 origin);

  int width() const { return width_; }
  int height() const { return height_; }
  double resolution() const { return resolution_; }
  const Point2& origin() const { return origin_; }

  bool in_bounds(int col, int row) const { return col >= 0 && row >= 0 && col < width_ && row < height_; }
  bool in_bounds(PixelCoord p) const { return in_bounds(p.col, p.row); }
  /// Out-of-bounds reads return false.
  bool at(int col, int row) const {
    return in_bounds(col, row) && cells_[static_cast<std::size_t>(row) * width_ + col] != 0;
  }
  bool at(PixelCoord p) const { return at(p.col, p.row); }
  void set(int col, int row, bool v = true);
  void set(PixelCoord p, bool v = true) { set(p.col, p.row, v); }

  Point2 pixel_center(PixelCoord p) const;
  /// Pixel containing the world point (may be out of bounds).
  PixelCoord pixel_of(const Point2& p) const;

  std::size_t count() const;
  /// Occupied pixels in row-major order.
  std::vector<PixelCoord> occupied() const;
  /// Same size, resolution and origin.
  bool same_geometry(const BinaryGrid& o) const;
  /// Empty grid with this geometry.
  BinaryGrid blank() const { return BinaryGrid(width_, height_, resolution_, origin_); }

  bool operator==(const BinaryGrid& o) const { return same_geometry(o) && cells_ == o.cells_; }

 private:
  int width_ = 0;
  int height_ = 0;
  double resolution_ = 1.0;
  Point2 origin_;
  std::vector<std::uint8_t> cells_;
};

/// Grid covering the bounding box of pts padded by pad_px pixels, all empty.
BinaryGrid grid_covering(const PointCloud2& pts, double resolution, int pad_px = 2);

/// Marks the pixel of every point. Throws on an empty cloud.
BinaryGrid rasterize(const PointCloud2& points, double resolution);
/// Marks points into an existing geometry; points outside are ignored.
BinaryGrid rasterize_into(const PointCloud2& points, const BinaryGrid& geometry);

/// Square (2r+1)^2 structuring element.
BinaryGrid dilate(const BinaryGrid& grid, int radius_px);
/// Square (2r+1)^2 structuring element; pixels outside the grid count as empty.
BinaryGrid erode(const BinaryGrid& grid, int radius_px);

/// Zhang-Suen thinning to an 8-connected one-pixel skeleton. Candidate
/// deletions of each subiteration are re-checked in raster order against the
/// partially updated image so connectivity is never broken, and a final pass
/// removes staircase corners.
BinaryGrid thin(const BinaryGrid& grid);

/// Branch pixels (>= 3 occupied 8-neighbours) clustered within merge_radius_px
/// (Chebyshev); each cluster is reported by its member closest to the cluster centroid.
std::vector<PixelCoord> find_intersections(const BinaryGrid& skeleton, int merge_radius_px = 2);

/// Replaces the skeleton inside a window of half-size window_px around each
/// intersection with straight strokes joining the stubs leaving the window.
BinaryGrid linearize_intersections(const BinaryGrid& skeleton, const std::vector<PixelCoord>& intersections,
                                   int window_px);

/// One point per occupied pixel at its center, row-major order.
PointCloud2 deproject(const BinaryGrid& grid);

/// Number of 8-connected components of occupied pixels.
std::size_t count_components(const BinaryGrid& grid);

}  // namespace dlo
