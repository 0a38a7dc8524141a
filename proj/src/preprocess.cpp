#include "dlo/preprocess.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <spdlog/spdlog.h>

namespace dlo {

BinaryGrid::BinaryGrid(int width, int height, double resolution, Point2 origin)
    : width_(width), height_(height), resolution_(resolution), origin_(origin) {
  if (width < 0 || height < 0) throw std::invalid_argument("BinaryGrid: negative size");
  if (!(resolution > 0.0)) throw std::invalid_argument("BinaryGrid: resolution must be positive");
  cells_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 0);
}

void BinaryGrid::set(int col, int row, bool v) {
  if (!in_bounds(col, row)) throw std::out_of_range("BinaryGrid::set: pixel out of bounds");
  cells_[static_cast<std::size_t>(row) * width_ + col] = v ? 1 : 0;
}

Point2 BinaryGrid::pixel_center(PixelCoord p) const {
  return {origin_.x + (p.col + 0.5) * resolution_, origin_.y + (p.row + 0.5) * resolution_};
}

PixelCoord BinaryGrid::pixel_of(const Point2& p) const {
  return {static_cast<int>(std::floor((p.x - origin_.x) / resolution_)),
          static_cast<int>(std::floor((p.y - origin_.y) / resolution_))};
}

std::size_t BinaryGrid::count() const {
  return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), std::uint8_t{1}));
}

std::vector<PixelCoord> BinaryGrid::occupied() const {
  std::vector<PixelCoord> out;
  for (int r = 0; r < height_; ++r) {
    for (int c = 0; c < width_; ++c) {
      if (at(c, r)) out.push_back({c, r});
    }
  }
  return out;
}

bool BinaryGrid::same_geometry(const BinaryGrid& o) const {
  return width_ == o.width_ && height_ == o.height_ && resolution_ == o.resolution_ && origin_ == o.origin_;
}

BinaryGrid grid_covering(const PointCloud2& pts, double resolution, int pad_px) {
  if (pts.empty()) throw std::invalid_argument("empty point cloud");
  if (!(resolution > 0.0)) throw std::invalid_argument("grid_covering: resolution must be positive");
  double minx = pts[0].x, maxx = pts[0].x, miny = pts[0].y, maxy = pts[0].y;
  for (const auto& p : pts) {
    if (!p.finite()) throw std::invalid_argument("grid_covering: non-finite point");
    minx = std::min(minx, p.x);
    maxx = std::max(maxx, p.x);
    miny = std::min(miny, p.y);
    maxy = std::max(maxy, p.y);
  }
  const Point2 origin{minx - pad_px * resolution, miny - pad_px * resolution};
  const int w = static_cast<int>(std::floor((maxx - origin.x) / resolution)) + 1 + pad_px;
  const int h = static_cast<int>(std::floor((maxy - origin.y) / resolution)) + 1 + pad_px;
  return BinaryGrid(w, h, resolution, origin);
}

BinaryGrid rasterize_into(const PointCloud2& points, const BinaryGrid& geometry) {
  BinaryGrid g = geometry.blank();
  for (const auto& p : points) {
    const PixelCoord px = g.pixel_of(p);
    if (g.in_bounds(px)) g.set(px);
  }
  return g;
}

BinaryGrid rasterize(const PointCloud2& points, double resolution) {
  return rasterize_into(points, grid_covering(points, resolution, 2));
}

namespace {

// Separable square-window min/max filter. For dilation (want = true) a pixel
// becomes set if any pixel in the window is set; erosion is the dual.
BinaryGrid square_filter(const BinaryGrid& in, int r, bool dilation) {
  if (r < 0) throw std::invalid_argument("morphology radius must be non-negative");
  const int w = in.width();
  const int h = in.height();
  BinaryGrid tmp = in.blank();
  for (int row = 0; row < h; ++row) {
    for (int col = 0; col < w; ++col) {
      bool v = !dilation;
      for (int dc = -r; dc <= r; ++dc) {
        const bool s = in.at(col + dc, row);
        if (dilation ? s : !s) {
          v = dilation;
          break;
        }
      }
      if (v) tmp.set(col, row);
    }
  }
  BinaryGrid out = in.blank();
  for (int row = 0; row < h; ++row) {
    for (int col = 0; col < w; ++col) {
      bool v = !dilation;
      for (int dr = -r; dr <= r; ++dr) {
        const bool s = tmp.at(col, row + dr);
        if (dilation ? s : !s) {
          v = dilation;
          break;
        }
      }
      if (v) out.set(col, row);
    }
  }
  return out;
}

// Neighbours P2..P9 clockwise starting north (+row).
constexpr std::array<std::array<int, 2>, 8> kRing = {{{0, 1}, {1, 1}, {1, 0}, {1, -1}, {0, -1}, {-1, -1}, {-1, 0}, {-1, 1}}};

std::array<int, 8> neighbourhood(const BinaryGrid& g, int c, int r) {
  std::array<int, 8> n{};
  for (std::size_t k = 0; k < 8; ++k) n[k] = g.at(c + kRing[k][0], r + kRing[k][1]) ? 1 : 0;
  return n;
}

int neighbour_count(const std::array<int, 8>& n) { return std::accumulate(n.begin(), n.end(), 0); }

int transitions(const std::array<int, 8>& n) {
  int a = 0;
  for (std::size_t k = 0; k < 8; ++k) {
    if (n[k] == 0 && n[(k + 1) % 8] == 1) ++a;
  }
  return a;
}

// 8-connectivity number (Yokoi); a pixel is simple iff it equals 1.
int connectivity8(const std::array<int, 8>& n) {
  int sum = 0;
  for (std::size_t k = 0; k < 8; k += 2) {
    const int a = 1 - n[k];
    const int b = 1 - n[(k + 1) % 8];
    const int c = 1 - n[(k + 2) % 8];
    sum += a - a * b * c;
  }
  return sum;
}

bool zs_condition(const std::array<int, 8>& n, int pass) {
  const int b = neighbour_count(n);
  if (b < 2 || b > 6 || transitions(n) != 1) return false;
  const int p2 = n[0], p4 = n[2], p6 = n[4], p8 = n[6];
  if (pass == 0) return p2 * p4 * p6 == 0 && p4 * p6 * p8 == 0;
  return p2 * p4 * p8 == 0 && p2 * p6 * p8 == 0;
}

}  // namespace

BinaryGrid dilate(const BinaryGrid& grid, int radius_px) { return square_filter(grid, radius_px, true); }

BinaryGrid erode(const BinaryGrid& grid, int radius_px) { return square_filter(grid, radius_px, false); }

BinaryGrid thin(const BinaryGrid& grid) {
  BinaryGrid g = grid;
  bool changed = true;
  while (changed) {
    changed = false;
    for (int pass = 0; pass < 2; ++pass) {
      std::vector<PixelCoord> candidates;
      for (const auto& p : g.occupied()) {
        if (zs_condition(neighbourhood(g, p.col, p.row), pass)) candidates.push_back(p);
      }
      for (const auto& p : candidates) {
        const auto n = neighbourhood(g, p.col, p.row);
        if (zs_condition(n, pass) && connectivity8(n) == 1) {
          g.set(p, false);
          changed = true;
        }
      }
    }
  }
  // Staircase removal: a simple, non-end pixel whose two 4-neighbours form a
  // corner is redundant for 8-connectivity.
  changed = true;
  while (changed) {
    changed = false;
    for (const auto& p : g.occupied()) {
      const auto n = neighbourhood(g, p.col, p.row);
      if (neighbour_count(n) < 2 || connectivity8(n) != 1) continue;
      const bool corner = (n[0] && n[2]) || (n[2] && n[4]) || (n[4] && n[6]) || (n[6] && n[0]);
      if (corner) {
        g.set(p, false);
        changed = true;
      }
    }
  }
  return g;
}

std::vector<PixelCoord> find_intersections(const BinaryGrid& skeleton, int merge_radius_px) {
  std::vector<PixelCoord> branch;
  for (const auto& p : skeleton.occupied()) {
    if (neighbour_count(neighbourhood(skeleton, p.col, p.row)) >= 3) branch.push_back(p);
  }
  std::vector<std::size_t> parent(branch.size());
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  const auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (std::size_t i = 0; i < branch.size(); ++i) {
    for (std::size_t j = i + 1; j < branch.size(); ++j) {
      const int d = std::max(std::abs(branch[i].col - branch[j].col), std::abs(branch[i].row - branch[j].row));
      if (d <= merge_radius_px) parent[find(j)] = find(i);
    }
  }
  std::vector<PixelCoord> out;
  for (std::size_t root = 0; root < branch.size(); ++root) {
    if (find(root) != root) continue;
    double sc = 0.0, sr = 0.0;
    std::vector<PixelCoord> members;
    for (std::size_t i = 0; i < branch.size(); ++i) {
      if (find(i) == root) members.push_back(branch[i]);
    }
    for (const auto& m : members) {
      sc += m.col;
      sr += m.row;
    }
    sc /= static_cast<double>(members.size());
    sr /= static_cast<double>(members.size());
    PixelCoord best = members.front();
    double best_d = std::numeric_limits<double>::infinity();
    for (const auto& m : members) {
      const double d = (m.col - sc) * (m.col - sc) + (m.row - sr) * (m.row - sr);
      if (d < best_d) {
        best_d = d;
        best = m;
      }
    }
    out.push_back(best);
  }
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

// Pixels at Chebyshev distance exactly w from c, in cyclic order.
std::vector<PixelCoord> ring_pixels(PixelCoord c, int w) {
  std::vector<PixelCoord> ring;
  for (int d = -w; d < w; ++d) ring.push_back({c.col + d, c.row - w});
  for (int d = -w; d < w; ++d) ring.push_back({c.col + w, c.row + d});
  for (int d = w; d > -w; --d) ring.push_back({c.col + d, c.row + w});
  for (int d = w; d > -w; --d) ring.push_back({c.col - w, c.row + d});
  return ring;
}

void draw(BinaryGrid& g, PixelCoord a, PixelCoord b) {
  for (const auto& p : bresenham(a, b)) {
    if (g.in_bounds(p)) g.set(p);
  }
}

}  // namespace

BinaryGrid linearize_intersections(const BinaryGrid& skeleton, const std::vector<PixelCoord>& intersections,
                                   int window_px) {
  if (window_px < 1) throw std::invalid_argument("linearize_intersections: window must be >= 1");
  BinaryGrid g = skeleton;
  for (const auto& c : intersections) {
    const auto ring = ring_pixels(c, window_px);
    std::vector<int> occ(ring.size());
    for (std::size_t i = 0; i < ring.size(); ++i) occ[i] = g.at(ring[i]) ? 1 : 0;
    // Rotate so the walk starts on an empty ring pixel.
    const auto empty_it = std::find(occ.begin(), occ.end(), 0);
    std::vector<PixelCoord> stubs;
    if (empty_it != occ.end()) {
      const std::size_t start = static_cast<std::size_t>(empty_it - occ.begin());
      std::vector<std::size_t> run;
      for (std::size_t k = 1; k <= ring.size(); ++k) {
        const std::size_t i = (start + k) % ring.size();
        if (occ[i]) {
          run.push_back(i);
        } else if (!run.empty()) {
          stubs.push_back(ring[run[run.size() / 2]]);
          run.clear();
        }
      }
    }
    if (stubs.size() < 2) {
      spdlog::debug("linearize_intersections: {} stub(s) around ({}, {}); window left unchanged", stubs.size(), c.col,
                   c.row);
      continue;
    }
    for (int r = c.row - window_px + 1; r < c.row + window_px; ++r) {
      for (int col = c.col - window_px + 1; col < c.col + window_px; ++col) {
        if (g.in_bounds(col, r)) g.set(col, r, false);
      }
    }
    std::vector<Point2> dirs;
    for (const auto& s : stubs) dirs.push_back(normalized(Point2(c.col - s.col, c.row - s.row)));
    std::vector<char> used(stubs.size(), 0);
    bool first = true;
    while (true) {
      std::size_t bi = stubs.size(), bj = stubs.size();
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < stubs.size(); ++i) {
        if (used[i]) continue;
        for (std::size_t j = i + 1; j < stubs.size(); ++j) {
          if (used[j]) continue;
          const double v = (dirs[i] + dirs[j]).norm();
          if (v < best) {
            best = v;
            bi = i;
            bj = j;
          }
        }
      }
      if (bi == stubs.size()) break;
      used[bi] = used[bj] = 1;
      if (first) {
        draw(g, stubs[bi], c);
        draw(g, c, stubs[bj]);
        first = false;
      } else {
        draw(g, stubs[bi], stubs[bj]);
      }
    }
    for (std::size_t i = 0; i < stubs.size(); ++i) {
      if (!used[i]) draw(g, stubs[i], c);
    }
  }
  return g;
}

PointCloud2 deproject(const BinaryGrid& grid) {
  PointCloud2 out;
  for (const auto& p : grid.occupied()) out.push_back(grid.pixel_center(p));
  return out;
}

std::size_t count_components(const BinaryGrid& grid) {
  BinaryGrid seen = grid.blank();
  std::size_t components = 0;
  std::vector<PixelCoord> stack;
  for (const auto& p : grid.occupied()) {
    if (seen.at(p)) continue;
    ++components;
    stack.push_back(p);
    seen.set(p);
    while (!stack.empty()) {
      const PixelCoord q = stack.back();
      stack.pop_back();
      for (const auto& d : kRing) {
        const PixelCoord nb{q.col + d[0], q.row + d[1]};
        if (grid.at(nb) && !seen.at(nb)) {
          seen.set(nb);
          stack.push_back(nb);
        }
      }
    }
  }
  return components;
}

}  // namespace dlo
