#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "dlo/geometry.hpp"

namespace dlo {

/// Curvature varies linearly from k0 to k1 over the piece (1/mm).
struct CurvaturePiece {
  double length = 0.0;
  double k0 = 0.0;
  double k1 = 0.0;
};

struct CurvatureProfile {
  Point2 start;
  double heading = 0.0;  // radians
  std::vector<CurvaturePiece> pieces;

  double total_length() const;
  double curvature_at(double s) const;
};

/// Dense centerline (step ds) obtained by integrating a curvature function.
std::vector<Point2> integrate_curvature(Point2 start, double heading, double length,
                                        const std::function<double(double)>& kappa, double ds = 0.5);
std::vector<Point2> integrate_profile(const CurvatureProfile& profile, double ds = 0.5);

/// Centripetal Catmull-Rom interpolation through waypoints, resampled at step ds.
std::vector<Point2> smooth_waypoints(std::span<const Point2> waypoints, double ds = 0.5);

double polyline_length(std::span<const Point2> poly);
/// Evenly spaced resampling by arc length (last point kept).
std::vector<Point2> resample(std::span<const Point2> poly, double ds);

struct Crossing {
  Point2 point;
  double s1 = 0.0;  // arc length of the first pass
  double s2 = 0.0;  // arc length of the second pass
};

/// Self-intersections between parts of the polyline more than min_gap apart in arc length.
std::vector<Crossing> find_crossings(std::span<const Point2> poly, double min_gap);

struct GroundTruth {
  std::vector<Point2> centerline;
  double width = 0.0;
  double length = 0.0;
  std::vector<Crossing> crossings;
};

struct SyntheticSpec {
  /// Dense centerline of every frame.
  std::vector<std::vector<Point2>> frames;
  double width = 16.0;
  double spacing = 2.0;
  double noise_sigma = 1.0;
  std::uint64_t seed = 1;
  /// Columns at -w/2, -w/2+spacing, ..., +w/2 instead of cell centers.
  bool edge_columns = false;

  void validate() const;
};

struct SyntheticFrame {
  PointCloud2 points;
  GroundTruth truth;
};

/// Lattice points inside the band around the frame's centerline: rows every
/// spacing mm of arc length (both ends included), and width/spacing columns
/// at cell centers across the band (width/spacing + 1 columns reaching both
/// edges when edge_columns is set). Each point gets isotropic Gaussian noise.
SyntheticFrame generate(const SyntheticSpec& spec, std::size_t frame, std::uint64_t seed);

enum class Preset { Straight, C, S, U, Spiral, Nine };

Preset preset_from_name(const std::string& name);
std::string preset_name(Preset p);
std::vector<Preset> all_presets();

/// Desk-scale shapes of total length `length` mm starting at the origin heading +x.
CurvatureProfile preset_profile(Preset p, double length = 900.0);
std::vector<Point2> preset_centerline(Preset p, double length = 900.0);

/// Centerlines blending the curvature of two profiles, frame 0 = a, last = b.
std::vector<std::vector<Point2>> morph_sequence(const CurvatureProfile& a, const CurvatureProfile& b, int frames);

/// Wave-shaped object whose length swings 800 +- 150 mm while its bending changes.
std::vector<std::vector<Point2>> stretch_sequence(int frames);

/// Same centerline every frame, translated by offset from frame `at` onward.
std::vector<std::vector<Point2>> teleport_sequence(const std::vector<Point2>& base, int frames, int at, Point2 offset);

}  // namespace dlo
