#pragma once

#include <utility>
#include <vector>

#include "dlo/bspline.hpp"
#include "dlo/geometry.hpp"
#include "dlo/rmm_em.hpp"

namespace dlo {

struct ShapeEstimate {
  BSplineCurve curve;
  std::vector<double> params;   // t_k of each component
  std::vector<Point2> centers;  // c_k
  std::vector<SymMat2> sigmas;
  std::vector<std::size_t> counts;
  std::vector<Ellipse> ellipses;  // from 4*Sigma_k
  double half_width = 0.0;
  double total_length = 0.0;
  Point2 e1;
  Point2 e2;
  OffsetPolylines offsets;
};

/// Mean perpendicular half-chord of the width_scale*Sigma_k ellipses, measured
/// along the curve normal at each center. width_scale = 4 uses the display
/// ellipses; 3 matches the second moment of a uniformly filled band.
double estimate_half_width(const ChainedModel& model, double width_scale = 3.0);

/// Ends of the object: where the tangent line at the first (last) center
/// leaves the first (last) 4*Sigma ellipse on the side away from its neighbour.
std::pair<Point2, Point2> endpoints(const ChainedModel& model);

/// Curve length between the first and last centers plus the two end caps.
double total_length(const ChainedModel& model, const Point2& e1, const Point2& e2);

ShapeEstimate build_estimate(const ChainedModel& model, double width_scale = 3.0);

/// Assembles an estimate from stored parts (used when re-reading results).
ShapeEstimate assemble_estimate(BSplineCurve curve, std::vector<double> params, std::vector<Point2> centers,
                                std::vector<SymMat2> sigmas, std::vector<std::size_t> counts, double half_width,
                                double total_length, Point2 e1, Point2 e2);

/// Centerline polyline [e1, curve samples over [t_1, t_K], e2].
std::vector<Point2> centerline_polyline(const ShapeEstimate& shape);

}  // namespace dlo
