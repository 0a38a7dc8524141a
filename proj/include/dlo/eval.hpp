#pragma once

#include <span>
#include <vector>

#include "dlo/geometry.hpp"
#include "dlo/preprocess.hpp"
#include "dlo/shape.hpp"
#include "dlo/synth.hpp"

namespace dlo {

/// One pixel per measurement, then a closing with radius 1 (dilate, erode).
BinaryGrid ground_truth_mask(const PointCloud2& points, double resolution);
BinaryGrid ground_truth_mask(const PointCloud2& points, const BinaryGrid& geometry);

/// Pixels whose centers lie within half_width of the polyline, with flat caps
/// at both ends.
BinaryGrid band_mask(std::span<const Point2> polyline, double half_width, const BinaryGrid& geometry);

/// Pixels whose centers are inside an ellipse.
void paint_ellipse(BinaryGrid& grid, const Ellipse& e);

/// Union of the component ellipses and the capped offset band.
BinaryGrid estimate_mask(const ShapeEstimate& shape, const BinaryGrid& geometry);

/// |a and b| / |a or b|, 0 when both are empty. Throws on mismatched geometry.
double iou(const BinaryGrid& a, const BinaryGrid& b);

/// Empty grid covering every given point plus margin_mm on all sides.
BinaryGrid geometry_covering(std::span<const Point2> points, double margin_mm, double resolution);

/// Points worth covering when rasterizing an estimate: centerline and ellipse boxes.
std::vector<Point2> estimate_extent(const ShapeEstimate& shape);

/// IoU of the estimate against the generator's band (flat-capped, truth width)
/// on a grid of the given resolution covering both.
double truth_iou(const ShapeEstimate& shape, const GroundTruth& truth, double resolution);

}  // namespace dlo
