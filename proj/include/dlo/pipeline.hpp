#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dlo/config.hpp"
#include "dlo/preprocess.hpp"
#include "dlo/rmm_em.hpp"
#include "dlo/shape.hpp"
#include "dlo/split_merge.hpp"

namespace dlo {

struct Preprocessed {
  BinaryGrid raster;
  BinaryGrid dilated;
  BinaryGrid skeleton;
  std::vector<PixelCoord> intersections;
  BinaryGrid linearized;
  PointCloud2 skeleton_points;
};

/// rasterize -> dilate -> thin -> linearize junctions -> deproject.
Preprocessed preprocess(const PointCloud2& points, const PipelineConfig& cfg);

InitConfig init_config(const PipelineConfig& cfg);
FitOptions fit_options(const PipelineConfig& cfg);

struct FrameEstimate {
  ChainedModel model;
  ShapeEstimate shape;
  double log_likelihood = 0.0;
  int em_iterations = 0;
  std::size_t common_vertices = 0;
  ChainedModel start;  // model handed to EM
  Assignment assignment;
  FitTrace trace;
};

/// Full pipeline from scratch. Initialization is retried with H scaled by 1.5
/// and 2 before an InitializationError escapes.
FrameEstimate estimate(const PointCloud2& points, const PipelineConfig& cfg);
/// EM warm-started from a previous model.
FrameEstimate refine(const PointCloud2& points, const ChainedModel& previous, const PipelineConfig& cfg);

struct TrackFrame {
  bool ok = false;
  bool reinitialized = false;
  double iou = 0.0;          // estimate vs measurement mask
  double overlap_prev = 0.0; // previous estimate vs current measurement mask
  double ms = 0.0;
  std::optional<FrameEstimate> estimate;
  std::string error;
};

struct TrackReport {
  std::vector<TrackFrame> frames;

  double mean_iou() const;
  std::size_t reinit_count() const;
  std::size_t failures() const;
};

/// IoU of an estimate against the closed measurement mask at cfg.resolution.
double measurement_iou(const ShapeEstimate& shape, const PointCloud2& points, double resolution);

/// Sequential tracking. The first frame, frames after a failure, and frames
/// whose measurement mask overlaps the previous estimate by less than
/// cfg.reinit_iou are initialized from scratch; all others start EM from the
/// previous model.
TrackReport track(const std::vector<PointCloud2>& frames, const PipelineConfig& cfg);

}  // namespace dlo
