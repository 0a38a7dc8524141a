#include "dlo/pipeline.hpp"

#include <chrono>

#include <spdlog/spdlog.h>

#include "dlo/eval.hpp"

namespace dlo {

Preprocessed preprocess(const PointCloud2& points, const PipelineConfig& cfg) {
  Preprocessed p;
  p.raster = rasterize(points, cfg.resolution);
  p.dilated = dilate(p.raster, cfg.dilation_radius);
  p.skeleton = thin(p.dilated);
  p.intersections = find_intersections(p.skeleton, cfg.intersection_window);
  p.linearized = linearize_intersections(p.skeleton, p.intersections, cfg.intersection_window);
  p.skeleton_points = deproject(p.linearized);
  return p;
}

InitConfig init_config(const PipelineConfig& cfg) {
  InitConfig ic;
  ic.gamma = cfg.gamma;
  ic.segment_bound = cfg.segment_bound;
  ic.n_ctrl = cfg.n_ctrl;
  ic.degree = cfg.degree;
  ic.inner_iter = cfg.inner_iter;
  return ic;
}

FitOptions fit_options(const PipelineConfig& cfg) {
  FitOptions fo;
  fo.max_iter = cfg.max_iter;
  fo.inner_iter = cfg.inner_iter;
  return fo;
}

namespace {

FrameEstimate finish(const PointCloud2& points, const ChainedModel& start, const PipelineConfig& cfg,
                     std::size_t common) {
  const FitResult r = fit(points, start, fit_options(cfg));
  FrameEstimate out;
  out.model = r.model;
  out.shape = build_estimate(r.model, cfg.width_scale);
  out.log_likelihood = r.log_likelihood;
  out.em_iterations = r.trace.outer_iterations;
  out.common_vertices = common;
  out.start = start;
  out.assignment = r.assignment;
  out.trace = r.trace;
  return out;
}

}  // namespace

FrameEstimate estimate(const PointCloud2& points, const PipelineConfig& cfg) {
  cfg.validate();
  if (points.empty()) throw std::invalid_argument("empty point cloud");
  const Preprocessed pre = preprocess(points, cfg);
  InitConfig ic = init_config(cfg);
  const double factors[] = {1.0, 1.5, 2.0};
  for (std::size_t attempt = 0;; ++attempt) {
    ic.segment_bound = cfg.segment_bound * factors[attempt];
    try {
      const InitResult init = initialize_detailed(pre.skeleton_points, ic);
      return finish(points, init.model, cfg, init.split.common_vertices.size());
    } catch (const InitializationError& e) {
      if (attempt + 1 == std::size(factors)) throw;
      spdlog::warn("initialization failed with H={} mm ({}); retrying", ic.segment_bound, e.what());
    }
  }
}

FrameEstimate refine(const PointCloud2& points, const ChainedModel& previous, const PipelineConfig& cfg) {
  cfg.validate();
  if (points.empty()) throw std::invalid_argument("empty point cloud");
  return finish(points, previous, cfg, 0);
}

double measurement_iou(const ShapeEstimate& shape, const PointCloud2& points, double resolution) {
  std::vector<Point2> cover = estimate_extent(shape);
  cover.insert(cover.end(), points.begin(), points.end());
  const BinaryGrid geom = geometry_covering(cover, 2.0 * resolution, resolution);
  return iou(estimate_mask(shape, geom), ground_truth_mask(points, geom));
}

double TrackReport::mean_iou() const {
  if (frames.empty()) return 0.0;
  double s = 0.0;
  for (const auto& f : frames) s += f.iou;
  return s / static_cast<double>(frames.size());
}

std::size_t TrackReport::reinit_count() const {
  std::size_t n = 0;
  for (const auto& f : frames) n += f.reinitialized ? 1 : 0;
  return n;
}

std::size_t TrackReport::failures() const {
  std::size_t n = 0;
  for (const auto& f : frames) n += f.ok ? 0 : 1;
  return n;
}

TrackReport track(const std::vector<PointCloud2>& frames, const PipelineConfig& cfg) {
  cfg.validate();
  if (frames.empty()) throw std::invalid_argument("track: no frames");
  TrackReport report;
  const TrackFrame* prev = nullptr;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    TrackFrame tf;
    try {
      if (frames[i].empty()) throw std::invalid_argument("empty point cloud");
      bool reinit = prev == nullptr || !prev->ok;
      if (!reinit) {
        tf.overlap_prev = measurement_iou(prev->estimate->shape, frames[i], cfg.resolution);
        reinit = tf.overlap_prev < cfg.reinit_iou;
      }
      tf.reinitialized = reinit;
      if (!reinit) {
        try {
          tf.estimate = refine(frames[i], prev->estimate->model, cfg);
        } catch (const std::exception& e) {
          spdlog::warn("frame {}: warm start failed ({}); reinitializing", i, e.what());
          tf.reinitialized = true;
        }
      }
      if (!tf.estimate) tf.estimate = estimate(frames[i], cfg);
      tf.iou = measurement_iou(tf.estimate->shape, frames[i], cfg.resolution);
      tf.ok = true;
    } catch (const std::exception& e) {
      tf.ok = false;
      tf.estimate.reset();
      tf.error = e.what();
      spdlog::warn("frame {} failed: {}", i, e.what());
    }
    tf.ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    report.frames.push_back(std::move(tf));
    prev = &report.frames.back();
  }
  return report;
}

}  // namespace dlo
