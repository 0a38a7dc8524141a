#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dlo/geometry.hpp"
#include "dlo/graph.hpp"
#include "dlo/rmm_em.hpp"

namespace dlo {

class InitializationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct InitConfig {
  double gamma = 20.0;          // mm; branch depth that separates a cluster
  double segment_bound = 30.0;  // mm; H, upper bound on segment diameter
  int n_ctrl = 13;
  int degree = 2;
  int inner_iter = 5;  // fixed-assignment alternations when fitting the initial chain

  void validate() const;
};

struct SplitResult {
  /// clusters[0] is the longest path plus every branch too shallow to separate.
  std::vector<PointCloud2> clusters;
  PointCloud2 common_vertices;
  TreePath path;
};

/// Largest distance from a branch point to its nearest path vertex.
double branch_distance(std::span<const Point2> branch, std::span<const Point2> path_vertices);

SplitResult split(const PointCloud2& points, const InitConfig& cfg);

struct Segment {
  PointCloud2 members;
  Point2 center;
  std::size_t cluster = 0;
};

/// Greedy segmentation along the cluster's own longest path. A new segment
/// starts whenever adding the next point would bring the diameter to H or
/// more. The walk is cut at the path vertex nearest each common vertex lying
/// within gamma of the cluster, and every piece is grown away from that cut.
std::vector<Segment> segment_cluster(const PointCloud2& cluster, double H, const PointCloud2& common_vertices = {},
                                     double gamma = 0.0, std::size_t cluster_id = 0);

/// Diameter of a point set by brute force.
double diameter(std::span<const Point2> points);

enum class ChainNodeKind { SegmentCenter, CommonVertex };

struct CenterChain {
  std::vector<Point2> points;
  std::vector<ChainNodeKind> kinds;
  /// Index into the flattened segment list for segment centers; npos for common vertices.
  std::vector<std::size_t> source;
  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

  std::size_t size() const { return points.size(); }
  std::size_t common_vertex_count() const;
};

/// Indices (i, j), i < j, of the two candidates whose unit directions toward
/// vc nearly cancel. Lowest indices win ties.
std::pair<std::size_t, std::size_t> pair_through(const Point2& vc, std::span<const Point2> candidates);

/// Orders segment centers into one open chain, routing strands straight
/// through each common vertex. Throws InitializationError on a cycle or fork.
CenterChain merge(const std::vector<std::vector<Segment>>& segments, const PointCloud2& common_vertices,
                  const InitConfig& cfg);

/// Moves each interior segment center to the mean of the tangent-line extremes
/// of its own ellipse and the facing extremes of its neighbours, then drops
/// segment centers closer than H to a common vertex. model.components must
/// align with chain.points.
CenterChain adjust_overlaps(const CenterChain& chain, const ChainedModel& model, double H);

struct InitResult {
  ChainedModel model;
  SplitResult split;
  std::vector<std::vector<Segment>> segments;
  CenterChain chain;
  CenterChain adjusted;
};

/// split -> segment -> merge -> initial fit -> overlap adjustment -> refit.
/// The returned model carries isotropic (H/4)^2 covariances and empty statistics.
InitResult initialize_detailed(const PointCloud2& skeleton, const InitConfig& cfg);
ChainedModel initialize(const PointCloud2& skeleton, const InitConfig& cfg);

}  // namespace dlo
