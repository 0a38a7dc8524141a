#pragma once

#include <cstddef>
#include <vector>

#include "dlo/geometry.hpp"

namespace dlo {

struct TreeEdge {
  std::size_t a = 0;
  std::size_t b = 0;
  double weight = 0.0;
};

/// Edge-weighted spanning tree over a planar point set; weights are Euclidean distances.
class WeightedTree {
 public:
  WeightedTree() = default;
  WeightedTree(PointCloud2 vertices, std::vector<TreeEdge> edges);

  const PointCloud2& vertices() const { return vertices_; }
  const std::vector<TreeEdge>& edges() const { return edges_; }
  std::size_t size() const { return vertices_.size(); }

  struct Neighbor {
    std::size_t vertex;
    double weight;
  };
  const std::vector<Neighbor>& neighbors(std::size_t v) const { return adjacency_[v]; }
  std::size_t degree(std::size_t v) const { return adjacency_[v].size(); }
  double total_weight() const;

 private:
  PointCloud2 vertices_;
  std::vector<TreeEdge> edges_;
  std::vector<std::vector<Neighbor>> adjacency_;
};

struct TreePath {
  std::vector<std::size_t> vertices;
  double weight = 0.0;
};

/// Euclidean minimum spanning tree by Prim's algorithm with a binary heap.
/// Candidate edges are the k nearest neighbours of every point; if that graph
/// is disconnected the complete edge set is used instead.
WeightedTree emst(const PointCloud2& points, std::size_t k_neighbors = 12);

struct FarthestResult {
  std::size_t vertex = 0;
  double distance = 0.0;
  /// predecessor[v] on the tree path from start; predecessor[start] == start.
  std::vector<std::size_t> predecessor;
  std::vector<double> dist;
};

/// Traverses the tree from start accumulating edge weights and returns the
/// vertex of maximum cumulative weight (lowest index on ties).
FarthestResult bfs_farthest(const WeightedTree& tree, std::size_t start);

/// Weighted diameter path by two farthest-vertex sweeps, the first from vertex 0.
TreePath longest_path(const WeightedTree& tree);

}  // namespace dlo
