#include "dlo/graph.hpp"

#include <algorithm>
#include <limits>
#include <queue>
#include <stdexcept>
#include <tuple>

namespace dlo {

WeightedTree::WeightedTree(PointCloud2 vertices, std::vector<TreeEdge> edges)
    : vertices_(std::move(vertices)), edges_(std::move(edges)), adjacency_(vertices_.size()) {
  for (const auto& e : edges_) {
    if (e.a >= vertices_.size() || e.b >= vertices_.size()) {
      throw std::invalid_argument("WeightedTree: edge endpoint out of range");
    }
    adjacency_[e.a].push_back({e.b, e.weight});
    adjacency_[e.b].push_back({e.a, e.weight});
  }
  for (auto& adj : adjacency_) {
    std::sort(adj.begin(), adj.end(), [](const Neighbor& l, const Neighbor& r) { return l.vertex < r.vertex; });
  }
}

double WeightedTree::total_weight() const {
  double w = 0.0;
  for (const auto& e : edges_) w += e.weight;
  return w;
}

namespace {

std::vector<std::vector<std::size_t>> knn_candidates(const PointCloud2& pts, std::size_t k) {
  const std::size_t n = pts.size();
  std::vector<std::vector<std::size_t>> adj(n);
  std::vector<std::pair<double, std::size_t>> buf;
  buf.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    buf.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) buf.emplace_back((pts[i] - pts[j]).squared_norm(), j);
    }
    const std::size_t kk = std::min(k, buf.size());
    std::nth_element(buf.begin(), buf.begin() + static_cast<std::ptrdiff_t>(kk) - (kk > 0 ? 1 : 0), buf.end());
    for (std::size_t q = 0; q < kk; ++q) {
      adj[i].push_back(buf[q].second);
      adj[buf[q].second].push_back(i);
    }
  }
  for (auto& a : adj) {
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
  }
  return adj;
}

// Prim over a sparse candidate graph; returns an empty vector if disconnected.
std::vector<TreeEdge> prim_sparse(const PointCloud2& pts, const std::vector<std::vector<std::size_t>>& adj) {
  const std::size_t n = pts.size();
  using Entry = std::tuple<double, std::size_t, std::size_t>;  // weight, to, from
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
  std::vector<char> in_tree(n, 0);
  std::vector<TreeEdge> edges;
  edges.reserve(n - 1);
  in_tree[0] = 1;
  for (std::size_t j : adj[0]) heap.emplace(distance(pts[0], pts[j]), j, 0);
  while (!heap.empty() && edges.size() + 1 < n) {
    const auto [w, to, from] = heap.top();
    heap.pop();
    if (in_tree[to]) continue;
    in_tree[to] = 1;
    edges.push_back({std::min(from, to), std::max(from, to), w});
    for (std::size_t j : adj[to]) {
      if (!in_tree[j]) heap.emplace(distance(pts[to], pts[j]), j, to);
    }
  }
  if (edges.size() + 1 != n) return {};
  return edges;
}

// Dense O(N^2) Prim over the complete Euclidean graph.
std::vector<TreeEdge> prim_dense(const PointCloud2& pts) {
  const std::size_t n = pts.size();
  std::vector<double> best(n, std::numeric_limits<double>::infinity());
  std::vector<std::size_t> from(n, 0);
  std::vector<char> in_tree(n, 0);
  std::vector<TreeEdge> edges;
  edges.reserve(n - 1);
  std::size_t cur = 0;
  in_tree[0] = 1;
  for (std::size_t added = 1; added < n; ++added) {
    for (std::size_t j = 0; j < n; ++j) {
      if (in_tree[j]) continue;
      const double d = distance(pts[cur], pts[j]);
      if (d < best[j] || (d == best[j] && cur < from[j])) {
        best[j] = d;
        from[j] = cur;
      }
    }
    std::size_t next = n;
    for (std::size_t j = 0; j < n; ++j) {
      if (!in_tree[j] && (next == n || best[j] < best[next])) next = j;
    }
    in_tree[next] = 1;
    edges.push_back({std::min(from[next], next), std::max(from[next], next), best[next]});
    cur = next;
  }
  return edges;
}

}  // namespace

WeightedTree emst(const PointCloud2& points, std::size_t k_neighbors) {
  if (points.size() < 2) throw std::invalid_argument("emst: need at least 2 points");
  std::vector<TreeEdge> edges;
  if (points.size() > k_neighbors + 1) {
    edges = prim_sparse(points, knn_candidates(points, k_neighbors));
  }
  if (edges.empty()) edges = prim_dense(points);
  return WeightedTree(points, std::move(edges));
}

FarthestResult bfs_farthest(const WeightedTree& tree, std::size_t start) {
  const std::size_t n = tree.size();
  if (start >= n) throw std::out_of_range("bfs_farthest: start vertex out of range");
  FarthestResult r;
  r.predecessor.assign(n, n);
  r.dist.assign(n, 0.0);
  std::vector<char> seen(n, 0);
  std::queue<std::size_t> queue;
  queue.push(start);
  seen[start] = 1;
  r.predecessor[start] = start;
  while (!queue.empty()) {
    const std::size_t v = queue.front();
    queue.pop();
    for (const auto& nb : tree.neighbors(v)) {
      if (seen[nb.vertex]) continue;
      seen[nb.vertex] = 1;
      r.predecessor[nb.vertex] = v;
      r.dist[nb.vertex] = r.dist[v] + nb.weight;
      queue.push(nb.vertex);
    }
  }
  r.vertex = start;
  r.distance = 0.0;
  for (std::size_t v = 0; v < n; ++v) {
    if (seen[v] && r.dist[v] > r.distance) {
      r.distance = r.dist[v];
      r.vertex = v;
    }
  }
  return r;
}

TreePath longest_path(const WeightedTree& tree) {
  TreePath path;
  if (tree.size() == 0) return path;
  const auto first = bfs_farthest(tree, 0);
  const auto second = bfs_farthest(tree, first.vertex);
  for (std::size_t v = second.vertex;; v = second.predecessor[v]) {
    path.vertices.push_back(v);
    if (v == first.vertex) break;
  }
  path.weight = second.distance;
  return path;
}

}  // namespace dlo
