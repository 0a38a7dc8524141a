#include "dlo/split_merge.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <set>

#include <spdlog/spdlog.h>

namespace dlo {

void InitConfig::validate() const {
  if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
  if (!(segment_bound > 0.0)) throw std::invalid_argument("segment_bound must be positive");
  if (degree < 1) throw std::invalid_argument("degree must be >= 1");
  if (n_ctrl < degree + 1) throw std::invalid_argument("n_ctrl must be >= degree + 1");
  if (inner_iter < 1) throw std::invalid_argument("inner_iter must be >= 1");
}

std::size_t CenterChain::common_vertex_count() const {
  return static_cast<std::size_t>(std::count(kinds.begin(), kinds.end(), ChainNodeKind::CommonVertex));
}

double branch_distance(std::span<const Point2> branch, std::span<const Point2> path_vertices) {
  double sup = 0.0;
  for (const auto& z : branch) {
    double inf = std::numeric_limits<double>::infinity();
    for (const auto& v : path_vertices) inf = std::min(inf, distance(z, v));
    sup = std::max(sup, inf);
  }
  return sup;
}

double diameter(std::span<const Point2> points) {
  double d = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) d = std::max(d, distance(points[i], points[j]));
  }
  return d;
}

namespace {

constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

struct PathDecomposition {
  TreePath path;
  std::vector<std::size_t> position;  // path position of each vertex, kNone if off path
  /// hanging[p] = off-path vertices whose nearest path vertex along the tree is path[p], in BFS order.
  std::vector<std::vector<std::size_t>> hanging;
};

PathDecomposition decompose(const WeightedTree& tree) {
  PathDecomposition d;
  d.path = longest_path(tree);
  d.position.assign(tree.size(), kNone);
  for (std::size_t p = 0; p < d.path.vertices.size(); ++p) d.position[d.path.vertices[p]] = p;
  d.hanging.resize(d.path.vertices.size());
  std::vector<char> seen(tree.size(), 0);
  for (std::size_t v : d.path.vertices) seen[v] = 1;
  for (std::size_t p = 0; p < d.path.vertices.size(); ++p) {
    std::queue<std::size_t> q;
    q.push(d.path.vertices[p]);
    while (!q.empty()) {
      const std::size_t v = q.front();
      q.pop();
      for (const auto& nb : tree.neighbors(v)) {
        if (seen[nb.vertex]) continue;
        seen[nb.vertex] = 1;
        d.hanging[p].push_back(nb.vertex);
        q.push(nb.vertex);
      }
    }
  }
  return d;
}

std::vector<std::size_t> union_find_groups(const PointCloud2& pts, double radius) {
  std::vector<std::size_t> parent(pts.size());
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  const auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      if (distance(pts[i], pts[j]) < radius) {
        const std::size_t a = find(i), b = find(j);
        parent[std::max(a, b)] = std::min(a, b);
      }
    }
  }
  std::vector<std::size_t> group(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) group[i] = find(i);
  return group;
}

}  // namespace

SplitResult split(const PointCloud2& points, const InitConfig& cfg) {
  if (points.size() < 2) throw InitializationError("split: need at least 2 skeleton points");
  const WeightedTree tree = emst(points);
  const PathDecomposition d = decompose(tree);
  PointCloud2 path_pts;
  for (std::size_t v : d.path.vertices) path_pts.push_back(points[v]);

  SplitResult out;
  out.path = d.path;
  PointCloud2 base = path_pts;
  PointCloud2 roots;
  std::vector<PointCloud2> separated;
  for (std::size_t p = 0; p < d.hanging.size(); ++p) {
    if (d.hanging[p].empty()) continue;
    PointCloud2 branch;
    for (std::size_t v : d.hanging[p]) branch.push_back(points[v]);
    const double dh = branch_distance(branch, path_pts);
    if (dh > cfg.gamma) {
      roots.push_back(points[d.path.vertices[p]]);
      separated.push_back(std::move(branch));
    } else {
      base.insert(base.end(), branch.begin(), branch.end());
    }
  }
  out.clusters.push_back(std::move(base));
  // Roots closer than gamma describe one junction: average them and pool their branches.
  const auto group = union_find_groups(roots, cfg.gamma);
  for (std::size_t g = 0; g < roots.size(); ++g) {
    if (group[g] != g) continue;
    Point2 sum;
    std::size_t n = 0;
    PointCloud2 cluster;
    for (std::size_t i = 0; i < roots.size(); ++i) {
      if (group[i] != g) continue;
      sum += roots[i];
      ++n;
      cluster.insert(cluster.end(), separated[i].begin(), separated[i].end());
    }
    out.common_vertices.push_back(sum / static_cast<double>(n));
    out.clusters.push_back(std::move(cluster));
  }
  return out;
}

namespace {

std::vector<Segment> grow_segments(const PointCloud2& pts, const std::vector<std::size_t>& walk, double H,
                                   std::size_t cluster_id) {
  std::vector<Segment> segs;
  PointCloud2 cur;
  double cur_diam = 0.0;
  const auto flush = [&] {
    if (cur.empty()) return;
    Segment s;
    s.members = std::move(cur);
    s.center = centroid(s.members);
    s.cluster = cluster_id;
    segs.push_back(std::move(s));
    cur.clear();
    cur_diam = 0.0;
  };
  for (std::size_t v : walk) {
    double grown = cur_diam;
    for (const auto& m : cur) grown = std::max(grown, distance(m, pts[v]));
    if (!cur.empty() && grown >= H) {
      flush();
      grown = 0.0;
    }
    cur.push_back(pts[v]);
    cur_diam = grown;
  }
  flush();
  return segs;
}

}  // namespace

std::vector<Segment> segment_cluster(const PointCloud2& cluster, double H, const PointCloud2& common_vertices,
                                     double gamma, std::size_t cluster_id) {
  if (cluster.empty()) throw std::invalid_argument("segment_cluster: empty cluster");
  if (!(H > 0.0)) throw std::invalid_argument("segment_cluster: H must be positive");
  if (cluster.size() == 1) return {Segment{cluster, cluster[0], cluster_id}};

  const WeightedTree tree = emst(cluster);
  const PathDecomposition d = decompose(tree);
  const std::size_t plen = d.path.vertices.size();

  // Cut after the path vertex nearest each close common vertex.
  std::set<std::size_t> cuts;
  for (const auto& vc : common_vertices) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < plen; ++p) {
      const double dd = distance(cluster[d.path.vertices[p]], vc);
      if (dd < best_d) {
        best_d = dd;
        best = p;
      }
    }
    if (best_d < gamma) cuts.insert(best);
  }

  std::vector<std::pair<std::size_t, std::size_t>> pieces;  // [begin, end)
  std::size_t begin = 0;
  for (std::size_t c : cuts) {
    pieces.emplace_back(begin, c + 1);
    begin = c + 1;
  }
  if (begin < plen) pieces.emplace_back(begin, plen);

  std::vector<Segment> out;
  for (const auto& [b, e] : pieces) {
    if (b >= e) continue;
    const bool cut_before = b > 0;
    const bool cut_after = e < plen;
    const bool backward = cut_after && !cut_before;
    std::vector<std::size_t> walk;
    for (std::size_t k = 0; k < e - b; ++k) {
      const std::size_t p = backward ? e - 1 - k : b + k;
      walk.push_back(d.path.vertices[p]);
      walk.insert(walk.end(), d.hanging[p].begin(), d.hanging[p].end());
    }
    auto segs = grow_segments(cluster, walk, H, cluster_id);
    if (backward) std::reverse(segs.begin(), segs.end());
    for (auto& s : segs) out.push_back(std::move(s));
  }
  return out;
}

std::pair<std::size_t, std::size_t> pair_through(const Point2& vc, std::span<const Point2> candidates) {
  if (candidates.size() < 2) throw std::invalid_argument("pair_through: need at least 2 candidates");
  std::vector<Point2> dirs;
  for (const auto& c : candidates) dirs.push_back(normalized(vc - c));
  std::pair<std::size_t, std::size_t> best{0, 1};
  double best_v = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    for (std::size_t j = i + 1; j < dirs.size(); ++j) {
      const double v = (dirs[i] + dirs[j]).norm();
      if (v < best_v) {
        best_v = v;
        best = {i, j};
      }
    }
  }
  return best;
}

CenterChain merge(const std::vector<std::vector<Segment>>& segments, const PointCloud2& common_vertices,
                  const InitConfig& cfg) {
  (void)cfg;
  PointCloud2 nodes;
  std::vector<std::size_t> cluster_of;
  std::set<std::pair<std::size_t, std::size_t>> edges;
  const auto add_edge = [&](std::size_t a, std::size_t b) {
    if (a != b) edges.insert({std::min(a, b), std::max(a, b)});
  };
  for (std::size_t c = 0; c < segments.size(); ++c) {
    for (std::size_t s = 0; s < segments[c].size(); ++s) {
      nodes.push_back(segments[c][s].center);
      cluster_of.push_back(c);
      if (s > 0) add_edge(nodes.size() - 2, nodes.size() - 1);
    }
  }
  const std::size_t n_centers = nodes.size();
  for (const auto& v : common_vertices) {
    nodes.push_back(v);
    cluster_of.push_back(kNone);
  }

  for (std::size_t ci = 0; ci < common_vertices.size(); ++ci) {
    const std::size_t vnode = n_centers + ci;
    const Point2 vc = common_vertices[ci];
    std::vector<std::size_t> order(n_centers);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return distance(nodes[a], vc) < distance(nodes[b], vc); });
    order.resize(std::min<std::size_t>(4, n_centers));
    std::sort(order.begin(), order.end());
    for (std::size_t a : order) {
      for (std::size_t b : order) edges.erase({a, b});
    }
    if (order.size() == 1) {
      add_edge(order[0], vnode);
      continue;
    }
    if (order.size() < 2) continue;
    PointCloud2 cand;
    for (std::size_t q : order) cand.push_back(nodes[q]);
    const auto [i, j] = pair_through(vc, cand);
    add_edge(order[i], vnode);
    add_edge(vnode, order[j]);
    std::vector<std::size_t> rest;
    for (std::size_t q = 0; q < order.size(); ++q) {
      if (q != i && q != j) rest.push_back(order[q]);
    }
    if (rest.size() == 2) {
      add_edge(rest[0], rest[1]);
    } else if (rest.size() == 1) {
      add_edge(rest[0], vnode);
    }
  }

  const std::size_t n = nodes.size();
  if (n == 0) throw InitializationError("merge: no segment centers");
  // Join loose ends of different components, closest pair first.
  while (true) {
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    const auto find = [&](std::size_t i) {
      while (parent[i] != i) i = parent[i] = parent[parent[i]];
      return i;
    };
    std::vector<std::size_t> degree(n, 0);
    for (const auto& [a, b] : edges) {
      parent[find(a)] = find(b);
      ++degree[a];
      ++degree[b];
    }
    std::size_t roots = 0;
    for (std::size_t i = 0; i < n; ++i) roots += find(i) == i ? 1 : 0;
    if (roots == 1) break;
    std::size_t ba = kNone, bb = kNone;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < n; ++a) {
      if (degree[a] > 1) continue;
      for (std::size_t b = a + 1; b < n; ++b) {
        if (degree[b] > 1 || find(a) == find(b)) continue;
        const double dd = distance(nodes[a], nodes[b]);
        if (dd < best) {
          best = dd;
          ba = a;
          bb = b;
        }
      }
    }
    if (ba == kNone) throw InitializationError("merge: cannot join the center graph into one chain");
    add_edge(ba, bb);
  }

  std::vector<std::vector<std::size_t>> adj(n);
  for (const auto& [a, b] : edges) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  if (edges.size() + 1 != n) throw InitializationError("merge: center graph contains a cycle");
  for (std::size_t i = 0; i < n; ++i) {
    if (adj[i].size() > 2) throw InitializationError("merge: center graph forks at a node");
  }
  std::size_t start = kNone;
  for (std::size_t i = 0; i < n; ++i) {
    if (adj[i].size() > 1) continue;
    if (start == kNone || nodes[i].x < nodes[start].x ||
        (nodes[i].x == nodes[start].x && nodes[i].y < nodes[start].y)) {
      start = i;
    }
  }
  CenterChain chain;
  std::size_t prev = kNone, cur = start;
  while (cur != kNone) {
    chain.points.push_back(nodes[cur]);
    const bool is_center = cur < n_centers;
    chain.kinds.push_back(is_center ? ChainNodeKind::SegmentCenter : ChainNodeKind::CommonVertex);
    chain.source.push_back(is_center ? cur : CenterChain::npos);
    std::size_t next = kNone;
    for (std::size_t nb : adj[cur]) {
      if (nb != prev) next = nb;
    }
    prev = cur;
    cur = next;
  }
  return chain;
}

namespace {

// Intersection of the tangent line at component k with its own ellipse that
// lies furthest toward target.
Point2 facing_extreme(const ChainedModel& model, std::size_t k, const Point2& target) {
  const auto& c = model.components[k];
  const Ellipse e = ellipse_from_covariance(regularize(c.sigma), c.center);
  const auto hits = line_ellipse_intersection(e, c.center, model.curve.tangent(c.t));
  if (hits.empty()) return c.center;
  const Point2 toward = target - c.center;
  return dot(hits.front() - c.center, toward) >= dot(hits.back() - c.center, toward) ? hits.front() : hits.back();
}

}  // namespace

CenterChain adjust_overlaps(const CenterChain& chain, const ChainedModel& model, double H) {
  if (model.size() != chain.size()) throw std::invalid_argument("adjust_overlaps: model does not match chain");
  CenterChain moved = chain;
  for (std::size_t k = 1; k + 1 < chain.size(); ++k) {
    if (chain.kinds[k] != ChainNodeKind::SegmentCenter) continue;
    const Point2 prev = model.components[k - 1].center;
    const Point2 next = model.components[k + 1].center;
    const Point2 self = model.components[k].center;
    const Point2 g1 = facing_extreme(model, k, prev);
    const Point2 g4 = facing_extreme(model, k, next);
    const Point2 g2 = facing_extreme(model, k - 1, self);
    const Point2 g3 = facing_extreme(model, k + 1, self);
    moved.points[k] = ((g1 + g2) + (g3 + g4)) * 0.25;
  }
  CenterChain out;
  for (std::size_t k = 0; k < moved.size(); ++k) {
    bool drop = false;
    if (moved.kinds[k] == ChainNodeKind::SegmentCenter) {
      for (std::size_t j = 0; j < moved.size(); ++j) {
        if (moved.kinds[j] == ChainNodeKind::CommonVertex && distance(moved.points[k], moved.points[j]) < H) {
          drop = true;
        }
      }
    }
    if (drop) continue;
    out.points.push_back(moved.points[k]);
    out.kinds.push_back(moved.kinds[k]);
    out.source.push_back(moved.source[k]);
  }
  return out;
}

namespace {

int control_count(const InitConfig& cfg, std::size_t centers) {
  return std::max(cfg.degree + 1, std::min(cfg.n_ctrl, static_cast<int>(centers)));
}

ChainedModel chain_model(const PointCloud2& centers, int degree, int n_ctrl, double H) {
  const auto knots = make_clamped_knots(n_ctrl - 1, degree);
  ChainedModel m;
  m.curve = BSplineCurve(degree, std::vector<Point2>(static_cast<std::size_t>(n_ctrl)), knots);
  const auto t = centripetal_params(centers, m.curve.domain_end());
  m.components.resize(centers.size());
  for (std::size_t k = 0; k < centers.size(); ++k) {
    auto& c = m.components[k];
    c.t = t.params[k];
    c.sigma = SymMat2::identity((H / 4.0) * (H / 4.0));
    c.sample_mean = centers[k];
  }
  return m;
}

}  // namespace

InitResult initialize_detailed(const PointCloud2& skeleton, const InitConfig& cfg) {
  cfg.validate();
  if (skeleton.size() < 2) throw InitializationError("initialize: need at least 2 skeleton points");
  const double H = cfg.segment_bound;
  InitResult r;
  r.split = split(skeleton, cfg);
  std::vector<const Segment*> flat;
  for (std::size_t c = 0; c < r.split.clusters.size(); ++c) {
    r.segments.push_back(segment_cluster(r.split.clusters[c], H, r.split.common_vertices, cfg.gamma, c));
  }
  for (const auto& segs : r.segments) {
    for (const auto& s : segs) flat.push_back(&s);
  }
  r.chain = merge(r.segments, r.split.common_vertices, cfg);
  if (r.chain.size() < 2) throw InitializationError("initialize: fewer than 2 centers in the chain");

  // Initial fit with the segment membership held fixed.
  const int m0 = control_count(cfg, r.chain.size());
  ChainedModel model0 = chain_model(r.chain.points, cfg.degree, m0, H);
  PointCloud2 members;
  Assignment fixed;
  for (std::size_t k = 0; k < r.chain.size(); ++k) {
    if (r.chain.kinds[k] == ChainNodeKind::SegmentCenter) {
      for (const auto& p : flat[r.chain.source[k]]->members) {
        members.push_back(p);
        fixed.labels.push_back(k);
      }
    } else {
      members.push_back(r.chain.points[k]);
      fixed.labels.push_back(k);
    }
  }
  update_statistics(model0, fixed, members);
  for (int it = 0; it < cfg.inner_iter; ++it) {
    model0 = model0.with_controls(m_step_controls(model0));
    const auto sig = m_step_sigma(model0, fixed, members);
    for (std::size_t k = 0; k < model0.size(); ++k) {
      model0.components[k].sigma =
          r.chain.kinds[k] == ChainNodeKind::CommonVertex ? SymMat2::identity((H / 4.0) * (H / 4.0)) : sig[k];
    }
  }

  r.adjusted = adjust_overlaps(r.chain, model0, H);
  if (r.adjusted.size() < 2) throw InitializationError("initialize: fewer than 2 centers after adjustment");

  const int m1 = control_count(cfg, r.adjusted.size());
  ChainedModel model = chain_model(r.adjusted.points, cfg.degree, m1, H);
  for (auto& c : model.components) c.count = 1;
  model = model.with_controls(m_step_controls(model));
  for (auto& c : model.components) {
    c.count = 0;
    c.sample_mean = c.center;
    c.scatter = SymMat2{};
  }
  r.model = std::move(model);
  spdlog::debug("initialize: {} clusters, {} common vertices, {} centers ({} after adjustment)",
                r.split.clusters.size(), r.split.common_vertices.size(), r.chain.size(), r.adjusted.size());
  return r;
}

ChainedModel initialize(const PointCloud2& skeleton, const InitConfig& cfg) {
  return initialize_detailed(skeleton, cfg).model;
}

}  // namespace dlo
