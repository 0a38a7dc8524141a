#include <algorithm>
#include <functional>
#include <numeric>

#include "doctest.h"
#include "dlo/graph.hpp"
#include "test_util.hpp"

using namespace dlo;
using testutil::Rng;

namespace {

// Kruskal over the complete graph with a plain union-find.
double kruskal_weight(const PointCloud2& pts) {
  struct E {
    double w;
    std::size_t a, b;
  };
  std::vector<E> edges;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) edges.push_back({distance(pts[i], pts[j]), i, j});
  std::sort(edges.begin(), edges.end(), [](const E& x, const E& y) { return x.w < y.w; });
  std::vector<std::size_t> parent(pts.size());
  std::iota(parent.begin(), parent.end(), 0);
  std::function<std::size_t(std::size_t)> find = [&](std::size_t v) { return parent[v] == v ? v : parent[v] = find(parent[v]); };
  double total = 0.0;
  for (const auto& e : edges) {
    const auto ra = find(e.a), rb = find(e.b);
    if (ra == rb) continue;
    parent[ra] = rb;
    total += e.w;
  }
  return total;
}

// Tree from a Pruefer sequence over n labels.
std::vector<std::pair<std::size_t, std::size_t>> pruefer_tree(const std::vector<std::size_t>& seq, std::size_t n) {
  std::vector<std::size_t> deg(n, 1);
  for (auto s : seq) ++deg[s];
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (auto s : seq) {
    for (std::size_t v = 0; v < n; ++v) {
      if (deg[v] == 1) {
        edges.push_back({v, s});
        --deg[v];
        --deg[s];
        break;
      }
    }
  }
  std::vector<std::size_t> rest;
  for (std::size_t v = 0; v < n; ++v)
    if (deg[v] == 1) rest.push_back(v);
  edges.push_back({rest[0], rest[1]});
  return edges;
}

WeightedTree random_tree(Rng& rng, std::size_t n) {
  const auto pts = testutil::random_cloud(rng, n);
  std::vector<std::size_t> seq;
  for (std::size_t i = 0; i + 2 < n; ++i) seq.push_back(static_cast<std::size_t>(testutil::uniform_int(rng, 0, static_cast<int>(n) - 1)));
  std::vector<TreeEdge> edges;
  if (n == 2) {
    edges.push_back({0, 1, distance(pts[0], pts[1])});
  } else {
    for (auto [a, b] : pruefer_tree(seq, n)) edges.push_back({a, b, distance(pts[a], pts[b])});
  }
  return WeightedTree(pts, edges);
}

// All-pairs path weights by depth-first search from every vertex.
double exhaustive_diameter(const WeightedTree& t) {
  double best = 0.0;
  for (std::size_t s = 0; s < t.size(); ++s) {
    std::vector<double> d(t.size(), -1.0);
    std::vector<std::size_t> stack{s};
    d[s] = 0.0;
    while (!stack.empty()) {
      const auto v = stack.back();
      stack.pop_back();
      for (const auto& nb : t.neighbors(v)) {
        if (d[nb.vertex] >= 0.0) continue;
        d[nb.vertex] = d[v] + nb.weight;
        stack.push_back(nb.vertex);
      }
    }
    best = std::max(best, *std::max_element(d.begin(), d.end()));
  }
  return best;
}

}  // namespace

TEST_CASE("emst examples") {
  const auto two = emst({{0, 0}, {3, 4}});
  REQUIRE(two.edges().size() == 1);
  CHECK(two.total_weight() == doctest::Approx(5.0));

  const auto chain = emst({{0, 0}, {1, 0}, {2, 0}});
  REQUIRE(chain.edges().size() == 2);
  CHECK(chain.degree(0) == 1);
  CHECK(chain.degree(1) == 2);
  CHECK(chain.degree(2) == 1);
}

TEST_CASE("emst weight equals the Kruskal oracle") {
  Rng rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    const auto pts = testutil::random_cloud(rng, 8);
    const auto tree = emst(pts);
    CHECK(tree.edges().size() == 7);
    CHECK(tree.total_weight() == doctest::Approx(kruskal_weight(pts)).epsilon(1e-12));
  }
  // larger clouds exercise the nearest-neighbour candidate graph
  for (int trial = 0; trial < 10; ++trial) {
    auto pts = testutil::random_cloud(rng, 300);
    // two distant groups force the connectivity fallback
    for (std::size_t i = 0; i < 150; ++i) pts[i] += Point2{5000, 0};
    const auto tree = emst(pts);
    CHECK(tree.total_weight() == doctest::Approx(kruskal_weight(pts)).epsilon(1e-12));
  }
}

TEST_CASE("emst is never heavier than a random spanning tree") {
  Rng rng(2);
  for (int set = 0; set < 10; ++set) {
    const auto pts = testutil::random_cloud(rng, 10);
    const double w = emst(pts).total_weight();
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<std::size_t> seq;
      for (int i = 0; i < 8; ++i) seq.push_back(static_cast<std::size_t>(testutil::uniform_int(rng, 0, 9)));
      double other = 0.0;
      for (auto [a, b] : pruefer_tree(seq, 10)) other += distance(pts[a], pts[b]);
      CHECK(w <= other + 1e-9);
    }
  }
}

TEST_CASE("longest_path examples") {
  const WeightedTree chain({{0, 0}, {1, 0}, {3, 0}}, {{0, 1, 1.0}, {1, 2, 2.0}});
  const auto p = longest_path(chain);
  CHECK(p.weight == doctest::Approx(3.0));
  CHECK(p.vertices.size() == 3);

  const WeightedTree star({{0, 0}, {1, 0}, {0, 1}, {-1, 0}}, {{0, 1, 1.0}, {0, 2, 1.0}, {0, 3, 1.0}});
  const auto s = longest_path(star);
  CHECK(s.weight == doctest::Approx(2.0));
  REQUIRE(s.vertices.size() == 3);
  CHECK(s.vertices[1] == 0);
}

TEST_CASE("bfs_farthest examples") {
  const WeightedTree chain({{0, 0}, {1, 0}, {2, 0}}, {{0, 1, 1.0}, {1, 2, 1.0}});
  const auto f = bfs_farthest(chain, 0);
  CHECK(f.vertex == 2);
  CHECK(f.distance == doctest::Approx(2.0));
  CHECK(f.predecessor[0] == 0);
  CHECK(f.predecessor[2] == 1);
  const auto mid = bfs_farthest(chain, 1);
  CHECK(mid.vertex == 0);
  CHECK(mid.distance == doctest::Approx(1.0));
}

TEST_CASE("bfs_farthest matches unique-path distances") {
  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const auto t = random_tree(rng, static_cast<std::size_t>(testutil::uniform_int(rng, 2, 20)));
    const std::size_t s = static_cast<std::size_t>(testutil::uniform_int(rng, 0, static_cast<int>(t.size()) - 1));
    const auto f = bfs_farthest(t, s);
    // walk predecessor chains back to the start and sum edge weights
    for (std::size_t v = 0; v < t.size(); ++v) {
      double sum = 0.0;
      std::size_t cur = v;
      std::size_t guard = 0;
      while (cur != s && guard++ < t.size()) {
        const auto pr = f.predecessor[cur];
        for (const auto& nb : t.neighbors(cur))
          if (nb.vertex == pr) sum += nb.weight;
        cur = pr;
      }
      CHECK(cur == s);
      CHECK(f.dist[v] == doctest::Approx(sum).epsilon(1e-12));
      CHECK(f.dist[v] <= f.distance + 1e-12);
    }
  }
}

TEST_CASE("double sweep diameter equals the exhaustive diameter") {
  Rng rng(4);
  for (int trial = 0; trial < 300; ++trial) {
    const auto n = static_cast<std::size_t>(testutil::uniform_int(rng, 2, 12));
    const auto t = random_tree(rng, n);
    const auto p = longest_path(t);
    CHECK(p.weight == doctest::Approx(exhaustive_diameter(t)).epsilon(1e-12));
    CHECK(t.degree(p.vertices.front()) == 1);
    CHECK(t.degree(p.vertices.back()) == 1);
  }
}
