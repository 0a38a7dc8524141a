#include <algorithm>
#include <set>

#include "doctest.h"
#include "dlo/preprocess.hpp"
#include "test_util.hpp"

using namespace dlo;
using testutil::Rng;

namespace {

BinaryGrid empty_grid(int w, int h) { return BinaryGrid(w, h, 1.0, {0, 0}); }

void stroke(BinaryGrid& g, PixelCoord a, PixelCoord b) {
  for (const auto& p : bresenham(a, b)) g.set(p);
}

// Textbook two-subiteration Zhang-Suen with parallel deletion.
BinaryGrid reference_zhang_suen(BinaryGrid g) {
  auto px = [&](int c, int r) { return g.at(c, r) ? 1 : 0; };
  bool changed = true;
  while (changed) {
    changed = false;
    for (int pass = 0; pass < 2; ++pass) {
      std::vector<PixelCoord> del;
      for (const auto& p : g.occupied()) {
        const int c = p.col, r = p.row;
        // P2..P9 clockwise from north; north is row+1 here but the rule is symmetric in orientation
        const int n[8] = {px(c, r + 1), px(c + 1, r + 1), px(c + 1, r), px(c + 1, r - 1),
                          px(c, r - 1), px(c - 1, r - 1), px(c - 1, r), px(c - 1, r + 1)};
        int b = 0, a = 0;
        for (int i = 0; i < 8; ++i) {
          b += n[i];
          a += (n[i] == 0 && n[(i + 1) % 8] == 1) ? 1 : 0;
        }
        if (b < 2 || b > 6 || a != 1) continue;
        const bool ok = pass == 0 ? (n[0] * n[2] * n[4] == 0 && n[2] * n[4] * n[6] == 0)
                                  : (n[0] * n[2] * n[6] == 0 && n[0] * n[4] * n[6] == 0);
        if (ok) del.push_back(p);
      }
      for (const auto& p : del) g.set(p, false);
      changed = changed || !del.empty();
    }
  }
  return g;
}

BinaryGrid random_blob(Rng& rng) {
  BinaryGrid g = empty_grid(40, 40);
  const int discs = testutil::uniform_int(rng, 1, 6);
  for (int d = 0; d < discs; ++d) {
    const int cx = testutil::uniform_int(rng, 5, 34), cy = testutil::uniform_int(rng, 5, 34);
    const int rad = testutil::uniform_int(rng, 1, 5);
    for (int r = cy - rad; r <= cy + rad; ++r)
      for (int c = cx - rad; c <= cx + rad; ++c)
        if ((c - cx) * (c - cx) + (r - cy) * (r - cy) <= rad * rad) g.set(c, r);
  }
  // thick strokes join some discs
  const int strokes = testutil::uniform_int(rng, 0, 3);
  for (int s = 0; s < strokes; ++s) {
    const PixelCoord a{testutil::uniform_int(rng, 2, 37), testutil::uniform_int(rng, 2, 37)};
    const PixelCoord b{testutil::uniform_int(rng, 2, 37), testutil::uniform_int(rng, 2, 37)};
    for (const auto& p : bresenham(a, b)) {
      g.set(p);
      g.set(p.col + 1, p.row);
      g.set(p.col, p.row + 1);
    }
  }
  return g;
}

}  // namespace

TEST_CASE("grid coordinates") {
  const BinaryGrid g(4, 3, 2.0, {10, 20});
  CHECK(g.pixel_center({0, 0}) == Point2{11, 21});
  CHECK(g.pixel_of({11.9, 21.9}) == PixelCoord{0, 0});
  CHECK(g.pixel_of({12.0, 22.0}) == PixelCoord{1, 1});
  CHECK(g.pixel_of({9.0, 20.0}) == PixelCoord{-1, 0});
  CHECK_FALSE(g.at(-1, 0));
}

TEST_CASE("rasterize examples") {
  const auto one = rasterize({{3.3, 4.4}}, 2.0);
  CHECK(one.count() == 1);
  const auto two = rasterize({{0, 0}, {10, 0}}, 2.0);
  const auto occ = two.occupied();
  REQUIRE(occ.size() == 2);
  CHECK(occ[1].col - occ[0].col == 5);
  CHECK(occ[1].row == occ[0].row);
  CHECK_THROWS(rasterize({}, 1.0));

  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const auto g = rasterize(testutil::random_cloud(rng, 200), 2.0);
    CHECK(rasterize_into(deproject(g), g) == g);
  }
}

TEST_CASE("dilate and erode") {
  BinaryGrid g = empty_grid(7, 7);
  g.set(3, 3);
  const auto d = dilate(g, 1);
  CHECK(d.count() == 9);
  for (int r = 2; r <= 4; ++r)
    for (int c = 2; c <= 4; ++c) CHECK(d.at(c, r));
  CHECK(dilate(empty_grid(5, 5), 2).count() == 0);
  CHECK(erode(d, 1).count() == 1);

  Rng rng(6);
  for (int trial = 0; trial < 30; ++trial) {
    const auto b = random_blob(rng);
    const auto bd = dilate(b, testutil::uniform_int(rng, 1, 3));
    for (const auto& p : b.occupied()) CHECK(bd.at(p));
    const auto be = erode(b, 1);
    for (const auto& p : be.occupied()) CHECK(b.at(p));
  }
}

TEST_CASE("thinning a filled strip leaves its middle row") {
  BinaryGrid g = empty_grid(24, 7);
  for (int r = 2; r <= 4; ++r)
    for (int c = 2; c < 22; ++c) g.set(c, r);
  const auto t = thin(g);
  const auto ref = reference_zhang_suen(g);
  CHECK(t == ref);
  std::set<int> rows;
  for (const auto& p : t.occupied()) rows.insert(p.row);
  CHECK(rows == std::set<int>{3});
  CHECK(t.count() >= 16);
  CHECK(count_components(t) == 1);
}

TEST_CASE("thinning keeps thin lines") {
  BinaryGrid g = empty_grid(20, 20);
  stroke(g, {2, 2}, {17, 17});
  CHECK(thin(g) == g);
  BinaryGrid h = empty_grid(20, 20);
  stroke(h, {2, 5}, {17, 5});
  CHECK(thin(h) == h);
}

TEST_CASE("thinning preserves components and leaves no full 3x3 block") {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const auto b = random_blob(rng);
    const auto t = thin(b);
    CHECK(count_components(t) == count_components(b));
    for (const auto& p : t.occupied()) {
      CHECK(b.at(p));
      bool full = true;
      for (int dr = -1; dr <= 1 && full; ++dr)
        for (int dc = -1; dc <= 1 && full; ++dc) full = t.at(p.col + dc, p.row + dr);
      CHECK_FALSE(full);
    }
  }
}

TEST_CASE("find_intersections") {
  BinaryGrid plus = empty_grid(21, 21);
  stroke(plus, {0, 10}, {20, 10});
  stroke(plus, {10, 0}, {10, 20});
  CHECK(find_intersections(plus) == std::vector<PixelCoord>{{10, 10}});

  BinaryGrid line = empty_grid(21, 21);
  stroke(line, {0, 3}, {20, 15});
  CHECK(find_intersections(line).empty());

  // diagonals that cross between pixels: a 2x2 junction
  BinaryGrid x = empty_grid(22, 22);
  stroke(x, {0, 0}, {21, 21});
  stroke(x, {21, 0}, {0, 21});
  const auto inter = find_intersections(x);
  REQUIRE(inter.size() == 1);
  CHECK(inter[0].col >= 10);
  CHECK(inter[0].col <= 11);
  CHECK(inter[0].row >= 10);
  CHECK(inter[0].row <= 11);
}

TEST_CASE("linearize_intersections") {
  SUBCASE("no intersections is the identity") {
    BinaryGrid g = empty_grid(10, 10);
    stroke(g, {0, 0}, {9, 4});
    CHECK(linearize_intersections(g, {}, 3) == g);
  }
  SUBCASE("X becomes two straight strokes") {
    BinaryGrid x = empty_grid(31, 31);
    stroke(x, {0, 0}, {30, 30});
    stroke(x, {30, 0}, {0, 30});
    // bend the strands inside the window so the result differs from the input
    x.set(14, 15);
    x.set(16, 15);
    const auto inter = find_intersections(x);
    REQUIRE(inter.size() == 1);
    const auto lin = linearize_intersections(x, inter, 5);
    BinaryGrid expect = empty_grid(31, 31);
    stroke(expect, {0, 0}, {30, 30});
    stroke(expect, {30, 0}, {0, 30});
    CHECK(lin == expect);
  }
  SUBCASE("T joins the straight pair and hangs the stem on the junction") {
    BinaryGrid t = empty_grid(31, 31);
    stroke(t, {0, 15}, {30, 15});
    stroke(t, {15, 15}, {15, 30});
    t.set(13, 16);  // kinks next to the junction
    t.set(17, 16);
    const auto inter = find_intersections(t);
    REQUIRE(inter == std::vector<PixelCoord>{{15, 15}});
    const auto lin = linearize_intersections(t, inter, 5);
    BinaryGrid expect = empty_grid(31, 31);
    stroke(expect, {0, 15}, {30, 15});
    stroke(expect, {15, 15}, {15, 30});
    CHECK(lin == expect);
  }
  SUBCASE("pixels outside the windows never change") {
    Rng rng(8);
    for (int trial = 0; trial < 30; ++trial) {
      const auto sk = thin(random_blob(rng));
      const auto inter = find_intersections(sk);
      const int w = testutil::uniform_int(rng, 2, 5);
      const auto lin = linearize_intersections(sk, inter, w);
      for (int r = 0; r < sk.height(); ++r)
        for (int c = 0; c < sk.width(); ++c) {
          bool inside = false;
          for (const auto& i : inter) inside = inside || (std::abs(c - i.col) <= w && std::abs(r - i.row) <= w);
          if (!inside) CHECK(lin.at(c, r) == sk.at(c, r));
        }
    }
  }
}

TEST_CASE("deproject") {
  BinaryGrid g(5, 5, 2.0, {0, 0});
  g.set(0, 0);
  const auto pts = deproject(g);
  REQUIRE(pts.size() == 1);
  CHECK(pts[0] == Point2{1.0, 1.0});
  Rng rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const auto sk = thin(random_blob(rng));
    CHECK(deproject(sk).size() == sk.count());
    CHECK(rasterize_into(deproject(sk), sk) == sk);
  }
}

TEST_CASE("count_components") {
  BinaryGrid g = empty_grid(10, 10);
  g.set(0, 0);
  g.set(1, 1);
  g.set(5, 5);
  CHECK(count_components(g) == 2);
  CHECK(count_components(empty_grid(3, 3)) == 0);
}
