#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "dlo/rmm_em.hpp"
#include "dlo/synth.hpp"
#include "test_util.hpp"

using namespace dlo;
using testutil::Rng;

namespace {

// Straight chain along x with K components spread over the curve domain.
ChainedModel straight_model(std::size_t k, double length, double sigma2, int n_ctrl = 8) {
  std::vector<Point2> ctrl;
  for (int i = 0; i < n_ctrl; ++i) ctrl.push_back({length * i / (n_ctrl - 1), 0.0});
  ChainedModel m;
  m.curve = BSplineCurve(2, ctrl);
  for (std::size_t i = 0; i < k; ++i) {
    RmmComponent c;
    c.t = m.curve.domain_end() * static_cast<double>(i) / static_cast<double>(k - 1);
    c.sigma = SymMat2::identity(sigma2);
    m.components.push_back(c);
  }
  m.refresh_centers();
  return m;
}

PointCloud2 tube(double length, std::uint64_t seed, Preset shape = Preset::Straight) {
  SyntheticSpec spec;
  spec.frames = {preset_centerline(shape, length)};
  return generate(spec, 0, seed).points;
}

double direct_term(std::size_t l, const Point2& c, const Point2& mean, const SymMat2& sigma, const SymMat2& scatter) {
  Eigen::Matrix2d s;
  s << sigma.xx, sigma.xy, sigma.xy, sigma.yy;
  Eigen::Matrix2d cs;
  cs << scatter.xx, scatter.xy, scatter.xy, scatter.yy;
  const Eigen::Vector2d d(c.x - mean.x, c.y - mean.y);
  const Eigen::Matrix2d inv = s.inverse();
  const double ld = static_cast<double>(l);
  return -0.5 * ld * d.dot(inv * d) - 0.5 * (ld + 1.0) * std::log(s.determinant()) - 0.5 * (cs * inv).trace();
}

Assignment nearest_assignment(const ChainedModel& m, const PointCloud2& pts) {
  Assignment a;
  a.counts.assign(m.size(), 0);
  for (const auto& p : pts) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < m.size(); ++k)
      if (distance(p, m.components[k].center) < distance(p, m.components[best].center)) best = k;
    a.labels.push_back(best);
    ++a.counts[best];
  }
  return a;
}

double fd_gradient_max(const ChainedModel& m, double step) {
  double worst = 0.0;
  const auto ctrl = m.curve.control_points();
  for (std::size_t i = 0; i < ctrl.size(); ++i) {
    for (int axis = 0; axis < 2; ++axis) {
      auto plus = ctrl, minus = ctrl;
      (axis == 0 ? plus[i].x : plus[i].y) += step;
      (axis == 0 ? minus[i].x : minus[i].y) -= step;
      const double g = (log_likelihood(m.with_controls(plus)) - log_likelihood(m.with_controls(minus))) / (2 * step);
      worst = std::max(worst, std::abs(g));
    }
  }
  return worst;
}

}  // namespace

TEST_CASE("sample_mean") {
  const std::vector<Point2> tri{{0, 0}, {2, 0}, {1, 3}};
  CHECK(sample_mean(tri) == Point2{1, 1});
  const std::vector<Point2> one{{4, -2}};
  CHECK(sample_mean(one) == Point2{4, -2});
  Rng rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    auto pts = testutil::random_cloud(rng, 20);
    const Point2 m = sample_mean(pts);
    const Point2 shift = testutil::random_point(rng);
    for (auto& p : pts) p += shift;
    CHECK(distance(sample_mean(pts), m + shift) < 1e-9);
  }
}

TEST_CASE("scatter_matrix") {
  const std::vector<Point2> two{{-1, 0}, {1, 0}};
  CHECK(scatter_matrix(two, sample_mean(two)) == SymMat2{2, 0, 0});
  const std::vector<Point2> same(5, Point2{3, 3});
  CHECK(scatter_matrix(same, sample_mean(same)) == SymMat2{});
  Rng rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const auto pts = testutil::random_cloud(rng, 30);
    Eigen::MatrixXd x(30, 2);
    for (int i = 0; i < 30; ++i) x.row(i) << pts[static_cast<std::size_t>(i)].x, pts[static_cast<std::size_t>(i)].y;
    const Eigen::MatrixXd centered = x.rowwise() - x.colwise().mean();
    const Eigen::Matrix2d biased = centered.transpose() * centered / 30.0;
    const SymMat2 s = scatter_matrix(pts, sample_mean(pts));
    CHECK(s.xx == doctest::Approx(30.0 * biased(0, 0)));
    CHECK(s.xy == doctest::Approx(30.0 * biased(0, 1)));
    CHECK(s.yy == doctest::Approx(30.0 * biased(1, 1)));
  }
}

TEST_CASE("log_likelihood plug-in, scaling and center displacement") {
  Rng rng(3);
  const auto pts = tube(120, 4);
  ChainedModel m = straight_model(4, 120, 30);
  const auto a = nearest_assignment(m, pts);
  update_statistics(m, a, pts);
  double expect = 0.0;
  for (auto& c : m.components) {
    c.sigma = c.scatter * (1.0 / (static_cast<double>(c.count) + 1.0));
    expect += direct_term(c.count, c.center, c.sample_mean, c.sigma, c.scatter);
  }
  CHECK(log_likelihood(m) == doctest::Approx(expect).epsilon(1e-12));

  for (double s : {0.5, 0.9, 1.7, 3.0}) {
    ChainedModel scaled = m;
    double predicted = 0.0;
    for (auto& c : scaled.components) {
      const double l = static_cast<double>(c.count);
      const double quad = c.sigma.inverse().quad(c.center - c.sample_mean);
      const SymMat2 inv = c.sigma.inverse();
      const double tr = c.scatter.xx * inv.xx + 2 * c.scatter.xy * inv.xy + c.scatter.yy * inv.yy;
      predicted += -0.5 * l * quad / s - 0.5 * (l + 1) * (std::log(c.sigma.det()) + 2 * std::log(s)) - 0.5 * tr / s;
      c.sigma = c.sigma * s;
    }
    CHECK(log_likelihood(scaled) == doctest::Approx(predicted).epsilon(1e-12));
  }

  // centers on the sample means, then pushed away
  ChainedModel at_mean = m;
  for (auto& c : at_mean.components) c.center = c.sample_mean;
  const double base = log_likelihood(at_mean);
  for (int trial = 0; trial < 20; ++trial) {
    ChainedModel moved = at_mean;
    const auto k = static_cast<std::size_t>(testutil::uniform_int(rng, 0, 3));
    moved.components[k].center += testutil::random_point(rng, -3, 3);
    CHECK(log_likelihood(moved) < base);
  }

  // empty components contribute nothing
  ChainedModel with_empty = m;
  with_empty.components.push_back(RmmComponent{});
  CHECK(log_likelihood(with_empty) == doctest::Approx(log_likelihood(m)));
}

TEST_CASE("e_step assignments") {
  SUBCASE("well separated equal covariances partition by distance") {
    ChainedModel m = straight_model(3, 200, 4);
    PointCloud2 pts;
    Rng rng(5);
    for (int i = 0; i < 60; ++i) pts.push_back(m.components[static_cast<std::size_t>(i % 3)].center + testutil::random_point(rng, -3, 3));
    const auto expect = nearest_assignment(m, pts);
    const auto a = e_step(m, pts);
    CHECK(a.labels == expect.labels);
    CHECK(std::accumulate(a.counts.begin(), a.counts.end(), std::size_t{0}) == pts.size());
  }
  SUBCASE("single component takes everything") {
    ChainedModel m = straight_model(2, 100, 4);
    m.components.resize(1);
    Rng rng(6);
    const auto pts = testutil::random_cloud(rng, 40);
    const auto a = e_step(m, pts);
    CHECK(a.counts == std::vector<std::size_t>{40});
  }
  SUBCASE("anisotropic covariance claims the point along its major axis") {
    ChainedModel m = straight_model(2, 10, 1);
    m.components[0].center = {-5, 0};
    m.components[1].center = {5, 0};
    m.components[0].sigma = {25, 0, 1};
    m.components[1].sigma = {1, 0, 25};
    const auto a = e_step(m, {{0, 0}});
    CHECK(a.labels[0] == 0);
  }
}

TEST_CASE("m_step_controls") {
  SUBCASE("interpolation when the basis rows form the identity") {
    std::vector<Point2> ctrl{{0, 0}, {1, 0}, {2, 0}, {3, 0}, {4, 0}};
    ChainedModel m;
    m.curve = BSplineCurve(1, ctrl);
    Rng rng(7);
    for (int k = 0; k < 5; ++k) {
      RmmComponent c;
      c.t = k;
      c.count = 3;
      c.sample_mean = testutil::random_point(rng);
      c.sigma = testutil::random_spd(rng, 1, 5);
      m.components.push_back(c);
    }
    const auto b = m_step_controls(m);
    for (int k = 0; k < 5; ++k) CHECK(distance(b[static_cast<std::size_t>(k)], m.components[static_cast<std::size_t>(k)].sample_mean) < 1e-9);
  }
  SUBCASE("collinear means give a curve on their line") {
    ChainedModel m = straight_model(9, 100, 1, 5);
    for (std::size_t k = 0; k < m.size(); ++k) {
      auto& c = m.components[k];
      c.count = 10;
      const double u = 10.0 * static_cast<double>(k) + (k % 2 ? 3.0 : -1.0);
      c.sample_mean = {u, 0.5 * u + 4.0};
    }
    m = m.with_controls(m_step_controls(m));
    for (int i = 0; i <= 50; ++i) {
      const Point2 p = m.curve.eval(m.curve.domain_end() * i / 50);
      CHECK(p.y == doctest::Approx(0.5 * p.x + 4.0).epsilon(1e-9));
    }
  }
  SUBCASE("the solution is stationary and the analytic gradient matches finite differences") {
    Rng rng(8);
    for (int trial = 0; trial < 10; ++trial) {
      const auto pts = tube(200, 10 + static_cast<std::uint64_t>(trial), Preset::C);
      ChainedModel m = straight_model(8, 200, 20);
      const auto a = nearest_assignment(m, pts);
      update_statistics(m, a, pts);
      for (auto& c : m.components) c.sigma = testutil::random_spd(rng, 5, 40);
      const double init_grad = fd_gradient_max(m, 1e-5);
      const Eigen::VectorXd g = control_gradient(m);
      CHECK(std::abs(g.cwiseAbs().maxCoeff() - init_grad) <= 1e-4 * init_grad);
      const auto solved = m.with_controls(m_step_controls(m));
      CHECK(fd_gradient_max(solved, 1e-5) <= 1e-6 * init_grad);
      CHECK(control_gradient(solved).cwiseAbs().maxCoeff() <= 1e-9 * init_grad);
      CHECK(log_likelihood(solved) >= log_likelihood(m));
    }
  }
  SUBCASE("unconstrained controls stay put and the step commutes with rigid motion") {
    Rng rng(9);
    for (int trial = 0; trial < 20; ++trial) {
      ChainedModel m = straight_model(8, 200, 20);
      // only the first three components see data, so the far controls are free
      for (std::size_t k = 0; k < 3; ++k) {
        m.components[k].count = 5;
        m.components[k].sample_mean = m.components[k].center + testutil::random_point(rng, -5, 5);
        m.components[k].sigma = testutil::random_spd(rng, 5, 40);
      }
      const auto before = m.curve.control_points();
      const auto after = m_step_controls(m);
      CHECK(distance(after.back(), before.back()) < 1e-9);
      const auto g = testutil::random_rigid(rng);
      ChainedModel moved = m;
      std::vector<Point2> ctrl;
      for (const auto& c : before) ctrl.push_back(g(c));
      moved = moved.with_controls(ctrl);
      for (auto& c : moved.components) {
        c.sample_mean = g(c.sample_mean);
        c.sigma = c.sigma.rotated(g.theta);
      }
      const auto after_moved = m_step_controls(moved);
      for (std::size_t i = 0; i < after.size(); ++i) CHECK(distance(after_moved[i], g(after[i])) < 1e-7);
    }
  }
}

TEST_CASE("m_step_sigma") {
  const auto pts = tube(150, 12);
  ChainedModel m = straight_model(6, 150, 25);
  const auto a = nearest_assignment(m, pts);
  update_statistics(m, a, pts);
  SUBCASE("centers on the means give the scatter over L+1") {
    ChainedModel at_mean = m;
    for (auto& c : at_mean.components) c.center = c.sample_mean;
    const auto s = m_step_sigma(at_mean, a, pts);
    std::size_t used = 0;
    for (std::size_t k = 0; k < m.size(); ++k) {
      if (at_mean.components[k].count == 0) continue;
      ++used;
      const SymMat2 expect = at_mean.components[k].scatter * (1.0 / (static_cast<double>(at_mean.components[k].count) + 1));
      CHECK(s[k].xx == doctest::Approx(expect.xx).epsilon(1e-12));
      CHECK(s[k].xy == doctest::Approx(expect.xy).epsilon(1e-12));
      CHECK(s[k].yy == doctest::Approx(expect.yy).epsilon(1e-12));
    }
    CHECK(used >= 3);
  }
  SUBCASE("scaling the update never helps") {
    ChainedModel upd = m;
    const auto s = m_step_sigma(m, a, pts);
    for (std::size_t k = 0; k < m.size(); ++k) upd.components[k].sigma = s[k];
    const double best = log_likelihood(upd);
    for (int i = 0; i <= 100; ++i) {
      const double scale = 0.5 + 1.5 * i / 100.0;
      ChainedModel sc = upd;
      for (auto& c : sc.components) c.sigma = c.sigma * scale;
      CHECK(log_likelihood(sc) <= best + 1e-9 * std::abs(best));
    }
  }
  SUBCASE("symmetric points give a diagonal covariance") {
    ChainedModel one = straight_model(2, 10, 1);
    one.components.resize(1);
    one.components[0].center = {0, 0};
    const PointCloud2 two{{-2, 0}, {2, 0}};
    Assignment a2{{0, 0}, {2}};
    const auto s = m_step_sigma(one, a2, two);
    CHECK(s[0].xy == 0.0);
    CHECK(s[0].xx == doctest::Approx(8.0 / 3.0).epsilon(1e-5));
  }
}

TEST_CASE("fit is monotone with fixed assignments and counts every point") {
  for (Preset p : all_presets()) {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      const auto pts = tube(300, seed, p);
      const auto m = straight_model(12, 300, 56);
      FitOptions opt;
      opt.max_iter = 6;
      opt.inner_iter = 8;
      const auto r = fit(pts, m, opt);
      for (const auto& vals : r.trace.inner_values)
        for (std::size_t i = 1; i < vals.size(); ++i) CHECK(vals[i] >= vals[i - 1] - 1e-9 * std::abs(vals[i - 1]));
      std::size_t total = 0;
      for (const auto& c : r.model.components) total += c.count;
      CHECK(total == pts.size());
      CHECK(std::accumulate(r.assignment.counts.begin(), r.assignment.counts.end(), std::size_t{0}) == pts.size());
      CHECK(r.trace.outer_iterations <= opt.max_iter);
      CHECK(r.log_likelihood == doctest::Approx(log_likelihood(r.model)));
    }
  }
}

TEST_CASE("fit from its own optimum stops after one outer iteration") {
  const auto pts = tube(300, 21);
  FitOptions big;
  big.max_iter = 100;
  big.inner_iter = 200;
  const auto first = fit(pts, straight_model(12, 300, 56), big);
  REQUIRE(first.trace.converged);
  const auto second = fit(pts, first.model, big);
  CHECK(second.trace.outer_iterations == 1);
  CHECK(std::abs(second.log_likelihood - first.log_likelihood) <= 1e-6 * std::abs(first.log_likelihood));
}

TEST_CASE("fit is equivariant under rigid motion") {
  Rng rng(13);
  const auto pts = tube(250, 31, Preset::C);
  const auto init = straight_model(10, 250, 56);
  const auto base = fit(pts, init, {});
  for (int trial = 0; trial < 5; ++trial) {
    const auto g = testutil::random_rigid(rng);
    PointCloud2 moved;
    for (const auto& p : pts) moved.push_back(g(p));
    ChainedModel mi = init;
    std::vector<Point2> ctrl;
    for (const auto& c : init.curve.control_points()) ctrl.push_back(g(c));
    mi = mi.with_controls(ctrl);
    const auto r = fit(moved, mi, {});
    REQUIRE(r.model.size() == base.model.size());
    for (std::size_t k = 0; k < r.model.size(); ++k) {
      CHECK(distance(r.model.components[k].center, g(base.model.components[k].center)) < 1e-7);
      const SymMat2 rs = base.model.components[k].sigma.rotated(g.theta);
      const SymMat2& s = r.model.components[k].sigma;
      CHECK(std::abs(s.xx - rs.xx) < 1e-7 * std::max(1.0, rs.trace()));
      CHECK(std::abs(s.xy - rs.xy) < 1e-7 * std::max(1.0, rs.trace()));
      CHECK(std::abs(s.yy - rs.yy) < 1e-7 * std::max(1.0, rs.trace()));
    }
  }
}

TEST_CASE("floor_eigenvalues") {
  CHECK(floor_eigenvalues(SymMat2::identity(3), 1e-6) == SymMat2::identity(3));
  const SymMat2 flat = floor_eigenvalues(SymMat2{4, 0, 0}, 0.5);
  CHECK(flat.xx == doctest::Approx(4.0));
  CHECK(flat.xy == doctest::Approx(0.0));
  CHECK(flat.yy == doctest::Approx(0.5));
  // rotated rank-1 input keeps its direction
  const SymMat2 r = floor_eigenvalues(SymMat2::outer({3, 4}), 0.25);
  const auto e = eig_sym2(r);
  CHECK(e.values[0] == doctest::Approx(25.0));
  CHECK(e.values[1] == doctest::Approx(0.25));
  CHECK(std::abs(e.vectors[0].x * 4 - e.vectors[0].y * 3) < 1e-9);
}

TEST_CASE("covariance update beats every floored alternative on a two-point component") {
  testutil::Rng rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    ChainedModel one = straight_model(2, 10, 1);
    one.components.resize(1);
    one.components[0].center = testutil::random_point(rng, -3.0, 3.0);
    const PointCloud2 two{testutil::random_point(rng, -5.0, 5.0), testutil::random_point(rng, -5.0, 5.0)};
    Assignment a{{0, 0}, {2}};
    update_statistics(one, a, two);
    const double floor = testutil::uniform(rng, 1e-6, 1e-2);
    ChainedModel upd = one;
    upd.components[0].sigma = m_step_sigma(one, a, two, floor)[0];
    CHECK(eig_sym2(upd.components[0].sigma).values[1] >= floor * (1 - 1e-9));
    const double best = log_likelihood(upd);
    for (int j = 0; j < 20; ++j) {
      ChainedModel alt = one;
      alt.components[0].sigma = floor_eigenvalues(testutil::random_spd(rng, 0.0, 10.0), floor);
      CHECK(log_likelihood(alt) <= best + 1e-9 * std::abs(best));
    }
  }
}

TEST_CASE("regularize") {
  const SymMat2 flat{4, 0, 0};
  const SymMat2 r = regularize(flat);
  CHECK(r.det() > 0.0);
  CHECK(regularize(SymMat2::identity(3)) == SymMat2::identity(3));
}
