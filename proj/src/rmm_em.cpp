#include "dlo/rmm_em.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <spdlog/spdlog.h>

namespace dlo {

void ChainedModel::refresh_centers() {
  for (auto& c : components) c.center = curve.eval(c.t);
}

ChainedModel ChainedModel::with_controls(std::vector<Point2> ctrl) const {
  ChainedModel m = *this;
  m.curve = BSplineCurve(curve.degree(), std::move(ctrl), curve.knots());
  m.refresh_centers();
  return m;
}

Point2 sample_mean(std::span<const Point2> points) {
  if (points.empty()) throw std::invalid_argument("sample_mean: empty component");
  Point2 s;
  for (const auto& p : points) s += p;
  return s / static_cast<double>(points.size());
}

SymMat2 scatter_matrix(std::span<const Point2> points, const Point2& mean) {
  SymMat2 s;
  for (const auto& p : points) s += SymMat2::outer(p - mean);
  return s;
}

SymMat2 regularize(const SymMat2& sigma) {
  const double eps = 1e-6 * std::max(sigma.trace(), 1.0);
  if (eig_sym2(sigma).values[1] < eps) return sigma + SymMat2::identity(eps);
  return sigma;
}

SymMat2 floor_eigenvalues(const SymMat2& sigma, double floor) {
  const auto e = eig_sym2(sigma);
  if (e.values[1] >= floor) return sigma;
  SymMat2 out;
  for (int i = 0; i < 2; ++i) out += SymMat2::outer(e.vectors[i]) * std::max(e.values[i], floor);
  return out;
}

void update_statistics(ChainedModel& model, const Assignment& assignment, const PointCloud2& points) {
  const std::size_t k = model.size();
  if (assignment.labels.size() != points.size()) {
    throw std::invalid_argument("update_statistics: assignment does not match the point count");
  }
  std::vector<Point2> sums(k);
  std::vector<std::size_t> counts(k, 0);
  for (std::size_t r = 0; r < points.size(); ++r) {
    const std::size_t l = assignment.labels[r];
    if (l >= k) throw std::out_of_range("update_statistics: label out of range");
    sums[l] += points[r];
    ++counts[l];
  }
  std::vector<SymMat2> scatter(k);
  for (std::size_t i = 0; i < k; ++i) {
    model.components[i].count = counts[i];
    if (counts[i] > 0) model.components[i].sample_mean = sums[i] / static_cast<double>(counts[i]);
  }
  for (std::size_t r = 0; r < points.size(); ++r) {
    const std::size_t l = assignment.labels[r];
    scatter[l] += SymMat2::outer(points[r] - model.components[l].sample_mean);
  }
  for (std::size_t i = 0; i < k; ++i) model.components[i].scatter = scatter[i];
}

namespace {

SymMat2 usable(const SymMat2& s) { return s.det() > 0.0 && s.xx > 0.0 ? s : regularize(s); }

double trace_product(const SymMat2& a, const SymMat2& b) { return a.xx * b.xx + 2.0 * a.xy * b.xy + a.yy * b.yy; }

}  // namespace

double log_likelihood(const ChainedModel& model) {
  double total = 0.0;
  for (const auto& c : model.components) {
    if (c.count == 0) continue;
    const SymMat2 sigma = usable(c.sigma);
    const SymMat2 inv = sigma.inverse();
    const double l = static_cast<double>(c.count);
    total += -0.5 * l * inv.quad(c.center - c.sample_mean) - 0.5 * (l + 1.0) * std::log(sigma.det()) -
             0.5 * trace_product(c.scatter, inv);
  }
  return total;
}

double log_likelihood(const ChainedModel& model, const Assignment& assignment, const PointCloud2& points) {
  ChainedModel m = model;
  update_statistics(m, assignment, points);
  return log_likelihood(m);
}

Assignment e_step(ChainedModel& model, const PointCloud2& points) {
  const std::size_t k = model.size();
  if (k == 0) throw std::invalid_argument("e_step: model has no components");
  std::vector<SymMat2> inv(k);
  std::vector<double> half_logdet(k);
  for (std::size_t i = 0; i < k; ++i) {
    const SymMat2 s = usable(model.components[i].sigma);
    inv[i] = s.inverse();
    half_logdet[i] = 0.5 * std::log(s.det());
  }
  Assignment a;
  a.labels.resize(points.size());
  a.counts.assign(k, 0);
  for (std::size_t r = 0; r < points.size(); ++r) {
    std::size_t best = 0;
    double best_v = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < k; ++i) {
      const double v = -half_logdet[i] - 0.5 * inv[i].quad(points[r] - model.components[i].center);
      if (v > best_v) {
        best_v = v;
        best = i;
      }
    }
    a.labels[r] = best;
    ++a.counts[best];
  }
  update_statistics(model, a, points);
  if (k >= 2) {
    std::vector<Point2> order(k);
    for (std::size_t i = 0; i < k; ++i) {
      const auto& c = model.components[i];
      order[i] = c.count > 0 ? c.sample_mean : c.center;
    }
    const auto params = centripetal_params(order, model.curve.domain_end());
    for (std::size_t i = 0; i < k; ++i) model.components[i].t = params.params[i];
  }
  model.refresh_centers();
  return a;
}

namespace {

struct NormalEquations {
  Eigen::MatrixXd q;
  Eigen::VectorXd m;
};

NormalEquations normal_equations(const ChainedModel& model) {
  const std::size_t m = model.curve.control_points().size();
  const Eigen::Index dim = static_cast<Eigen::Index>(2 * m);
  NormalEquations ne{Eigen::MatrixXd::Zero(dim, dim), Eigen::VectorXd::Zero(dim)};
  const Eigen::Index off = static_cast<Eigen::Index>(m);
  for (const auto& c : model.components) {
    if (c.count == 0) continue;
    const auto row = model.curve.basis_row(c.t);
    const Eigen::Map<const Eigen::VectorXd> n(row.data(), static_cast<Eigen::Index>(row.size()));
    const SymMat2 inv = usable(c.sigma).inverse();
    const double l = static_cast<double>(c.count);
    const Eigen::MatrixXd nn = n * n.transpose();
    ne.q.topLeftCorner(off, off) += l * inv.xx * nn;
    ne.q.topRightCorner(off, off) += l * inv.xy * nn;
    ne.q.bottomLeftCorner(off, off) += l * inv.xy * nn;
    ne.q.bottomRightCorner(off, off) += l * inv.yy * nn;
    const Point2 w = inv * c.sample_mean;
    ne.m.head(off) += l * w.x * n;
    ne.m.tail(off) += l * w.y * n;
  }
  return ne;
}

}  // namespace

std::vector<Point2> m_step_controls(const ChainedModel& model) {
  const auto ne = normal_equations(model);
  if (ne.q.isZero(0.0)) throw std::runtime_error("m_step_controls: every component is empty");
  const auto& cur = model.curve.control_points();
  const std::size_t m = cur.size();
  Eigen::VectorXd b(static_cast<Eigen::Index>(2 * m));
  for (std::size_t i = 0; i < m; ++i) {
    b(static_cast<Eigen::Index>(i)) = cur[i].x;
    b(static_cast<Eigen::Index>(i + m)) = cur[i].y;
  }
  // Smallest move from the current controls. Same as pinv(Q) M when Q has full
  // rank; otherwise controls nobody constrains stay put instead of collapsing
  // toward the origin.
  b += pinv(ne.q) * (ne.m - ne.q * b);
  std::vector<Point2> ctrl(m);
  for (std::size_t i = 0; i < m; ++i) {
    ctrl[i] = {b(static_cast<Eigen::Index>(i)), b(static_cast<Eigen::Index>(i + m))};
  }
  return ctrl;
}

Eigen::VectorXd control_gradient(const ChainedModel& model) {
  const auto ne = normal_equations(model);
  const auto& ctrl = model.curve.control_points();
  const std::size_t m = ctrl.size();
  Eigen::VectorXd b(static_cast<Eigen::Index>(2 * m));
  for (std::size_t i = 0; i < m; ++i) {
    b(static_cast<Eigen::Index>(i)) = ctrl[i].x;
    b(static_cast<Eigen::Index>(i + m)) = ctrl[i].y;
  }
  return ne.m - ne.q * b;
}

std::vector<SymMat2> m_step_sigma(const ChainedModel& model, const Assignment& assignment, const PointCloud2& points,
                                  double floor) {
  const std::size_t k = model.size();
  std::vector<SymMat2> acc(k);
  std::vector<std::size_t> counts(k, 0);
  for (std::size_t r = 0; r < points.size(); ++r) {
    const std::size_t l = assignment.labels[r];
    acc[l] += SymMat2::outer(points[r] - model.components[l].center);
    ++counts[l];
  }
  std::vector<SymMat2> out(k);
  for (std::size_t i = 0; i < k; ++i) {
    if (counts[i] == 0) {
      out[i] = model.components[i].sigma;
      continue;
    }
    // Over a fixed floor this is still the exact maximizer, so the inner steps stay monotone.
    out[i] = floor_eigenvalues(acc[i] * (1.0 / (static_cast<double>(counts[i]) + 1.0)), floor);
  }
  return out;
}

namespace {

// Removes components listed in drop and remaps labels.
void drop_components(ChainedModel& model, Assignment& a, const std::vector<char>& drop) {
  std::vector<std::size_t> remap(model.size(), 0);
  std::vector<RmmComponent> kept;
  std::vector<std::size_t> counts;
  for (std::size_t i = 0; i < model.size(); ++i) {
    remap[i] = kept.size();
    if (!drop[i]) {
      kept.push_back(model.components[i]);
      counts.push_back(a.counts[i]);
    }
  }
  for (auto& l : a.labels) l = remap[l];
  model.components = std::move(kept);
  a.counts = std::move(counts);
}

}  // namespace

FitResult fit(const PointCloud2& points, const ChainedModel& init, const FitOptions& options) {
  if (points.empty()) throw std::invalid_argument("fit: empty point cloud");
  if (init.size() == 0) throw std::invalid_argument("fit: model has no components");
  FitResult best;
  best.log_likelihood = -std::numeric_limits<double>::infinity();
  bool have_best = false;
  FitTrace trace;
  ChainedModel model = init;
  std::vector<int> empty_streak(model.size(), 0);
  double prev_outer = 0.0;
  for (int outer = 0; outer < std::max(options.max_iter, 1); ++outer) {
    Assignment a = e_step(model, points);
    std::vector<char> drop(model.size(), 0);
    std::size_t non_empty = 0;
    bool any_drop = false;
    for (std::size_t i = 0; i < model.size(); ++i) {
      empty_streak[i] = a.counts[i] == 0 ? empty_streak[i] + 1 : 0;
      if (a.counts[i] > 0) ++non_empty;
      if (empty_streak[i] >= options.drop_after) {
        drop[i] = 1;
        any_drop = true;
      }
    }
    if (any_drop && non_empty >= 2) {
      std::vector<int> streak;
      for (std::size_t i = 0; i < model.size(); ++i) {
        if (!drop[i]) streak.push_back(empty_streak[i]);
      }
      spdlog::debug("fit: dropping {} empty component(s)", model.size() - streak.size());
      drop_components(model, a, drop);
      empty_streak = std::move(streak);
      a = e_step(model, points);
    }

    std::vector<double> values;
    double cur = log_likelihood(model);
    values.push_back(cur);
    for (int inner = 0; inner < std::max(options.inner_iter, 1); ++inner) {
      model = model.with_controls(m_step_controls(model));
      values.push_back(log_likelihood(model));
      const auto sig = m_step_sigma(model, a, points);
      for (std::size_t i = 0; i < model.size(); ++i) model.components[i].sigma = sig[i];
      const double next = log_likelihood(model);
      values.push_back(next);
      const bool small = next - cur <= options.inner_tol * std::abs(cur);
      cur = next;
      if (small) break;
    }
    // The first iteration compares against its own post-E-step value, so an
    // already stationary model stops after one pass.
    if (outer == 0) prev_outer = values.front();
    trace.inner_values.push_back(std::move(values));
    trace.outer_values.push_back(cur);
    trace.outer_iterations = outer + 1;

    if (!have_best || cur > best.log_likelihood) {
      best.model = model;
      best.assignment = a;
      best.log_likelihood = cur;
      have_best = true;
    }
    if (std::abs(cur - prev_outer) <= options.outer_tol * std::abs(prev_outer)) {
      trace.converged = true;
      break;
    }
    prev_outer = cur;
  }
  best.trace = std::move(trace);
  return best;
}

}  // namespace dlo
