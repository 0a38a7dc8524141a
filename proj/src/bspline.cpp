#include "dlo/bspline.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <spdlog/spdlog.h>

namespace dlo {

std::vector<double> make_clamped_knots(int n, int d) {
  if (d < 1 || n < d) {
    throw std::invalid_argument("make_clamped_knots: need n >= d >= 1 (n=" + std::to_string(n) +
                                ", d=" + std::to_string(d) + ")");
  }
  std::vector<double> knots(static_cast<std::size_t>(n + d + 2));
  for (int i = 0; i <= n + d + 1; ++i) {
    double v;
    if (i < d + 1) {
      v = 0.0;
    } else if (i <= n) {
      v = static_cast<double>(i - d);
    } else {
      v = static_cast<double>(n - d + 1);
    }
    knots[static_cast<std::size_t>(i)] = v;
  }
  return knots;
}

namespace {

double basis_rec(int i, int d, double t, std::span<const double> k) {
  const auto u = [&](int j) { return k[static_cast<std::size_t>(j)]; };
  if (d == 0) {
    if (u(i) <= t && t < u(i + 1)) return 1.0;
    // Closed right end: the last non-empty span owns t == t_max.
    if (t == k.back() && u(i + 1) == k.back() && u(i) < u(i + 1)) return 1.0;
    return 0.0;
  }
  double value = 0.0;
  const double left_den = u(i + d) - u(i);
  if (left_den != 0.0) value += (t - u(i)) / left_den * basis_rec(i, d - 1, t, k);
  const double right_den = u(i + d + 1) - u(i + 1);
  if (right_den != 0.0) value += (u(i + d + 1) - t) / right_den * basis_rec(i + 1, d - 1, t, k);
  return value;
}

// Index of the knot span [k_s, k_{s+1}) containing t, restricted to the
// domain [k_deg, k_{last_ctrl+1}].
int span_of(double t, int degree, int last_ctrl, std::span<const double> k) {
  const auto lo_it = k.begin() + degree;
  const auto hi_it = k.begin() + last_ctrl + 1;
  if (t >= *hi_it) {
    // Rightmost non-empty span.
    int s = last_ctrl;
    while (s > degree && k[static_cast<std::size_t>(s)] == k[static_cast<std::size_t>(s + 1)]) --s;
    return s;
  }
  if (t <= *lo_it) {
    int s = degree;
    while (s < last_ctrl && k[static_cast<std::size_t>(s)] == k[static_cast<std::size_t>(s + 1)]) ++s;
    return s;
  }
  const auto it = std::upper_bound(lo_it, hi_it + 1, t);
  return static_cast<int>(it - k.begin()) - 1;
}

// Non-zero basis functions N_{s-p..s, p}(t) (Piegl & Tiller, A2.2).
std::vector<double> nonzero_basis(int span, double t, int p, std::span<const double> k) {
  std::vector<double> n(static_cast<std::size_t>(p + 1), 0.0);
  std::vector<double> left(static_cast<std::size_t>(p + 1), 0.0);
  std::vector<double> right(static_cast<std::size_t>(p + 1), 0.0);
  n[0] = 1.0;
  for (int j = 1; j <= p; ++j) {
    left[static_cast<std::size_t>(j)] = t - k[static_cast<std::size_t>(span + 1 - j)];
    right[static_cast<std::size_t>(j)] = k[static_cast<std::size_t>(span + j)] - t;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double den = right[static_cast<std::size_t>(r + 1)] + left[static_cast<std::size_t>(j - r)];
      const double tmp = den != 0.0 ? n[static_cast<std::size_t>(r)] / den : 0.0;
      n[static_cast<std::size_t>(r)] = saved + right[static_cast<std::size_t>(r + 1)] * tmp;
      saved = left[static_cast<std::size_t>(j - r)] * tmp;
    }
    n[static_cast<std::size_t>(j)] = saved;
  }
  return n;
}

Point2 eval_generic(int degree, const std::vector<Point2>& ctrl, std::span<const double> knots, double t) {
  const int last = static_cast<int>(ctrl.size()) - 1;
  const int span = span_of(t, degree, last, knots);
  const auto n = nonzero_basis(span, t, degree, knots);
  Point2 p;
  for (int j = 0; j <= degree; ++j) {
    p += ctrl[static_cast<std::size_t>(span - degree + j)] * n[static_cast<std::size_t>(j)];
  }
  return p;
}

}  // namespace

double basis(int i, int d, double t, std::span<const double> knots) {
  if (d < 0 || i < 0 || static_cast<std::size_t>(i + d + 1) >= knots.size()) {
    throw std::out_of_range("basis: index " + std::to_string(i) + " out of range for degree " + std::to_string(d));
  }
  return basis_rec(i, d, t, knots);
}

BSplineCurve::BSplineCurve(int degree, std::vector<Point2> control_points)
    : BSplineCurve(degree, control_points,
                   make_clamped_knots(static_cast<int>(control_points.size()) - 1, degree)) {}

BSplineCurve::BSplineCurve(int degree, std::vector<Point2> control_points, std::vector<double> knots)
    : degree_(degree), ctrl_(std::move(control_points)), knots_(std::move(knots)) {
  if (degree_ < 1) throw std::invalid_argument("BSplineCurve: degree must be >= 1");
  if (ctrl_.size() < static_cast<std::size_t>(degree_ + 1)) {
    throw std::invalid_argument("BSplineCurve: need at least degree+1 control points");
  }
  if (knots_.size() != ctrl_.size() + static_cast<std::size_t>(degree_) + 1) {
    throw std::invalid_argument("BSplineCurve: knot count must be n+d+2");
  }
  if (!std::is_sorted(knots_.begin(), knots_.end())) {
    throw std::invalid_argument("BSplineCurve: knots must be non-decreasing");
  }
}

double BSplineCurve::clamp(double t) const {
  const double lo = domain_begin();
  const double hi = domain_end();
  if (t < lo || t > hi) {
    if (t < lo - 1e-9 || t > hi + 1e-9) {
      spdlog::debug("BSplineCurve: parameter {} clamped to [{}, {}]", t, lo, hi);
    }
    return std::clamp(t, lo, hi);
  }
  return t;
}

int BSplineCurve::find_span(double t) const { return span_of(t, degree_, n(), knots_); }

Point2 BSplineCurve::eval(double t) const { return eval_generic(degree_, ctrl_, knots_, clamp(t)); }

std::vector<double> BSplineCurve::basis_row(double t) const {
  t = clamp(t);
  const int span = find_span(t);
  const auto nz = nonzero_basis(span, t, degree_, knots_);
  std::vector<double> row(ctrl_.size(), 0.0);
  for (int j = 0; j <= degree_; ++j) {
    row[static_cast<std::size_t>(span - degree_ + j)] = nz[static_cast<std::size_t>(j)];
  }
  return row;
}

Point2 BSplineCurve::derivative(double t) const {
  t = clamp(t);
  // Derivative curve: degree d-1 over the knot vector without its end knots.
  std::vector<Point2> dctrl;
  dctrl.reserve(ctrl_.size() - 1);
  for (std::size_t i = 0; i + 1 < ctrl_.size(); ++i) {
    const double den = knots_[i + static_cast<std::size_t>(degree_) + 1] - knots_[i + 1];
    dctrl.push_back(den != 0.0 ? (ctrl_[i + 1] - ctrl_[i]) * (degree_ / den) : Point2{});
  }
  const std::span<const double> dknots(knots_.data() + 1, knots_.size() - 2);
  if (degree_ == 1) {
    // Piecewise constant: pick the span directly.
    const int span = span_of(t, 0, static_cast<int>(dctrl.size()) - 1, dknots);
    return dctrl[static_cast<std::size_t>(span)];
  }
  return eval_generic(degree_ - 1, dctrl, dknots, t);
}

Point2 BSplineCurve::tangent(double t) const {
  t = clamp(t);
  Point2 d = derivative(t);
  if (d.norm() > 1e-12) return normalized(d);
  const double h = 1e-4 * (domain_end() - domain_begin());
  if (t + h <= domain_end()) {
    d = eval(t + h) - eval(t);
  } else {
    d = eval(t) - eval(t - h);
  }
  if (d.norm() <= 1e-15) throw std::runtime_error("BSplineCurve::tangent: zero derivative");
  return normalized(d);
}

std::vector<double> BSplineCurve::sample_parameters(double t0, double t1, int per_span) const {
  t0 = clamp(t0);
  t1 = clamp(t1);
  int spans = 0;
  for (std::size_t i = static_cast<std::size_t>(degree_); i + 1 <= ctrl_.size(); ++i) {
    if (knots_[i + 1] > knots_[i]) ++spans;
  }
  const double mean_span = (domain_end() - domain_begin()) / std::max(spans, 1);
  const int count = std::max(1, static_cast<int>(std::ceil(per_span * std::abs(t1 - t0) / mean_span)));
  std::vector<double> ts(static_cast<std::size_t>(count + 1));
  for (int i = 0; i <= count; ++i) {
    ts[static_cast<std::size_t>(i)] = t0 + (t1 - t0) * static_cast<double>(i) / count;
  }
  ts.back() = t1;
  return ts;
}

double BSplineCurve::arc_length(double t0, double t1) const {
  const auto polyline_length = [&](int per_span) {
    const auto ts = sample_parameters(t0, t1, per_span);
    double len = 0.0;
    Point2 prev = eval(ts.front());
    for (std::size_t i = 1; i < ts.size(); ++i) {
      const Point2 p = eval(ts[i]);
      len += distance(prev, p);
      prev = p;
    }
    return len;
  };
  int per_span = 64;
  double len = polyline_length(per_span);
  for (int iter = 0; iter < 8; ++iter) {
    per_span *= 2;
    const double refined = polyline_length(per_span);
    const bool converged = std::abs(refined - len) <= 1e-3 * std::max(refined, 1e-12);
    len = refined;
    if (converged) break;
  }
  return len;
}

BSplineCurve BSplineCurve::reversed() const {
  std::vector<Point2> ctrl(ctrl_.rbegin(), ctrl_.rend());
  const double a = knots_.front();
  const double b = knots_.back();
  std::vector<double> knots(knots_.size());
  for (std::size_t i = 0; i < knots_.size(); ++i) knots[i] = a + b - knots_[knots_.size() - 1 - i];
  return BSplineCurve(degree_, std::move(ctrl), std::move(knots));
}

CentripetalResult centripetal_params(std::span<const Point2> points, double domain_end) {
  if (points.size() < 2) throw std::invalid_argument("centripetal_params: need at least 2 points");
  CentripetalResult out;
  out.params.assign(points.size(), 0.0);
  double total = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) {
    const double chord = distance(points[i], points[i - 1]);
    if (chord == 0.0) out.had_duplicates = true;
    total += std::sqrt(chord);
    out.params[i] = total;
  }
  if (total == 0.0) {
    // Every point coincides; fall back to uniform spacing.
    for (std::size_t i = 0; i < points.size(); ++i) {
      out.params[i] = domain_end * static_cast<double>(i) / static_cast<double>(points.size() - 1);
    }
    return out;
  }
  for (auto& t : out.params) t = t / total * domain_end;
  out.params.back() = domain_end;
  if (out.had_duplicates) spdlog::debug("centripetal_params: duplicate consecutive points");
  return out;
}

OffsetPolylines offset_polylines(const BSplineCurve& curve, double h, double t0, double t1, int per_span) {
  if (!(h > 0.0)) throw std::invalid_argument("offset_polylines: h must be positive");
  OffsetPolylines out;
  for (double t : curve.sample_parameters(t0, t1, per_span)) {
    const Point2 p = curve.eval(t);
    const Point2 nrm = perp(curve.tangent(t));
    out.left.push_back(p + nrm * h);
    out.right.push_back(p - nrm * h);
  }
  return out;
}

}  // namespace dlo
