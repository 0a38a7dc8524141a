#include "dlo/shape.hpp"

#include <cmath>
#include <stdexcept>

namespace dlo {

namespace {

SymMat2 safe_sigma(const SymMat2& s) { return s.det() > 0.0 && s.xx > 0.0 ? s : regularize(s); }

Point2 outward_hit(const Ellipse& e, const Point2& c, const Point2& dir, const Point2& neighbour) {
  const auto hits = line_ellipse_intersection(e, c, dir);
  if (hits.size() < 2) throw std::logic_error("endpoints: tangent line misses its ellipse");
  const Point2 away = c - neighbour;
  return dot(hits.front() - c, away) >= dot(hits.back() - c, away) ? hits.front() : hits.back();
}

}  // namespace

double estimate_half_width(const ChainedModel& model, double width_scale) {
  if (model.size() == 0) throw std::invalid_argument("estimate_half_width: empty model");
  if (!(width_scale > 0.0)) throw std::invalid_argument("estimate_half_width: width_scale must be positive");
  double sum = 0.0;
  for (const auto& c : model.components) {
    const Ellipse e = ellipse_from_covariance(safe_sigma(c.sigma) * (width_scale / 4.0), c.center);
    const Point2 normal = perp(model.curve.tangent(c.t));
    const auto hits = line_ellipse_intersection(e, c.center, normal);
    if (hits.size() < 2) throw std::logic_error("estimate_half_width: normal line misses its own ellipse");
    sum += 0.5 * (distance(hits[0], c.center) + distance(hits[1], c.center));
  }
  return sum / static_cast<double>(model.size());
}

std::pair<Point2, Point2> endpoints(const ChainedModel& model) {
  const std::size_t k = model.size();
  if (k < 2) throw std::invalid_argument("endpoints: need at least 2 components");
  const auto& first = model.components.front();
  const auto& last = model.components.back();
  const Ellipse ef = ellipse_from_covariance(safe_sigma(first.sigma), first.center);
  const Ellipse el = ellipse_from_covariance(safe_sigma(last.sigma), last.center);
  const Point2 e1 = outward_hit(ef, first.center, model.curve.tangent(first.t), model.components[1].center);
  const Point2 e2 = outward_hit(el, last.center, model.curve.tangent(last.t), model.components[k - 2].center);
  return {e1, e2};
}

double total_length(const ChainedModel& model, const Point2& e1, const Point2& e2) {
  if (model.size() == 0) throw std::invalid_argument("total_length: empty model");
  const auto& first = model.components.front();
  const auto& last = model.components.back();
  return model.curve.arc_length(first.t, last.t) + distance(e1, first.center) + distance(e2, last.center);
}

ShapeEstimate assemble_estimate(BSplineCurve curve, std::vector<double> params, std::vector<Point2> centers,
                                std::vector<SymMat2> sigmas, std::vector<std::size_t> counts, double half_width,
                                double total_length, Point2 e1, Point2 e2) {
  ShapeEstimate s;
  s.curve = std::move(curve);
  s.params = std::move(params);
  s.centers = std::move(centers);
  s.sigmas = std::move(sigmas);
  s.counts = std::move(counts);
  for (std::size_t k = 0; k < s.centers.size(); ++k) {
    s.ellipses.push_back(ellipse_from_covariance(safe_sigma(s.sigmas[k]), s.centers[k]));
  }
  s.half_width = half_width;
  s.total_length = total_length;
  s.e1 = e1;
  s.e2 = e2;
  if (!s.params.empty()) s.offsets = offset_polylines(s.curve, half_width, s.params.front(), s.params.back());
  return s;
}

ShapeEstimate build_estimate(const ChainedModel& model, double width_scale) {
  const double h = estimate_half_width(model, width_scale);
  const auto [e1, e2] = endpoints(model);
  const double len = total_length(model, e1, e2);
  std::vector<double> params;
  std::vector<Point2> centers;
  std::vector<SymMat2> sigmas;
  std::vector<std::size_t> counts;
  for (const auto& c : model.components) {
    params.push_back(c.t);
    centers.push_back(c.center);
    sigmas.push_back(c.sigma);
    counts.push_back(c.count);
  }
  return assemble_estimate(model.curve, std::move(params), std::move(centers), std::move(sigmas), std::move(counts),
                           h, len, e1, e2);
}

std::vector<Point2> centerline_polyline(const ShapeEstimate& shape) {
  std::vector<Point2> poly{shape.e1};
  if (!shape.params.empty()) {
    for (double t : shape.curve.sample_parameters(shape.params.front(), shape.params.back(), 16)) {
      poly.push_back(shape.curve.eval(t));
    }
  }
  poly.push_back(shape.e2);
  return poly;
}

}  // namespace dlo
