#include "dlo/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace dlo {

double CurvatureProfile::total_length() const {
  double l = 0.0;
  for (const auto& p : pieces) l += p.length;
  return l;
}

double CurvatureProfile::curvature_at(double s) const {
  double base = 0.0;
  for (const auto& p : pieces) {
    if (s <= base + p.length || &p == &pieces.back()) {
      const double u = p.length > 0.0 ? std::clamp((s - base) / p.length, 0.0, 1.0) : 0.0;
      return p.k0 + (p.k1 - p.k0) * u;
    }
    base += p.length;
  }
  return 0.0;
}

std::vector<Point2> integrate_curvature(Point2 start, double heading, double length,
                                        const std::function<double(double)>& kappa, double ds) {
  if (!(length > 0.0) || !(ds > 0.0)) throw std::invalid_argument("integrate_curvature: length and ds must be positive");
  const int n = static_cast<int>(std::ceil(length / ds));
  const double h = length / n;
  std::vector<Point2> out{start};
  Point2 p = start;
  double theta = heading;
  for (int i = 0; i < n; ++i) {
    const double s = i * h;
    const double mid = theta + 0.5 * h * kappa(s + 0.25 * h);
    p += Point2{std::cos(mid), std::sin(mid)} * h;
    theta += h * kappa(s + 0.5 * h);
    out.push_back(p);
  }
  return out;
}

std::vector<Point2> integrate_profile(const CurvatureProfile& profile, double ds) {
  return integrate_curvature(profile.start, profile.heading, profile.total_length(),
                             [&](double s) { return profile.curvature_at(s); }, ds);
}

double polyline_length(std::span<const Point2> poly) {
  double l = 0.0;
  for (std::size_t i = 1; i < poly.size(); ++i) l += distance(poly[i - 1], poly[i]);
  return l;
}

namespace {

std::vector<double> cumulative(std::span<const Point2> poly) {
  std::vector<double> s(poly.size(), 0.0);
  for (std::size_t i = 1; i < poly.size(); ++i) s[i] = s[i - 1] + distance(poly[i - 1], poly[i]);
  return s;
}

// Point and unit tangent at arc length s.
std::pair<Point2, Point2> locate(std::span<const Point2> poly, const std::vector<double>& cum, double s) {
  const std::size_t n = poly.size();
  auto it = std::upper_bound(cum.begin(), cum.end(), s);
  std::size_t i = it == cum.begin() ? 0 : static_cast<std::size_t>(it - cum.begin()) - 1;
  i = std::min(i, n - 2);
  while (i + 2 < n && cum[i + 1] == cum[i]) ++i;
  const double seg = cum[i + 1] - cum[i];
  const double u = seg > 0.0 ? std::clamp((s - cum[i]) / seg, 0.0, 1.0) : 0.0;
  const Point2 p = poly[i] + (poly[i + 1] - poly[i]) * u;
  return {p, normalized(poly[i + 1] - poly[i])};
}

}  // namespace

std::vector<Point2> resample(std::span<const Point2> poly, double ds) {
  if (poly.size() < 2) return {poly.begin(), poly.end()};
  const auto cum = cumulative(poly);
  const double total = cum.back();
  const int n = std::max(1, static_cast<int>(std::ceil(total / ds - 1e-9)));
  std::vector<Point2> out;
  for (int i = 0; i <= n; ++i) out.push_back(locate(poly, cum, total * i / n).first);
  return out;
}

std::vector<Point2> smooth_waypoints(std::span<const Point2> waypoints, double ds) {
  if (waypoints.size() < 2) throw std::invalid_argument("smooth_waypoints: need at least 2 waypoints");
  std::vector<Point2> w(waypoints.begin(), waypoints.end());
  std::vector<Point2> ext;
  ext.push_back(w[0] * 2.0 - w[1]);
  ext.insert(ext.end(), w.begin(), w.end());
  ext.push_back(w.back() * 2.0 - w[w.size() - 2]);
  std::vector<Point2> dense;
  const auto knot = [](double t, const Point2& a, const Point2& b) {
    return t + std::max(std::sqrt(distance(a, b)), 1e-9);
  };
  for (std::size_t i = 1; i + 2 < ext.size(); ++i) {
    const Point2 p0 = ext[i - 1], p1 = ext[i], p2 = ext[i + 1], p3 = ext[i + 2];
    const double t0 = 0.0;
    const double t1 = knot(t0, p0, p1);
    const double t2 = knot(t1, p1, p2);
    const double t3 = knot(t2, p2, p3);
    const int samples = 64;
    for (int k = (i == 1 ? 0 : 1); k <= samples; ++k) {
      const double t = t1 + (t2 - t1) * k / samples;
      const Point2 a1 = p0 * ((t1 - t) / (t1 - t0)) + p1 * ((t - t0) / (t1 - t0));
      const Point2 a2 = p1 * ((t2 - t) / (t2 - t1)) + p2 * ((t - t1) / (t2 - t1));
      const Point2 a3 = p2 * ((t3 - t) / (t3 - t2)) + p3 * ((t - t2) / (t3 - t2));
      const Point2 b1 = a1 * ((t2 - t) / (t2 - t0)) + a2 * ((t - t0) / (t2 - t0));
      const Point2 b2 = a2 * ((t3 - t) / (t3 - t1)) + a3 * ((t - t1) / (t3 - t1));
      dense.push_back(b1 * ((t2 - t) / (t2 - t1)) + b2 * ((t - t1) / (t2 - t1)));
    }
  }
  return resample(dense, ds);
}

std::vector<Crossing> find_crossings(std::span<const Point2> poly, double min_gap) {
  std::vector<Crossing> out;
  if (poly.size() < 4) return out;
  const auto cum = cumulative(poly);
  for (std::size_t i = 0; i + 1 < poly.size(); ++i) {
    const Point2 a = poly[i], b = poly[i + 1];
    for (std::size_t j = i + 1; j + 1 < poly.size(); ++j) {
      if (cum[j] - cum[i + 1] <= min_gap) continue;
      const Point2 c = poly[j], d = poly[j + 1];
      if (std::max(a.x, b.x) < std::min(c.x, d.x) || std::max(c.x, d.x) < std::min(a.x, b.x) ||
          std::max(a.y, b.y) < std::min(c.y, d.y) || std::max(c.y, d.y) < std::min(a.y, b.y)) {
        continue;
      }
      const Point2 r = b - a, q = d - c;
      const double den = cross(r, q);
      if (den == 0.0) continue;
      const double u = cross(c - a, q) / den;
      const double v = cross(c - a, r) / den;
      if (u < 0.0 || u > 1.0 || v < 0.0 || v > 1.0) continue;
      const double s1 = cum[i] + u * (cum[i + 1] - cum[i]);
      const double s2 = cum[j] + v * (cum[j + 1] - cum[j]);
      const bool duplicate = std::any_of(out.begin(), out.end(), [&](const Crossing& x) {
        return std::abs(x.s1 - s1) < min_gap && std::abs(x.s2 - s2) < min_gap;
      });
      if (!duplicate) out.push_back({a + r * u, s1, s2});
    }
  }
  return out;
}

void SyntheticSpec::validate() const {
  if (!(width > 0.0)) throw std::invalid_argument("synthetic spec: width must be positive");
  if (!(spacing > 0.0)) throw std::invalid_argument("synthetic spec: spacing must be positive");
  if (!(noise_sigma >= 0.0)) throw std::invalid_argument("synthetic spec: noise sigma must be non-negative");
  if (frames.empty()) throw std::invalid_argument("synthetic spec: no frames");
  for (const auto& f : frames) {
    if (f.size() < 2) throw std::invalid_argument("synthetic spec: centerline needs at least 2 points");
  }
}

SyntheticFrame generate(const SyntheticSpec& spec, std::size_t frame, std::uint64_t seed) {
  spec.validate();
  if (frame >= spec.frames.size()) throw std::out_of_range("generate: frame index out of range");
  const auto& line = spec.frames[frame];
  const auto cum = cumulative(line);
  const double length = cum.back();
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(frame)};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> noise(0.0, 1.0);

  const int rows = static_cast<int>(std::floor(length / spec.spacing + 1e-9)) + 1;
  const int cells = std::max(1, static_cast<int>(std::lround(spec.width / spec.spacing)));
  const int cols = spec.edge_columns ? cells + 1 : cells;
  SyntheticFrame out;
  out.points.reserve(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols));
  for (int i = 0; i < rows; ++i) {
    const auto [p, tangent] = locate(line, cum, i * spec.spacing);
    const Point2 normal = perp(tangent);
    for (int j = 0; j < cols; ++j) {
      const double offset = spec.edge_columns ? -0.5 * spec.width + j * (spec.width / cells)
                                              : -0.5 * spec.width + (j + 0.5) * (spec.width / cells);
      Point2 q = p + normal * offset;
      if (spec.noise_sigma > 0.0) {
        const double nx = noise(rng);
        const double ny = noise(rng);
        q += Point2{nx, ny} * spec.noise_sigma;
      }
      out.points.push_back(q);
    }
  }
  out.truth.centerline = line;
  out.truth.width = spec.width;
  out.truth.length = length;
  out.truth.crossings = find_crossings(line, std::numbers::pi * spec.width);
  return out;
}

Preset preset_from_name(const std::string& name) {
  for (Preset p : all_presets()) {
    if (preset_name(p) == name) return p;
  }
  throw std::invalid_argument("unknown preset '" + name + "'");
}

std::string preset_name(Preset p) {
  switch (p) {
    case Preset::Straight: return "straight";
    case Preset::C: return "c";
    case Preset::S: return "s";
    case Preset::U: return "u";
    case Preset::Spiral: return "spiral";
    case Preset::Nine: return "nine";
  }
  return "straight";
}

std::vector<Preset> all_presets() {
  return {Preset::Straight, Preset::C, Preset::S, Preset::Nine, Preset::U, Preset::Spiral};
}

CurvatureProfile preset_profile(Preset p, double length) {
  constexpr double pi = std::numbers::pi;
  CurvatureProfile prof;
  switch (p) {
    case Preset::Straight:
      prof.pieces = {{length, 0.0, 0.0}};
      break;
    case Preset::C: {
      const double k = (200.0 / 180.0 * pi) / length;
      prof.pieces = {{length, k, k}};
      break;
    }
    case Preset::S: {
      const double k = pi / (0.5 * length);
      prof.pieces = {{0.5 * length, k, k}, {0.5 * length, -k, -k}};
      break;
    }
    case Preset::U: {
      const double arm = length / 3.0;
      const double k = pi / (length - 2.0 * arm);
      prof.pieces = {{arm, 0.0, 0.0}, {length - 2.0 * arm, k, k}, {arm, 0.0, 0.0}};
      break;
    }
    case Preset::Spiral: {
      // Clothoid turning through 270 degrees without touching itself.
      const double k1 = 2.0 * (1.5 * pi) / length;
      prof.pieces = {{length, 0.0, k1}};
      break;
    }
    case Preset::Nine: {
      // Straight run, a 270 degree loop, then a tail that crosses the run at right angles.
      const double r = 90.0 * length / 900.0;
      const double run = 250.0 * length / 900.0;
      const double loop = 1.5 * pi * r;
      prof.pieces = {{run, 0.0, 0.0}, {loop, 1.0 / r, 1.0 / r}, {length - run - loop, 0.0, 0.0}};
      break;
    }
  }
  return prof;
}

std::vector<Point2> preset_centerline(Preset p, double length) { return integrate_profile(preset_profile(p, length)); }

std::vector<std::vector<Point2>> morph_sequence(const CurvatureProfile& a, const CurvatureProfile& b, int frames) {
  if (frames < 1) throw std::invalid_argument("morph_sequence: need at least 1 frame");
  std::vector<std::vector<Point2>> out;
  for (int f = 0; f < frames; ++f) {
    const double alpha = frames == 1 ? 0.0 : static_cast<double>(f) / (frames - 1);
    const double la = a.total_length();
    const double lb = b.total_length();
    const double len = (1.0 - alpha) * la + alpha * lb;
    const auto kappa = [&](double s) {
      return (1.0 - alpha) * a.curvature_at(s * la / len) + alpha * b.curvature_at(s * lb / len);
    };
    const Point2 start = a.start * (1.0 - alpha) + b.start * alpha;
    const double heading = (1.0 - alpha) * a.heading + alpha * b.heading;
    out.push_back(integrate_curvature(start, heading, len, kappa));
  }
  return out;
}

std::vector<std::vector<Point2>> stretch_sequence(int frames) {
  if (frames < 1) throw std::invalid_argument("stretch_sequence: need at least 1 frame");
  constexpr double pi = std::numbers::pi;
  std::vector<std::vector<Point2>> out;
  for (int f = 0; f < frames; ++f) {
    const double phase = 2.0 * pi * f / frames;
    const double len = 800.0 + 150.0 * std::sin(phase);
    const double amp = (0.6 + 0.4 * std::cos(phase)) / 150.0;
    const auto kappa = [&](double s) { return amp * std::sin(2.0 * pi * s / len); };
    out.push_back(integrate_curvature({0.0, 0.0}, 0.0, len, kappa));
  }
  return out;
}

std::vector<std::vector<Point2>> teleport_sequence(const std::vector<Point2>& base, int frames, int at, Point2 offset) {
  std::vector<std::vector<Point2>> out;
  for (int f = 0; f < frames; ++f) {
    std::vector<Point2> line = base;
    if (f >= at) {
      for (auto& p : line) p += offset;
    }
    out.push_back(std::move(line));
  }
  return out;
}

}  // namespace dlo
