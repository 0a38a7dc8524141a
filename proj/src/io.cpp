#include "dlo/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

namespace dlo {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& s, double& out) {
  const std::string t = trim(s);
  if (t.empty()) return false;
  const char* first = t.data();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, t.data() + t.size(), out);
  return ec == std::errc{} && ptr == t.data() + t.size() && std::isfinite(out);
}

std::string ext_of(const std::string& path) {
  const auto dot = path.find_last_of('.');
  if (dot == std::string::npos) return {};
  std::string e = path.substr(dot + 1);
  for (auto& c : e) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return e;
}

}  // namespace

PointCloud2 parse_csv(std::istream& in) {
  PointCloud2 pts;
  std::string line;
  int lineno = 0;
  bool first_content = true;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto comma = t.find(',');
    double x = 0.0, y = 0.0;
    bool ok = comma != std::string::npos;
    if (ok) {
      const auto comma2 = t.find(',', comma + 1);
      ok = parse_double(t.substr(0, comma), x) &&
           parse_double(t.substr(comma + 1, comma2 == std::string::npos ? std::string::npos : comma2 - comma - 1), y);
    }
    if (!ok) {
      if (first_content) {
        first_content = false;
        continue;  // header
      }
      throw IoError("csv line " + std::to_string(lineno) + ": expected two numbers, got '" + t + "'");
    }
    first_content = false;
    pts.push_back({x, y});
  }
  if (pts.empty()) throw IoError("empty point cloud");
  return pts;
}

PointCloud2 parse_ply(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != "ply") throw IoError("ply: missing magic line");
  std::size_t vertices = 0;
  std::vector<std::string> props;
  bool in_vertex = false;
  bool ascii = false;
  while (std::getline(in, line)) {
    std::istringstream ss(trim(line));
    std::string word;
    ss >> word;
    if (word == "format") {
      std::string fmt;
      ss >> fmt;
      ascii = fmt == "ascii";
    } else if (word == "element") {
      std::string name;
      ss >> name;
      in_vertex = name == "vertex";
      if (in_vertex) ss >> vertices;
    } else if (word == "property" && in_vertex) {
      std::string type, name;
      ss >> type >> name;
      props.push_back(name);
    } else if (word == "end_header") {
      break;
    }
  }
  if (!ascii) throw IoError("ply: only ascii format is supported");
  const auto ix = std::find(props.begin(), props.end(), "x");
  const auto iy = std::find(props.begin(), props.end(), "y");
  if (ix == props.end() || iy == props.end()) throw IoError("ply: vertex element lacks x/y");
  const std::size_t cx = static_cast<std::size_t>(ix - props.begin());
  const std::size_t cy = static_cast<std::size_t>(iy - props.begin());
  PointCloud2 pts;
  for (std::size_t v = 0; v < vertices; ++v) {
    if (!std::getline(in, line)) throw IoError("ply: truncated vertex list");
    std::istringstream ss(line);
    std::vector<std::string> fields;
    std::string f;
    while (ss >> f) fields.push_back(f);
    double x = 0.0, y = 0.0;
    if (fields.size() < props.size() || !parse_double(fields[cx], x) || !parse_double(fields[cy], y)) {
      throw IoError("ply: bad vertex line '" + trim(line) + "'");
    }
    pts.push_back({x, y});
  }
  if (pts.empty()) throw IoError("empty point cloud");
  return pts;
}

PointCloud2 read_point_cloud(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  return ext_of(path) == "ply" ? parse_ply(in) : parse_csv(in);
}

void write_csv(std::ostream& out, const PointCloud2& points) {
  out << "x_mm,y_mm\n";
  char buf[64];
  for (const auto& p : points) {
    std::snprintf(buf, sizeof buf, "%.6f,%.6f\n", p.x, p.y);
    out << buf;
  }
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << text;
  if (!out) throw IoError("write failed for '" + path + "'");
}

namespace {

nlohmann::ordered_json xy(const Point2& p) { return nlohmann::ordered_json::array({p.x, p.y}); }

Point2 point_from(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw IoError("expected [x, y], got " + j.dump());
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

const nlohmann::json& field(const nlohmann::json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw IoError(std::string("missing field '") + key + "'");
  return j.at(key);
}

}  // namespace

nlohmann::ordered_json estimate_to_json(const ShapeEstimate& shape, std::optional<double> iou) {
  nlohmann::ordered_json j;
  j["degree"] = shape.curve.degree();
  j["knots"] = shape.curve.knots();
  auto ctrl = nlohmann::ordered_json::array();
  for (const auto& p : shape.curve.control_points()) ctrl.push_back(xy(p));
  j["control_points"] = ctrl;
  auto comps = nlohmann::ordered_json::array();
  for (std::size_t k = 0; k < shape.centers.size(); ++k) {
    nlohmann::ordered_json c;
    c["t"] = shape.params[k];
    c["center"] = xy(shape.centers[k]);
    c["sigma"] = {shape.sigmas[k].xx, shape.sigmas[k].xy, shape.sigmas[k].yy};
    c["L"] = shape.counts[k];
    comps.push_back(c);
  }
  j["components"] = comps;
  j["half_width_mm"] = shape.half_width;
  j["length_mm"] = shape.total_length;
  j["endpoints"] = {xy(shape.e1), xy(shape.e2)};
  if (iou) j["iou"] = *iou;
  return j;
}

ShapeEstimate estimate_from_json(const nlohmann::json& j) {
  try {
    const int degree = field(j, "degree").get<int>();
    const auto knots = field(j, "knots").get<std::vector<double>>();
    std::vector<Point2> ctrl;
    for (const auto& p : field(j, "control_points")) ctrl.push_back(point_from(p));
    std::vector<double> params;
    std::vector<Point2> centers;
    std::vector<SymMat2> sigmas;
    std::vector<std::size_t> counts;
    for (const auto& c : field(j, "components")) {
      params.push_back(field(c, "t").get<double>());
      centers.push_back(point_from(field(c, "center")));
      const auto s = field(c, "sigma").get<std::vector<double>>();
      if (s.size() != 3) throw IoError("sigma must have 3 entries");
      sigmas.push_back({s[0], s[1], s[2]});
      counts.push_back(field(c, "L").get<std::size_t>());
    }
    const auto& ends = field(j, "endpoints");
    if (!ends.is_array() || ends.size() != 2) throw IoError("endpoints must hold 2 points");
    return assemble_estimate(BSplineCurve(degree, std::move(ctrl), knots), std::move(params), std::move(centers),
                             std::move(sigmas), std::move(counts), field(j, "half_width_mm").get<double>(),
                             field(j, "length_mm").get<double>(), point_from(ends[0]), point_from(ends[1]));
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("estimate json: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw IoError(std::string("estimate json: ") + e.what());
  }
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  std::string s = buf;
  if (s == "-0.000") s = "0.000";
  return s;
}

std::string polyline_svg(const std::vector<Point2>& pts, const char* color, double width) {
  std::string s = "<polyline fill=\"none\" stroke=\"";
  s += color;
  s += "\" stroke-width=\"" + fmt(width) + "\" points=\"";
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i) s += ' ';
    s += fmt(pts[i].x) + "," + fmt(-pts[i].y);
  }
  s += "\"/>\n";
  return s;
}

}  // namespace

std::string render_svg(const ShapeEstimate& shape, const PointCloud2& points) {
  std::vector<Point2> extent = points;
  for (const auto& e : shape.ellipses) {
    extent.push_back({e.center.x - e.semi_major, e.center.y - e.semi_major});
    extent.push_back({e.center.x + e.semi_major, e.center.y + e.semi_major});
  }
  extent.push_back(shape.e1);
  extent.push_back(shape.e2);
  double minx = extent[0].x, maxx = extent[0].x, miny = extent[0].y, maxy = extent[0].y;
  for (const auto& p : extent) {
    minx = std::min(minx, p.x);
    maxx = std::max(maxx, p.x);
    miny = std::min(miny, p.y);
    maxy = std::max(maxy, p.y);
  }
  const double pad = 10.0;
  std::string s = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  const double w = maxx - minx + 2 * pad;
  const double h = maxy - miny + 2 * pad;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(w) + "mm\" height=\"" + fmt(h) +
       "mm\" viewBox=\"" + fmt(minx - pad) + " " + fmt(-maxy - pad) + " " + fmt(w) + " " + fmt(h) + "\">\n";
  s += "<g fill=\"#999999\">\n";
  for (const auto& p : points) s += "<circle cx=\"" + fmt(p.x) + "\" cy=\"" + fmt(-p.y) + "\" r=\"0.6\"/>\n";
  s += "</g>\n<g fill=\"none\" stroke=\"#d62728\" stroke-width=\"0.6\">\n";
  for (const auto& e : shape.ellipses) {
    const double deg = -e.orientation * 180.0 / std::numbers::pi;
    s += "<ellipse cx=\"" + fmt(e.center.x) + "\" cy=\"" + fmt(-e.center.y) + "\" rx=\"" + fmt(e.semi_major) +
         "\" ry=\"" + fmt(e.semi_minor) + "\" transform=\"rotate(" + fmt(deg) + " " + fmt(e.center.x) + " " +
         fmt(-e.center.y) + ")\"/>\n";
  }
  s += "</g>\n";
  s += polyline_svg(centerline_polyline(shape), "#d62728", 1.2);
  s += polyline_svg(shape.offsets.left, "#1f77b4", 0.8);
  s += polyline_svg(shape.offsets.right, "#1f77b4", 0.8);
  for (const auto& e : {shape.e1, shape.e2}) {
    s += "<circle cx=\"" + fmt(e.x) + "\" cy=\"" + fmt(-e.y) + "\" r=\"2.5\" fill=\"#d62728\"/>\n";
  }
  s += "</svg>\n";
  return s;
}

void write_pgm(const std::string& path, const BinaryGrid& grid) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << "P5\n" << grid.width() << ' ' << grid.height() << "\n255\n";
  for (int r = grid.height() - 1; r >= 0; --r) {
    for (int c = 0; c < grid.width(); ++c) out.put(grid.at(c, r) ? static_cast<char>(255) : static_cast<char>(0));
  }
}

nlohmann::ordered_json truth_to_json(const GroundTruth& truth) {
  nlohmann::ordered_json j;
  j["width_mm"] = truth.width;
  j["length_mm"] = truth.length;
  auto line = nlohmann::ordered_json::array();
  for (const auto& p : truth.centerline) line.push_back(xy(p));
  j["centerline"] = line;
  auto cs = nlohmann::ordered_json::array();
  for (const auto& c : truth.crossings) {
    nlohmann::ordered_json o;
    o["point"] = xy(c.point);
    o["s1"] = c.s1;
    o["s2"] = c.s2;
    cs.push_back(o);
  }
  j["crossings"] = cs;
  return j;
}

GroundTruth truth_from_json(const nlohmann::json& j) {
  try {
    GroundTruth t;
    t.width = field(j, "width_mm").get<double>();
    t.length = field(j, "length_mm").get<double>();
    for (const auto& p : field(j, "centerline")) t.centerline.push_back(point_from(p));
    for (const auto& c : field(j, "crossings")) {
      t.crossings.push_back({point_from(field(c, "point")), field(c, "s1").get<double>(), field(c, "s2").get<double>()});
    }
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("truth json: ") + e.what());
  }
}

namespace {

std::vector<Point2> centerline_from(const nlohmann::json& f) {
  std::vector<Point2> line;
  if (f.contains("preset")) {
    const double len = f.value("length_mm", 900.0);
    if (!(len > 0.0)) throw IoError("length_mm must be positive");
    line = preset_centerline(preset_from_name(f.at("preset").get<std::string>()), len);
  } else if (f.contains("waypoints")) {
    std::vector<Point2> wp;
    for (const auto& p : f.at("waypoints")) wp.push_back(point_from(p));
    line = smooth_waypoints(wp);
  } else {
    throw IoError("frame needs 'preset' or 'waypoints'");
  }
  if (f.contains("offset")) {
    const Point2 off = point_from(f.at("offset"));
    for (auto& p : line) p += off;
  }
  return line;
}

}  // namespace

SyntheticSpec synth_spec_from_json(const nlohmann::json& j) {
  try {
    if (!j.is_object()) throw IoError("synthetic spec must be a JSON object");
    SyntheticSpec spec;
    spec.width = j.value("width_mm", spec.width);
    spec.spacing = j.value("spacing_mm", spec.spacing);
    spec.noise_sigma = j.value("noise_sigma_mm", spec.noise_sigma);
    spec.edge_columns = j.value("edge_columns", spec.edge_columns);
    spec.seed = j.value("seed", spec.seed);
    if (j.contains("morph")) {
      const auto& m = j.at("morph");
      const auto a = preset_profile(preset_from_name(field(m, "from").get<std::string>()));
      const auto b = preset_profile(preset_from_name(field(m, "to").get<std::string>()));
      spec.frames = morph_sequence(a, b, field(m, "frames").get<int>());
    } else if (j.contains("stretch")) {
      spec.frames = stretch_sequence(field(j.at("stretch"), "frames").get<int>());
    } else if (j.contains("frames")) {
      for (const auto& f : j.at("frames")) spec.frames.push_back(centerline_from(f));
    } else {
      spec.frames.push_back(centerline_from(j));
    }
    spec.validate();
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("synthetic spec: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw IoError(std::string("synthetic spec: ") + e.what());
  }
}

std::string report_csv(const TrackReport& report) {
  std::string s = "frame,iou,ms,reinit\n";
  char buf[128];
  for (std::size_t i = 0; i < report.frames.size(); ++i) {
    const auto& f = report.frames[i];
    std::snprintf(buf, sizeof buf, "%zu,%.6f,%.3f,%d\n", i, f.iou, f.ms, f.reinitialized ? 1 : 0);
    s += buf;
  }
  return s;
}

nlohmann::ordered_json report_json(const TrackReport& report, const std::vector<std::string>& frame_names) {
  nlohmann::ordered_json j;
  auto frames = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < report.frames.size(); ++i) {
    const auto& f = report.frames[i];
    nlohmann::ordered_json o;
    o["frame"] = i;
    if (i < frame_names.size()) o["name"] = frame_names[i];
    o["ok"] = f.ok;
    o["reinitialized"] = f.reinitialized;
    o["iou"] = f.iou;
    o["overlap_prev"] = f.overlap_prev;
    if (!f.ok) o["error"] = f.error;
    if (f.estimate) o["estimate"] = estimate_to_json(f.estimate->shape);
    frames.push_back(o);
  }
  j["frames"] = frames;
  j["mean_iou"] = report.mean_iou();
  j["reinit_count"] = report.reinit_count();
  j["failures"] = report.failures();
  return j;
}

}  // namespace dlo
