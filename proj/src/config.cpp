#include "dlo/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace dlo {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size() || !std::isfinite(out)) {
    throw ConfigError(key, "config key '" + key + "': not a number: '" + v + "'");
  }
  return out;
}

long long to_int(const std::string& key, const std::string& v) {
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) {
    throw ConfigError(key, "config key '" + key + "': not an integer: '" + v + "'");
  }
  return out;
}

void require(bool ok, const char* key, const char* msg) {
  if (!ok) throw ConfigError(key, std::string("config key '") + key + "': " + msg);
}

}  // namespace

const std::vector<std::string>& PipelineConfig::keys() {
  static const std::vector<std::string> k = {"resolution", "dilation_radius",    "gamma",          "segment_bound",
                                             "degree",     "n_ctrl",             "max_iter",       "inner_iter",
                                             "reinit_iou", "seed",               "intersection_window",
                                             "eval_resolution", "width_scale"};
  return k;
}

void PipelineConfig::set(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  if (key == "resolution") {
    resolution = to_double(key, v);
  } else if (key == "dilation_radius") {
    dilation_radius = static_cast<int>(to_int(key, v));
  } else if (key == "gamma") {
    gamma = to_double(key, v);
  } else if (key == "segment_bound") {
    segment_bound = to_double(key, v);
  } else if (key == "degree") {
    degree = static_cast<int>(to_int(key, v));
  } else if (key == "n_ctrl") {
    n_ctrl = static_cast<int>(to_int(key, v));
  } else if (key == "max_iter") {
    max_iter = static_cast<int>(to_int(key, v));
  } else if (key == "inner_iter") {
    inner_iter = static_cast<int>(to_int(key, v));
  } else if (key == "reinit_iou") {
    reinit_iou = to_double(key, v);
  } else if (key == "seed") {
    const long long s = to_int(key, v);
    require(s >= 0, "seed", "must be non-negative");
    seed = static_cast<std::uint64_t>(s);
  } else if (key == "intersection_window") {
    intersection_window = static_cast<int>(to_int(key, v));
  } else if (key == "eval_resolution") {
    eval_resolution = to_double(key, v);
  } else if (key == "width_scale") {
    width_scale = to_double(key, v);
  } else {
    throw ConfigError(key, "unknown config key '" + key + "'");
  }
}

void PipelineConfig::validate() const {
  require(resolution > 0.0, "resolution", "must be positive");
  require(dilation_radius >= 1, "dilation_radius", "must be >= 1");
  require(gamma > 0.0, "gamma", "must be positive");
  require(segment_bound > 0.0, "segment_bound", "must be positive");
  require(degree >= 1, "degree", "must be >= 1");
  require(n_ctrl >= degree + 1, "n_ctrl", "must be >= degree + 1");
  require(max_iter >= 1, "max_iter", "must be >= 1");
  require(inner_iter >= 1, "inner_iter", "must be >= 1");
  require(reinit_iou > 0.0 && reinit_iou <= 1.0, "reinit_iou", "must be in (0, 1]");
  require(intersection_window >= 1, "intersection_window", "must be >= 1");
  require(eval_resolution > 0.0, "eval_resolution", "must be positive");
  require(width_scale > 0.0, "width_scale", "must be positive");
}

PipelineConfig parse_config(std::istream& in, PipelineConfig base) {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(t, "config line " + std::to_string(lineno) + ": expected key=value, got '" + t + "'");
    }
    base.set(trim(t.substr(0, eq)), t.substr(eq + 1));
  }
  base.validate();
  return base;
}

PipelineConfig load_config(const std::string& path, PipelineConfig base) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
  return parse_config(in, base);
}

}  // namespace dlo
