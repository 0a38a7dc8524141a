#pragma once

#include <cstdint>
#include <istream>
#include <stdexcept>
#include <string>
#include <vector>

namespace dlo {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& key, const std::string& what) : std::runtime_error(what), key_(key) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

struct PipelineConfig {
  double resolution = 2.0;       // mm per pixel for preprocessing and measurement masks
  int dilation_radius = 1;       // px
  double gamma = 20.0;           // mm
  double segment_bound = 30.0;   // mm (H)
  int degree = 2;
  int n_ctrl = 13;
  int max_iter = 3;
  int inner_iter = 5;
  double reinit_iou = 0.5;
  std::uint64_t seed = 1;
  int intersection_window = 5;   // px, half-size of the square window around a junction
  double eval_resolution = 1.0;  // mm per pixel for generator-truth masks
  double width_scale = 3.0;      // ellipse scale used for the half-width

  /// Throws ConfigError naming the first offending field.
  void validate() const;
  /// Sets one field from text. Throws ConfigError for unknown keys or bad values.
  void set(const std::string& key, const std::string& value);

  static const std::vector<std::string>& keys();
};

/// Parses `key = value` lines; blank lines and lines starting with '#' are skipped.
PipelineConfig parse_config(std::istream& in, PipelineConfig base = {});
PipelineConfig load_config(const std::string& path, PipelineConfig base = {});

}  // namespace dlo
