#pragma once

#include <istream>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "dlo/geometry.hpp"
#include "dlo/pipeline.hpp"
#include "dlo/preprocess.hpp"
#include "dlo/shape.hpp"
#include "dlo/synth.hpp"

namespace dlo {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// CSV with an optional `x_mm,y_mm` header. Throws IoError on bad rows or when no point is found.
PointCloud2 parse_csv(std::istream& in);
/// ASCII PLY; x and y of each vertex are used, other properties ignored.
PointCloud2 parse_ply(std::istream& in);
/// Dispatches on the file extension (.ply, anything else is CSV).
PointCloud2 read_point_cloud(const std::string& path);
void write_csv(std::ostream& out, const PointCloud2& points);

std::string read_text(const std::string& path);
void write_text(const std::string& path, const std::string& text);

nlohmann::ordered_json estimate_to_json(const ShapeEstimate& shape, std::optional<double> iou = std::nullopt);
ShapeEstimate estimate_from_json(const nlohmann::json& j);

/// Points gray, ellipses and spline red, offsets blue; millimeter units, y up.
std::string render_svg(const ShapeEstimate& shape, const PointCloud2& points);

/// Binary PGM (P5), occupied pixels white, top row = highest y.
void write_pgm(const std::string& path, const BinaryGrid& grid);

nlohmann::ordered_json truth_to_json(const GroundTruth& truth);
GroundTruth truth_from_json(const nlohmann::json& j);

/// Declarative generator input. Throws IoError on invalid content.
SyntheticSpec synth_spec_from_json(const nlohmann::json& j);

std::string report_csv(const TrackReport& report);
/// Per-frame outcome and estimates; runtimes are left out so the file is reproducible.
nlohmann::ordered_json report_json(const TrackReport& report, const std::vector<std::string>& frame_names);

}  // namespace dlo
