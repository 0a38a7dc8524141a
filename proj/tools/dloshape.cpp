#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dlo/config.hpp"
#include "dlo/eval.hpp"
#include "dlo/io.hpp"
#include "dlo/pipeline.hpp"
#include "dlo/split_merge.hpp"
#include "dlo/synth.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kOk = 0;
constexpr int kIoError = 1;
constexpr int kInitFailure = 2;

struct CommonArgs {
  std::string config;
  std::string out;
  std::map<std::string, std::string> overrides;
};

void add_config_flags(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config, "key=value configuration file");
  for (const auto& key : dlo::PipelineConfig::keys()) {
    cmd->add_option_function<std::string>(
        "--" + key, [&args, key](const std::string& v) { args.overrides[key] = v; }, "override " + key);
  }
}

dlo::PipelineConfig resolve_config(const CommonArgs& args) {
  dlo::PipelineConfig cfg;
  if (!args.config.empty()) cfg = dlo::load_config(args.config);
  for (const auto& [k, v] : args.overrides) cfg.set(k, v);
  cfg.validate();
  return cfg;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw dlo::IoError("cannot create directory '" + dir + "': " + ec.message());
}

void dump_debug(const std::string& dir, const std::string& stem, const dlo::PointCloud2& points,
                const dlo::PipelineConfig& cfg) {
  ensure_dir(dir);
  const auto pre = dlo::preprocess(points, cfg);
  dlo::write_pgm((fs::path(dir) / (stem + "_raster.pgm")).string(), pre.raster);
  dlo::write_pgm((fs::path(dir) / (stem + "_dilated.pgm")).string(), pre.dilated);
  dlo::write_pgm((fs::path(dir) / (stem + "_skeleton.pgm")).string(), pre.skeleton);
  dlo::write_pgm((fs::path(dir) / (stem + "_linearized.pgm")).string(), pre.linearized);
}

void write_estimate(const std::string& dir, const std::string& stem, const dlo::ShapeEstimate& shape,
                    const dlo::PointCloud2& points, std::optional<double> truth_iou) {
  dlo::write_text((fs::path(dir) / (stem + ".json")).string(), dlo::estimate_to_json(shape, truth_iou).dump(2) + "\n");
  dlo::write_text((fs::path(dir) / (stem + ".svg")).string(), dlo::render_svg(shape, points));
}

std::optional<dlo::GroundTruth> load_truth(const std::string& path) {
  if (path.empty()) return std::nullopt;
  try {
    return dlo::truth_from_json(nlohmann::json::parse(dlo::read_text(path)));
  } catch (const nlohmann::json::exception& e) {
    throw dlo::IoError("truth file '" + path + "': " + e.what());
  }
}

int run_estimate(const std::string& input, const std::string& truth_path, const std::string& debug_dir,
                 const CommonArgs& args) {
  const auto cfg = resolve_config(args);
  const auto points = dlo::read_point_cloud(input);
  const auto truth = load_truth(truth_path);
  ensure_dir(args.out);
  if (!debug_dir.empty()) dump_debug(debug_dir, "estimate", points, cfg);
  const auto est = dlo::estimate(points, cfg);
  std::optional<double> iou;
  if (truth) iou = dlo::truth_iou(est.shape, *truth, cfg.eval_resolution);
  write_estimate(args.out, "estimate", est.shape, points, iou);
  return kOk;
}

int run_track(const std::string& frames_dir, const CommonArgs& args) {
  const auto cfg = resolve_config(args);
  if (!fs::is_directory(frames_dir)) throw dlo::IoError("frames directory '" + frames_dir + "' does not exist");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(frames_dir)) {
    if (!entry.is_regular_file()) continue;
    const auto ext = entry.path().extension().string();
    if (ext == ".csv" || ext == ".ply") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw dlo::IoError("no .csv or .ply frames in '" + frames_dir + "'");
  std::vector<dlo::PointCloud2> clouds;
  std::vector<std::string> names;
  for (const auto& f : files) {
    try {
      clouds.push_back(dlo::read_point_cloud(f.string()));
    } catch (const dlo::IoError& e) {
      std::cerr << "warning: " << f.string() << ": " << e.what() << "\n";
      clouds.emplace_back();
    }
    names.push_back(f.stem().string());
  }
  ensure_dir(args.out);
  const auto report = dlo::track(clouds, cfg);
  for (std::size_t i = 0; i < report.frames.size(); ++i) {
    const auto& fr = report.frames[i];
    if (!fr.estimate) continue;
    std::optional<double> iou;
    const fs::path truth_file = files[i].parent_path() / (names[i] + ".truth.json");
    if (fs::exists(truth_file)) iou = dlo::truth_iou(fr.estimate->shape, *load_truth(truth_file.string()), cfg.eval_resolution);
    write_estimate(args.out, names[i], fr.estimate->shape, clouds[i], iou);
  }
  dlo::write_text((fs::path(args.out) / "report.csv").string(), dlo::report_csv(report));
  dlo::write_text((fs::path(args.out) / "report.json").string(), dlo::report_json(report, names).dump(2) + "\n");
  if (report.failures() == report.frames.size()) {
    std::cerr << "error: every frame failed\n";
    return kInitFailure;
  }
  return kOk;
}

int run_synth(const std::string& spec_path, const std::string& out) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(dlo::read_text(spec_path));
  } catch (const nlohmann::json::exception& e) {
    throw dlo::IoError("spec '" + spec_path + "': " + e.what());
  }
  const auto spec = dlo::synth_spec_from_json(j);
  ensure_dir(out);
  for (std::size_t f = 0; f < spec.frames.size(); ++f) {
    const auto frame = dlo::generate(spec, f, spec.seed);
    char stem[32];
    std::snprintf(stem, sizeof stem, "frame_%03zu", f);
    std::ofstream csv(fs::path(out) / (std::string(stem) + ".csv"), std::ios::binary);
    if (!csv) throw dlo::IoError("cannot write frame csv in '" + out + "'");
    dlo::write_csv(csv, frame.points);
    dlo::write_text((fs::path(out) / (std::string(stem) + ".truth.json")).string(),
                    dlo::truth_to_json(frame.truth).dump(2) + "\n");
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Planar shape estimation for ropes and tubes from 2-D point clouds"};
  app.require_subcommand(1);

  CommonArgs est_args;
  std::string input, truth, debug_dir;
  auto* est = app.add_subcommand("estimate", "estimate the shape in one point cloud");
  est->add_option("--input", input, "point cloud (.csv with x_mm,y_mm or ascii .ply)")->required();
  est->add_option("--out", est_args.out, "output directory")->required();
  est->add_option("--truth", truth, "generator truth JSON; adds iou to the output");
  est->add_option("--debug-dir", debug_dir, "write preprocessing rasters as PGM here");
  add_config_flags(est, est_args);

  CommonArgs trk_args;
  std::string frames_dir;
  auto* trk = app.add_subcommand("track", "track the shape through a directory of frames");
  trk->add_option("--frames", frames_dir, "directory of frame files, processed in name order")->required();
  trk->add_option("--out", trk_args.out, "output directory")->required();
  add_config_flags(trk, trk_args);

  std::string spec_path, synth_out;
  auto* syn = app.add_subcommand("synth", "render a synthetic spec to frame CSVs and truth JSON");
  syn->add_option("--spec", spec_path, "synthetic spec JSON")->required();
  syn->add_option("--out", synth_out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kIoError;
  }

  try {
    if (*est) return run_estimate(input, truth, debug_dir, est_args);
    if (*trk) return run_track(frames_dir, trk_args);
    if (*syn) return run_synth(spec_path, synth_out);
  } catch (const dlo::InitializationError& e) {
    std::cerr << "error: initialization failed: " << e.what() << "\n";
    return kInitFailure;
  } catch (const dlo::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIoError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIoError;
  }
  return kIoError;
}
