#ifndef OCCUPANCY_CLI_HPP
#define OCCUPANCY_CLI_HPP

// Command-line surface: synth, calibrate, estimate, eval.
// Exit codes: 0 success, 1 usage or configuration error, 2 data error.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "occupancy/annotate.hpp"
#include "occupancy/calibration.hpp"
#include "occupancy/frame_io.hpp"
#include "occupancy/metrics.hpp"
#include "occupancy/params.hpp"
#include "occupancy/pipeline.hpp"
#include "occupancy/synth.hpp"

namespace occupancy {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

/// Bad invocation or configuration; maps to exit code 1.
class UsageError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

inline constexpr const char* kCsvHeader = "frame_index,raw_count,final_count,ground_truth,confidence";

inline std::string csv_row(const EstimateRecord& r) {
  std::string row = std::to_string(r.frame_index) + ',' + std::to_string(r.raw_count) + ',' +
                    std::to_string(r.final_count) + ',';
  if (r.ground_truth) row += std::to_string(*r.ground_truth);
  row += ',';
  if (r.confidence) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", *r.confidence);
    row += buf;
  }
  return row;
}

inline void write_estimates_csv(const fs::path& path, std::span<const EstimateRecord> records) {
  std::ofstream out(path);
  if (!out) throw DataError(path.string() + ": cannot write");
  out << kCsvHeader << '\n';
  for (const auto& r : records) out << csv_row(r) << '\n';
}

/// Reads the estimates CSV. Ground truth and confidence columns are read when present.
inline std::vector<EstimateRecord> read_estimates_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path.string() + ": cannot open estimates CSV");
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) throw DataError(path.string() + ": unexpected CSV header");
  std::vector<EstimateRecord> records;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    if (cells.size() != 5) throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected 5 columns");
    try {
      EstimateRecord r;
      r.frame_index = std::stoi(cells[0]);
      r.raw_count = std::stoi(cells[1]);
      r.final_count = std::stoi(cells[2]);
      if (!cells[3].empty()) r.ground_truth = std::stoi(cells[3]);
      if (!cells[4].empty()) r.confidence = std::stod(cells[4]);
      records.push_back(r);
    } catch (const std::exception&) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": malformed number");
    }
  }
  return records;
}

/// Metrics over the records that carry ground truth; nulls when none do.
inline nlohmann::json metrics_json(std::span<const EstimateRecord> records) {
  const auto labeled = with_ground_truth(records);
  if (labeled.empty())
    return {{"frames", 0}, {"accuracy", nullptr}, {"excluded_zero_truth", 0}, {"mean_confidence", nullptr}};
  return to_json(aggregate(labeled));
}

inline Params load_params(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError(path.string() + ": cannot open params file");
  try {
    return nlohmann::json::parse(in).get<Params>();
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(path.string() + ": malformed params (" + e.what() + ")");
  } catch (const ParameterError& e) {
    throw UsageError(path.string() + ": " + e.what());
  }
}

inline ParamSpace load_param_space(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError(path.string() + ": cannot open param space file");
  try {
    return nlohmann::json::parse(in).get<ParamSpace>();
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(path.string() + ": malformed param space (" + e.what() + ")");
  } catch (const ParameterError& e) {
    throw UsageError(path.string() + ": " + e.what());
  }
}

inline void write_json(const fs::path& path, const nlohmann::json& j) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw DataError(path.string() + ": cannot write");
  out << j.dump(2) << '\n';
}

struct EstimateOutputs {
  std::vector<EstimateRecord> records;
  nlohmann::json metrics;
};

/// Runs a session over the manifest and writes estimates.csv, metrics.json and annotated/frame_NNNNN.ppm.
inline EstimateOutputs run_estimate(const fs::path& manifest_path, const Params& params, const fs::path& out_dir,
                                    bool annotate = true) {
  const SequenceManifest manifest = load_sequence(manifest_path);
  const auto frames = load_working_frames(manifest);
  const auto truth = truth_vector(manifest, frames.size());
  fs::create_directories(out_dir);
  if (annotate) fs::create_directories(out_dir / "annotated");

  EstimateOutputs out;
  out.records = run_session(frames, params, truth, [&](const ThermalFrame& frame, const StepOutput& step) {
    if (!annotate) return;
    char name[32];
    std::snprintf(name, sizeof name, "frame_%05d.ppm", step.record.frame_index);
    write_ppm(out_dir / "annotated" / name, annotate_frame(frame, step.segmentation, step.record, &step.difference));
  });
  out.metrics = metrics_json(out.records);
  write_estimates_csv(out_dir / "estimates.csv", out.records);
  write_json(out_dir / "metrics.json", out.metrics);
  return out;
}

/// Recomputes metrics from an estimates CSV, taking ground truth from the manifest.
inline nlohmann::json run_eval(const fs::path& csv_path, const fs::path& manifest_path) {
  const SequenceManifest manifest = load_sequence(manifest_path);
  auto records = read_estimates_csv(csv_path);
  const auto n = sampled_count(manifest);
  if (records.size() != n)
    throw DataError("eval: CSV has " + std::to_string(records.size()) + " rows, manifest samples " + std::to_string(n));
  for (auto& r : records) {
    if (r.frame_index < 0 || static_cast<std::size_t>(r.frame_index) >= n)
      throw DataError("eval: frame_index " + std::to_string(r.frame_index) + " out of range");
    r.ground_truth = truth_at(manifest, r.frame_index);
    r.confidence = r.ground_truth ? confidence(r.final_count, *r.ground_truth) : std::nullopt;
  }
  return metrics_json(records);
}

inline CalibrationReport run_calibrate(const fs::path& manifest_path, const ParamSpace& space, const fs::path& params_out,
                                       const fs::path& report_out = {}) {
  const SequenceManifest manifest = load_sequence(manifest_path);
  if (!manifest.ground_truth) throw DataError("calibrate: manifest has no ground_truth");
  CalibrationReport report = configure(space, manifest);
  write_json(params_out, report.best_params);
  if (!report_out.empty()) write_json(report_out, to_json(report));
  return report;
}

inline int cli_main(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Occupancy estimation from overhead thermal frame sequences", "occupancy"};
  app.require_subcommand(1);

  std::string manifest, params_file, out_path, space_file, report_file, scene_file, csv_file;
  bool no_annotate = false;

  auto* estimate = app.add_subcommand("estimate", "Estimate per-frame occupancy");
  estimate->add_option("manifest", manifest, "Sequence manifest (JSON)")->required();
  estimate->add_option("--params", params_file, "Params JSON")->required();
  estimate->add_option("--out", out_path, "Output directory")->required();
  estimate->add_flag("--no-annotate", no_annotate, "Skip annotated frames");

  auto* calibrate = app.add_subcommand("calibrate", "Search parameters against a labeled sequence");
  calibrate->add_option("manifest", manifest, "Labeled sequence manifest (JSON)")->required();
  calibrate->add_option("--space", space_file, "Parameter space JSON (defaults when omitted)");
  calibrate->add_option("--out", out_path, "Where to write the best params JSON")->required();
  calibrate->add_option("--report", report_file, "Where to write the calibration report JSON");

  auto* synth = app.add_subcommand("synth", "Render a synthetic scene");
  synth->add_option("scene", scene_file, "Scene JSON")->required();
  synth->add_option("--out", out_path, "Output directory")->required();

  auto* eval = app.add_subcommand("eval", "Recompute metrics from an estimates CSV");
  eval->add_option("estimates", csv_file, "estimates.csv")->required();
  eval->add_option("manifest", manifest, "Sequence manifest (JSON)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*estimate) {
      const Params params = load_params(params_file);
      const auto result = run_estimate(manifest, params, out_path, !no_annotate);
      out << result.metrics.dump(2) << '\n';
    } else if (*calibrate) {
      const ParamSpace space = space_file.empty() ? ParamSpace{} : load_param_space(space_file);
      const auto report = run_calibrate(manifest, space, out_path, report_file);
      out << nlohmann::json(report.best_params).dump(2) << '\n';
      err << "calibration accuracy " << report.best_accuracy << "% after " << report.passes << " pass(es), "
          << report.trace.size() << " evaluations\n";
    } else if (*synth) {
      const Scene scene = load_scene(scene_file);
      const auto m = render(scene, out_path);
      err << "wrote " << m.frame_paths.size() << " frames to " << out_path << '\n';
    } else if (*eval) {
      out << run_eval(csv_file, manifest).dump(2) << '\n';
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ParameterError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitOk;
}

}  // namespace occupancy

#endif  // OCCUPANCY_CLI_HPP
