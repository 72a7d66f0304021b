#pragma once

#include <optional>
#include <string>
#include <string_view>

#include <lidreg/error.hpp>
#include <lidreg/pipeline.hpp>

namespace lidreg {

enum class LogLevel { Error = 0, Warn = 1, Info = 2, Debug = 3 };

/// Reads REGISTRAR_LOG (error, warn, info, debug); warn when unset.
LogLevel log_level_from_env();
void set_log_level(LogLevel level);
/// Writes `[level] message` to stderr when enabled.
void log_message(LogLevel level, std::string_view message);

/// Process exit status for each failure class.
inline constexpr int kExitConfig = 2;
inline constexpr int kExitIo = 3;
inline constexpr int kExitDegenerate = 4;
inline constexpr int kExitNonConvergence = 5;
int exit_code(ErrorKind kind);

/// Inputs of a run. With no cloud configured the scene is generated from the
/// synth section, which also supplies the truth.
struct Workspace {
  PointCloud cloud;
  OpticalImage image;
  std::optional<GroundTruth> truth;
  CameraPose pose_hint;
};

/// Loads the configured cloud and image, or generates them. The pose hint is
/// read from `pose_hint` when set, otherwise the truth is perturbed with the
/// configured magnitudes and seed.
Workspace load_workspace(const PipelineConfig& cfg);

// Every command writes into cfg.out and returns a short summary for stdout.
// File names are fixed so later commands can find earlier outputs.

/// cloud.txt, image.png, truth_pose.txt, buildings.csv, edges.csv, scene.txt.
std::string cmd_synth(const PipelineConfig& cfg);
/// regions.wkt.
std::string cmd_extract_lidar(const PipelineConfig& cfg);
/// segments.csv.
std::string cmd_extract_image(const PipelineConfig& cfg);
/// correspondences.txt from the pose hint.
std::string cmd_match(const PipelineConfig& cfg);
/// theta_global.txt, correspondences.txt, coarse_fit.txt and, with truth,
/// extraction_report.csv.
std::string cmd_coarse(const PipelineConfig& cfg);
/// z_image / i_image as float rasters and 16-bit PNGs, rendered with
/// theta_global.txt when present, else with the pose hint.
std::string cmd_superres(const PipelineConfig& cfg);
/// pose_field.txt, patches.csv and the z_fine / i_fine rasters. Needs
/// theta_global.txt.
std::string cmd_fine(const PipelineConfig& cfg);
/// centroids.csv, lines.csv and overlay.png from whatever stage outputs exist.
std::string cmd_eval(const PipelineConfig& cfg);
/// Synthesizes when no cloud is configured, then coarse, fine and eval.
std::string cmd_pipeline(const PipelineConfig& cfg);

}  // namespace lidreg
