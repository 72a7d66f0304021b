#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <lidreg/evaluation.hpp>
#include <lidreg/image_extract.hpp>
#include <lidreg/lidar_extract.hpp>
#include <lidreg/matching.hpp>
#include <lidreg/patch_registration.hpp>
#include <lidreg/pose_estimate.hpp>
#include <lidreg/superres.hpp>
#include <lidreg/synth.hpp>

namespace lidreg {

enum class MatchFilter { Gtm, Ransac };

/// Every tunable of the pipeline. The text form is a flat key-value file with
/// section prefixes, e.g. `fista.lambda = 0.001`.
struct PipelineConfig {
  std::filesystem::path cloud;
  std::filesystem::path image;
  std::filesystem::path pose_hint;
  std::filesystem::path truth;  ///< scene spec of a synthetic input; enables scoring
  std::filesystem::path out = "out";
  double gsd = 0.15;
  std::uint64_t seed = 1;

  ExtractionConfig extraction;
  MeanShiftConfig segmentation;
  RefineConfig refine;
  MatchConfig matching;
  double dominance = 1.2;
  MatchFilter filter = MatchFilter::Gtm;
  double ransac_threshold = 10.0;  ///< pixels
  int ransac_iterations = 500;
  int pose_iterations = 100;

  FistaConfig fista;       ///< rendering of registered rasters
  FistaConfig fine_fista{1e-3, 1.0 / 16.0, 1000, 1e-3};  ///< propagation inside the optimizer loop
  HistogramSpec histogram;
  PatchConfig patch;
  Objective objective = Objective::MI;
  NelderMeadConfig nelder_mead;
  double position_step = 1.0;
  double angle_step_deg = 0.2;
  int neighborhood = 9;
  int threads = 1;

  SceneSpec synth;
  double perturb_translation = 1.5;  ///< meters
  double perturb_angle_deg = 0.3;

  /// Throws InvalidConfig naming the first offending key.
  void validate() const;
  FineConfig fine_config() const;
};

/// Unknown keys are rejected so typos surface.
PipelineConfig parse_pipeline_config(std::string_view text);
std::string format_pipeline_config(const PipelineConfig& cfg);

struct LidarStage {
  std::vector<BuildingRegion> regions;
};

struct ImageStage {
  LabelGrid labels;
  std::vector<CandidateSegment> segments;
};

struct MatchStage {
  std::vector<MatchCandidate> lidar;
  std::vector<MatchCandidate> image;
  Point2 translation = Point2::Zero();
  bool guided = true;  ///< false when no dominant largest segment existed
  std::vector<Correspondence> initial;
  std::vector<Correspondence> filtered;
  std::vector<Correspondence> validated;
};

struct CoarseResult {
  LidarStage lidar;
  ImageStage image;
  MatchStage match;
  std::vector<Corr3D2D> correspondences;
  GoldStandardResult estimate;
};

LidarStage run_lidar_extraction(const PointCloud& cloud, const PipelineConfig& cfg);
ImageStage run_image_extraction(const OpticalImage& image, const PipelineConfig& cfg);
MatchStage run_matching(const LidarStage& lidar, const ImageStage& image, const CameraPose& pose_hint,
                        const PipelineConfig& cfg);
/// 3-D/2-D pairs from validated matches: region centroid at its mean elevation
/// against the image segment centroid.
std::vector<Corr3D2D> correspondence_points(const MatchStage& match, const LidarStage& lidar);

/// Extraction, matching and Gold Standard estimation. Stage failures are
/// rethrown with the stage name prefixed.
CoarseResult run_coarse(const PointCloud& cloud, const OpticalImage& image, const CameraPose& pose_hint,
                        const PipelineConfig& cfg);

struct FineResult {
  PoseField field;
  SuperResolved intensity;  ///< full-frame rendering with the smoothed poses
  SuperResolved elevation;
};

/// Patch partition, per-patch optimization and IDW rendering. `render` can be
/// switched off when only the pose field is needed.
FineResult run_fine(const PointCloud& cloud, const OpticalImage& image, const CameraPose& theta_global,
                    const PipelineConfig& cfg, bool render = true);

/// Projects through a pose field: each point uses the blended pose evaluated
/// at its pose-hint projection.
Projector field_projector(const PoseField& field);

/// Extraction and matching counts against generator truth.
struct DetectionCounts {
  int true_positive = 0;
  int false_alarm = 0;
  int missed = 0;
  double precision() const;
  double recall() const;
};

struct ExtractionReport {
  DetectionCounts lidar;
  DetectionCounts image;
  DetectionCounts matching;
};

ExtractionReport score_coarse(const CoarseResult& coarse, const GroundTruth& truth, const PointCloud& cloud);
/// CSV: stage,tp,fa,m,precision,recall.
std::string format_extraction_report(const ExtractionReport& report);

/// Alternating square tiles of the optical image and a gray raster.
RgbImage checkerboard_overlay(const RgbImage& image, const Raster& gray, int tile = 64);

}  // namespace lidreg
