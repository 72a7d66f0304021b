#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <lidreg/camera.hpp>
#include <lidreg/geometry2d.hpp>
#include <lidreg/grid.hpp>
#include <lidreg/nelder_mead.hpp>
#include <lidreg/point_cloud.hpp>
#include <lidreg/similarity.hpp>
#include <lidreg/superres.hpp>

namespace lidreg {

enum class Objective { MI, NCMI };

Objective parse_objective(std::string_view text);
std::string to_string(Objective objective);

struct PatchConfig {
  int width = 500;   ///< columns
  int height = 550;  ///< rows
  int margin = 50;   ///< px added around each patch when selecting its points

  bool valid() const { return width >= 1 && height >= 1 && margin >= 0; }
};

struct Patch {
  int index = 0;
  int grid_row = 0;
  int grid_col = 0;
  Window window;
  Point2 center = Point2::Zero();   ///< (col, row) of the window center
  std::vector<std::size_t> points;  ///< cloud indices selected with the pose hint
  CameraPose theta_star;
  double initial_value = 0.0;
  double value = 0.0;
  int evaluations = 0;
  bool flagged = false;  ///< optimization skipped or failed; theta_star is the hint
  std::string failure;   ///< error text when the optimizer threw
};

struct PatchGrid {
  Frame frame;
  int grid_rows = 0;
  int grid_cols = 0;
  PatchConfig config;
  CameraPose pose_hint;
  std::vector<Patch> patches;  ///< row-major

  const Patch& at(int grid_row, int grid_col) const {
    return patches[static_cast<std::size_t>(grid_row) * grid_cols + grid_col];
  }
  /// Grid cell containing a pixel position; positions outside the frame clamp
  /// to the nearest border cell.
  std::pair<int, int> cell_of(const Point2& p) const;
};

/// Row-major tiling; the right and bottom remainders widen the last column
/// and row of patches. Throws FrameTooSmall when the frame cannot hold one
/// full patch.
PatchGrid partition_patches(const Frame& frame, const PointCloud& cloud, const CameraPose& pose_hint,
                            const PatchConfig& cfg = {});

struct FineConfig {
  Objective objective = Objective::MI;
  HistogramSpec histogram;
  FistaConfig fista;
  NelderMeadConfig nelder_mead;
  double position_step = 1.0;              ///< initial simplex step, meters
  double angle_step = 0.2 * 3.14159265358979323846 / 180.0;  ///< radians
  int threads = 1;
};

/// Similarity between the rendered patch and the image window. MI compares
/// the i-image with luma; NCMI couples the i-image, the z-image and luma.
/// Returns 0 when no point lands in the window or the entropy degenerates.
double evaluate_objective(const PointCloud& cloud, std::span<const std::size_t> points, const CameraPose& pose,
                          const Window& window, const Raster& luma_window, const FineConfig& cfg);

struct PatchOutcome {
  CameraPose theta_star;
  double initial_value = 0.0;
  double value = 0.0;
  int evaluations = 0;
  bool flagged = false;
};

/// Maximizes the objective over X0, Y0, Z0, omega, phi, kappa with the
/// internals frozen. `luma` is the full image frame.
PatchOutcome optimize_patch(const PointCloud& cloud, const Patch& patch, const CameraPose& theta_init,
                            const Raster& luma, const FineConfig& cfg);

/// Optimizes every patch, using up to cfg.threads workers, and fills the
/// per-patch results in place.
void optimize_patches(PatchGrid& grid, const PointCloud& cloud, const Raster& luma, const FineConfig& cfg);

struct PoseField {
  PatchGrid grid;
  int neighborhood = 9;  ///< odd square: 1, 9, 25, ...
};

/// Inverse-squared-distance blend of the poses of the patches in the block
/// around p's patch. Returns a patch's pose exactly at its center.
CameraPose idw_pose(const Point2& p, const PoseField& field);

/// Every point is projected with the blended pose evaluated where the pose
/// hint puts it, then the sparse raster is propagated.
SuperResolved render_registered(const PointCloud& cloud, const PoseField& field, const Window& window,
                                Channel channel, const FistaConfig& cfg);

/// CSV: patch,correspondences,initial,final,gain_percent,flagged.
std::string format_patch_report(const PatchGrid& grid, const std::vector<Point2>& correspondence_pixels);

/// Text serialization of a pose field (grid layout plus every patch pose).
std::string format_pose_field(const PoseField& field);
PoseField parse_pose_field(std::string_view text);

}  // namespace lidreg
