#pragma once

#include <utility>
#include <vector>

#include <lidreg/camera.hpp>
#include <lidreg/grid.hpp>
#include <lidreg/point_cloud.hpp>

namespace lidreg {

enum class Channel { Elevation, Intensity };

/// Sparse image: transferred LiDAR values where `mask` is set, zero elsewhere.
struct SparseRaster {
  Raster values;
  BinaryGrid mask;

  const Frame& frame() const { return values.frame(); }
  std::size_t transferred() const;
};

struct FistaConfig {
  double lambda = 1e-3;        ///< L1 weight
  double gamma = 1.0 / 16.0;   ///< constant step size, at most 1 / kSsdgLipschitz
  int k_max = 1000;
  double epsilon = 1e-4;       ///< RMS per-pixel iterate change that stops the loop

  bool valid() const;
};

/// Lipschitz constant of the SSDG gradient for forward differences.
inline constexpr double kSsdgLipschitz = 16.0;

/// Projects every point through the pose into the window. A pixel hit by
/// several points keeps the one nearest the camera. Intensities are stored
/// normalized to [0, 1]. Throws NoVisiblePoints when nothing lands inside.
SparseRaster transfer_values(const PointCloud& cloud, const CameraPose& pose, const Window& window, Channel channel);
SparseRaster transfer_values(const PointCloud& cloud, std::span<const std::size_t> subset, const CameraPose& pose,
                             const Window& window, Channel channel);

/// Per-point projection matrices; used when every point carries its own pose.
SparseRaster transfer_values(const PointCloud& cloud, std::span<const ProjectionMatrix> projections,
                             const Window& window, Channel channel);

/// Soft threshold: sign(x) * max(|x| - alpha, 0).
inline double shrink(double x, double alpha) {
  const double m = (x < 0 ? -x : x) - alpha;
  return m > 0 ? (x < 0 ? -m : m) : 0.0;
}

/// Sum of squared forward differences along rows and columns (replicate
/// boundary, so the last difference is zero) and its exact gradient.
std::pair<double, Raster> ssdg_value_and_gradient(const Raster& raster);

/// Full objective: SSDG + lambda * L1.
double fista_objective(const Raster& raster, double lambda);

struct FistaResult {
  Raster dense;
  int iterations = 0;
  bool converged = false;
  std::vector<double> change_history;  ///< RMS iterate change per iteration
};

/// FISTA with constant step on SSDG + lambda * L1, updating only pixels
/// without a transferred value. Transferred pixels are copied to the output
/// unchanged.
FistaResult propagate_fista(const SparseRaster& sparse, const FistaConfig& cfg);

struct SuperResolved {
  Raster dense;  ///< meters for elevation, [0, 255] for intensity
  SparseRaster sparse;
  int iterations = 0;
  bool converged = false;
};

/// Value transfer followed by propagation; intensities are rescaled back to
/// [0, 255] afterwards.
SuperResolved super_resolve(const PointCloud& cloud, const CameraPose& pose, const Window& window, Channel channel,
                            const FistaConfig& cfg);
SuperResolved super_resolve(const PointCloud& cloud, std::span<const std::size_t> subset, const CameraPose& pose,
                            const Window& window, Channel channel, const FistaConfig& cfg);
SuperResolved densify(SparseRaster sparse, Channel channel, const FistaConfig& cfg);

}  // namespace lidreg
