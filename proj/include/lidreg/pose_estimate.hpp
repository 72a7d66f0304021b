#pragma once

#include <span>
#include <vector>

#include <lidreg/camera.hpp>

namespace lidreg {

/// Matched building center: LiDAR centroid lifted to mean roof elevation and
/// the image segment centroid.
struct Corr3D2D {
  Eigen::Vector3d world = Eigen::Vector3d::Zero();
  Eigen::Vector2d image = Eigen::Vector2d::Zero();
};

struct GoldStandardResult {
  CameraPose pose;
  ProjectionMatrix projection = ProjectionMatrix::Zero();
  double dlt_rmse = 0.0;  ///< reprojection RMSE of the linear initialization, pixels
  double rmse = 0.0;      ///< after geometric refinement, pixels
  int iterations = 0;
};

/// Normalized DLT followed by Levenberg-Marquardt minimization of the
/// reprojection error over the 11 degrees of freedom of P, then
/// decomposition into a pose.
///
/// Throws TooFewCorrespondences below six pairs and DegenerateConfiguration
/// when the DLT system is rank-deficient (coplanar or collinear world points).
GoldStandardResult gold_standard(std::span<const Corr3D2D> correspondences, int max_iterations = 100);

/// Root-mean-square reprojection distance in pixels.
double reprojection_rmse(const CameraPose& pose, std::span<const Corr3D2D> correspondences);
double reprojection_rmse(const ProjectionMatrix& P, std::span<const Corr3D2D> correspondences);

}  // namespace lidreg
