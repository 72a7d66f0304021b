#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <string_view>

#include <Eigen/Core>

namespace lidreg {

/// Finite projective camera: five internal and six external parameters.
///
/// Rotation convention: R = Rz(kappa) * Ry(phi) * Rx(omega), right-handed,
/// counterclockwise-positive elementary rotations. Angles in radians, the
/// camera center in world meters, internals in pixels.
struct CameraPose {
  double alpha_x = 1.0;
  double alpha_y = 1.0;
  double skew = 0.0;
  double px = 0.0;
  double py = 0.0;
  double x0 = 0.0;
  double y0 = 0.0;
  double z0 = 0.0;
  double omega = 0.0;
  double phi = 0.0;
  double kappa = 0.0;

  static constexpr std::size_t kParameterCount = 11;
  static constexpr std::array<std::string_view, kParameterCount> kNames = {
      "alpha_x", "alpha_y", "s", "p_x", "p_y", "X0", "Y0", "Z0", "omega", "phi", "kappa"};

  std::array<double, kParameterCount> to_array() const;
  static CameraPose from_array(const std::array<double, kParameterCount>& values);

  /// True when alpha_x, alpha_y > 0 and every parameter is finite.
  bool valid() const;

  Eigen::Vector3d center() const { return {x0, y0, z0}; }

  bool operator==(const CameraPose&) const = default;
};

using ProjectionMatrix = Eigen::Matrix<double, 3, 4>;

Eigen::Matrix3d rotation_from_angles(double omega, double phi, double kappa);
Eigen::Matrix3d calibration_matrix(const CameraPose& pose);

/// P = K R [I | -C].
ProjectionMatrix build_camera_matrix(const CameraPose& pose);

/// Dehomogenized projection (x = column, y = row). Throws DegenerateProjection
/// when the point lies on the principal plane.
Eigen::Vector2d project_point(const ProjectionMatrix& P, const Eigen::Vector3d& point);

/// Depth-ordered homogeneous coordinate: positive in front of the camera,
/// proportional to the distance along the principal axis.
double point_depth(const ProjectionMatrix& P, const Eigen::Vector3d& point);

/// Inverse of build_camera_matrix up to projective scale and sign. K has a
/// positive diagonal and unit (2,2) entry; angles follow the Rz Ry Rx
/// convention with phi in [-pi/2, pi/2] and omega, kappa in (-pi, pi].
CameraPose decompose_projection(const ProjectionMatrix& P);

/// Pose whose image is translated by (-dcol, -drow) pixels, i.e. the same
/// camera expressed in the coordinates of a window starting at (drow, dcol).
CameraPose shift_principal_point(const CameraPose& pose, double dcol, double drow);

/// Wraps an angle into (-pi, pi].
double wrap_angle(double angle);

/// Flat `name = value` text record, one parameter per line.
std::string format_pose(const CameraPose& pose);
CameraPose parse_pose(std::string_view text);
void write_pose(const std::filesystem::path& path, const CameraPose& pose);
CameraPose read_pose(const std::filesystem::path& path);

}  // namespace lidreg
