#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include <lidreg/camera.hpp>
#include <lidreg/evaluation.hpp>
#include <lidreg/geometry2d.hpp>
#include <lidreg/image_extract.hpp>
#include <lidreg/point_cloud.hpp>

namespace lidreg {

enum class RoofStyle { Flat, Gable };

/// Scene description. World x points east, y north, z up, in meters; the
/// LiDAR covers [0, extent_x] x [0, extent_y] and the camera looks down on
/// the center of that area.
struct SceneSpec {
  double extent_x = 170.0;
  double extent_y = 185.0;
  int building_count = 28;
  double length_min = 11.0, length_max = 19.0;  ///< footprint major side
  double aspect_min = 1.3, aspect_max = 1.9;    ///< length / width
  double height_min = 6.0, height_max = 16.0;   ///< eave height
  double gable_fraction = 0.35;
  double gable_rise = 2.5;                      ///< ridge above the eaves
  double landmark_scale = 1.7;                  ///< building 0 is enlarged by this factor
  double separation = 7.0;                      ///< minimum gap between footprints
  int tree_count = 6;
  double tree_radius_min = 2.0, tree_radius_max = 3.5;
  double road_width = 10.0;
  double lidar_density = 2.0;  ///< points per m^2
  double lidar_noise = 0.0;    ///< sigma of z noise
  double gsd = 0.15;
  double flying_height = 1000.0;
  int image_rows = 1100;
  int image_cols = 1000;
  double tilt_omega = 0.2;   ///< degrees off nadir
  double tilt_phi = -0.15;   ///< degrees
  double kappa = 0.3;        ///< degrees
  double image_noise = 0.0;  ///< sigma per channel, 0-255 scale
  std::uint64_t seed = 1;

  /// Throws InvalidSpec on non-positive extents or densities.
  void validate() const;
};

struct Building {
  int id = 0;
  Point2 center = Point2::Zero();
  double length = 0.0;
  double width = 0.0;
  double orientation = 0.0;  ///< major axis, radians from +x
  double eave_height = 0.0;
  double ridge_height = 0.0;  ///< equals eave_height for flat roofs
  RoofStyle style = RoofStyle::Flat;
  Rgb roof_color{};
  double roof_intensity = 0.0;

  Polygon footprint() const;  ///< four corners, counterclockwise
  /// Roof surface height at (x, y), or a negative value outside the footprint.
  double roof_height(double x, double y) const;
  Eigen::Vector3d roof_centroid() const;
  /// Roof outline at eave height, one segment per side.
  std::vector<std::pair<Eigen::Vector3d, Eigen::Vector3d>> roof_edges() const;
};

struct Tree {
  Eigen::Vector3d center = Eigen::Vector3d::Zero();  ///< canopy sphere center
  double radius = 0.0;
};

/// Source labels attached to every LiDAR point: building id (>= 0), or one
/// of the negative codes below.
inline constexpr int kSourceGround = -1;
inline constexpr int kSourceRoad = -2;
inline constexpr int kSourceTree = -3;

struct GroundTruth {
  CameraPose pose;
  std::vector<Building> buildings;
  std::vector<Tree> trees;
  std::vector<int> source;  ///< one label per cloud point
};

struct Scene {
  PointCloud cloud;
  OpticalImage image;
  GroundTruth truth;
};

Scene generate_scene(const SceneSpec& spec);

/// Adds a translation of exactly `translation` meters along a uniformly
/// random direction to the center and an angular offset of norm `angle`
/// radians to (omega, phi, kappa). Internals are untouched.
CameraPose perturb_pose(const CameraPose& pose, double translation, double angle, std::uint64_t seed);

/// Drops the listed buildings' points and truth records. Throws
/// UnknownBuilding for an id not in the scene.
std::pair<PointCloud, GroundTruth> temporal_variant(const Scene& scene, const std::vector<int>& removal_ids);

/// Maps a world point to image pixels under some registration state.
using Projector = std::function<Point2(const Eigen::Vector3d&)>;

Projector pose_projector(const CameraPose& pose);

/// Roof centroids projected with the true pose (image side) and with
/// `estimate` (LiDAR side), scaled to meters by the GSD.
std::vector<CheckPointPair> centroid_check_points(const GroundTruth& truth, const Projector& estimate, double gsd);

/// Roof edges projected the same way, in meters.
std::vector<std::pair<LineSegment2D, LineSegment2D>> edge_check_lines(const GroundTruth& truth,
                                                                      const Projector& estimate, double gsd);

/// Parses `synth.*` keys (or bare names) from a key-value record.
SceneSpec parse_scene_spec(std::string_view text);
std::string format_scene_spec(const SceneSpec& spec);

/// CSV tables written next to the scene files.
std::string format_buildings_csv(const GroundTruth& truth);
std::string format_edges_csv(const GroundTruth& truth);

}  // namespace lidreg
