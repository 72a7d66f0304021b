#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include <Eigen/Core>

namespace lidreg {

/// Point classification codes as stored in the text and binary formats.
enum class PointClass : std::uint8_t {
  Unclassified = 0,
  Ground = 1,
  LowVegetation = 2,
  MediumVegetation = 3,
  HighVegetation = 4,
  Building = 5,
};

struct LidarPoint {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double intensity = 0.0;  ///< in [0, 255]
  PointClass cls = PointClass::Unclassified;

  Eigen::Vector3d position() const { return {x, y, z}; }
  bool operator==(const LidarPoint&) const = default;
};

struct Bounds3 {
  Eigen::Vector3d min = Eigen::Vector3d::Zero();
  Eigen::Vector3d max = Eigen::Vector3d::Zero();
};

struct PointCloud {
  std::vector<LidarPoint> points;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  /// Axis-aligned bounds; zero box for an empty cloud.
  Bounds3 bounds() const;
  /// Finite coordinates and intensities within [0, 255].
  bool valid() const;

  bool operator==(const PointCloud&) const = default;
};

/// Text format: one `x y z intensity class` record per line.
PointCloud read_cloud_text(const std::filesystem::path& path);
void write_cloud_text(const std::filesystem::path& path, const PointCloud& cloud);

/// Binary format: little-endian records of 4 x float64 (x, y, z, intensity)
/// followed by a uint8 class code.
PointCloud read_cloud_binary(const std::filesystem::path& path);
void write_cloud_binary(const std::filesystem::path& path, const PointCloud& cloud);

/// Dispatches on the extension: `.bin` is binary, anything else text.
PointCloud read_cloud(const std::filesystem::path& path);
void write_cloud(const std::filesystem::path& path, const PointCloud& cloud);

}  // namespace lidreg
