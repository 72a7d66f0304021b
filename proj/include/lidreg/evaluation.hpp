#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <lidreg/geometry2d.hpp>

namespace lidreg {

struct CheckPointPair {
  Point2 image = Point2::Zero();  ///< location on the optical image
  Point2 lidar = Point2::Zero();  ///< corresponding location on the z-image
};

struct LineSegment2D {
  Point2 a = Point2::Zero();
  Point2 b = Point2::Zero();
};

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  ///< population standard deviation
};

/// Throws EmptySet for an empty list.
MeanStd mean_std(const std::vector<double>& values);

MeanStd centroid_discrepancy(const std::vector<CheckPointPair>& pairs);

/// (before - after) / before * 100.
double discrepancy_gain(double before, double after);

/// Mean of the distances from p's endpoints to segment q.
double peng_line_distance(const LineSegment2D& p, const LineSegment2D& q);

/// Hausdorff distance between two segments. The farthest point of one
/// segment from the other is always an endpoint, so four endpoint distances
/// suffice.
double hausdorff_segment_distance(const LineSegment2D& p, const LineSegment2D& q);

MeanStd pair_line_report(const std::vector<std::pair<LineSegment2D, LineSegment2D>>& pairs);

/// `ax ay bx by ax' ay' bx' by'` per line; commas or whitespace separate.
std::vector<std::pair<LineSegment2D, LineSegment2D>> parse_segment_pairs(std::string_view text);
std::string format_segment_pairs(const std::vector<std::pair<LineSegment2D, LineSegment2D>>& pairs);

struct StageRow {
  std::string stage;
  MeanStd stats;
};

/// CSV with columns stage,mean_m,std_m,gain_percent; gain relative to the
/// first row.
std::string format_stage_table(const std::vector<StageRow>& rows);

}  // namespace lidreg
