#pragma once

#include <array>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace lidreg {

using Point2 = Eigen::Vector2d;
using Polygon = std::vector<Point2>;

/// Convex hull by monotone chain, counterclockwise (in a y-up frame), without
/// repeated or collinear vertices. Fewer than three distinct input points yield
/// the distinct points themselves.
Polygon convex_hull(std::span<const Point2> points);

/// Signed shoelace area; positive for counterclockwise vertex order.
double signed_area(const Polygon& polygon);
double polygon_area(const Polygon& polygon);
Point2 polygon_centroid(const Polygon& polygon);

/// True when the point lies inside or within `tolerance` of a counterclockwise
/// convex polygon.
bool convex_contains(const Polygon& polygon, const Point2& point, double tolerance = 1e-9);

/// Minimal-area enclosing rectangle with the major axis direction in [0, pi).
struct RotatedRect {
  Point2 center = Point2::Zero();
  double length = 0.0;  ///< extent along the major axis
  double width = 0.0;   ///< extent along the minor axis
  double direction = 0.0;
  std::array<Point2, 4> corners{};

  double area() const { return length * width; }
};

/// Rotating calipers over a convex hull (as produced by convex_hull).
RotatedRect min_area_rect(const Polygon& hull);

/// Undirected angular difference between two axis directions, in [0, pi/2].
double axis_angle_difference(double a, double b);

double point_segment_distance(const Point2& p, const Point2& a, const Point2& b);

}  // namespace lidreg
