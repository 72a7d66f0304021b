#include <lidreg/geometry2d.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace lidreg {
namespace {

double cross(const Point2& o, const Point2& a, const Point2& b) {
  return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

}  // namespace

Polygon convex_hull(std::span<const Point2> input) {
  std::vector<Point2> pts(input.begin(), input.end());
  std::sort(pts.begin(), pts.end(), [](const Point2& a, const Point2& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;

  Polygon hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

double signed_area(const Polygon& polygon) {
  double a = 0.0;
  const std::size_t n = polygon.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = polygon[i];
    const auto& q = polygon[(i + 1) % n];
    a += p.x() * q.y() - q.x() * p.y();
  }
  return 0.5 * a;
}

double polygon_area(const Polygon& polygon) { return std::abs(signed_area(polygon)); }

Point2 polygon_centroid(const Polygon& polygon) {
  const std::size_t n = polygon.size();
  if (n == 0) return Point2::Zero();
  const double area = signed_area(polygon);
  if (n < 3 || std::abs(area) < 1e-15) {
    Point2 mean = Point2::Zero();
    for (const auto& p : polygon) mean += p;
    return mean / static_cast<double>(n);
  }
  // Shift to the first vertex to limit cancellation for far-from-origin data.
  const Point2 origin = polygon.front();
  Point2 acc = Point2::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 p = polygon[i] - origin;
    const Point2 q = polygon[(i + 1) % n] - origin;
    const double c = p.x() * q.y() - q.x() * p.y();
    acc += (p + q) * c;
  }
  return origin + acc / (6.0 * area);
}

bool convex_contains(const Polygon& polygon, const Point2& point, double tolerance) {
  const std::size_t n = polygon.size();
  if (n == 0) return false;
  if (n == 1) return (polygon[0] - point).norm() <= tolerance;
  if (n == 2) return point_segment_distance(point, polygon[0], polygon[1]) <= tolerance;
  for (std::size_t i = 0; i < n; ++i) {
    const Point2& a = polygon[i];
    const Point2& b = polygon[(i + 1) % n];
    const Point2 edge = b - a;
    const double len = edge.norm();
    if (len == 0.0) continue;
    // Signed distance of the point to the left of the edge.
    const double d = (edge.x() * (point.y() - a.y()) - edge.y() * (point.x() - a.x())) / len;
    if (d < -tolerance) return false;
  }
  return true;
}

RotatedRect min_area_rect(const Polygon& hull) {
  RotatedRect best;
  const std::size_t n = hull.size();
  if (n == 0) return best;
  if (n < 3) {
    const Point2 a = hull.front();
    const Point2 b = hull.back();
    best.center = 0.5 * (a + b);
    best.length = (b - a).norm();
    best.width = 0.0;
    best.direction = best.length > 0 ? std::atan2(b.y() - a.y(), b.x() - a.x()) : 0.0;
    if (best.direction < 0) best.direction += std::numbers::pi;
    if (best.direction >= std::numbers::pi) best.direction -= std::numbers::pi;
    best.corners = {a, b, b, a};
    return best;
  }

  auto next = [n](std::size_t i) { return (i + 1) % n; };
  double best_area = std::numeric_limits<double>::infinity();
  // Caliper indices: farthest along the edge, farthest from the edge, and
  // farthest against the edge direction.
  std::size_t i_max = 0, i_far = 0, i_min = 0;
  for (std::size_t e = 0; e < n; ++e) {
    const Point2 a = hull[e];
    const Point2 u = (hull[next(e)] - a).normalized();
    const Point2 v(-u.y(), u.x());
    if (e == 0) {
      for (std::size_t j = 0; j < n; ++j) {
        if ((hull[j] - a).dot(u) > (hull[i_max] - a).dot(u)) i_max = j;
        if ((hull[j] - a).dot(v) > (hull[i_far] - a).dot(v)) i_far = j;
        if ((hull[j] - a).dot(u) < (hull[i_min] - a).dot(u)) i_min = j;
      }
    } else {
      while ((hull[next(i_max)] - a).dot(u) > (hull[i_max] - a).dot(u) + 1e-12) i_max = next(i_max);
      while ((hull[next(i_far)] - a).dot(v) > (hull[i_far] - a).dot(v) + 1e-12) i_far = next(i_far);
      while ((hull[next(i_min)] - a).dot(u) < (hull[i_min] - a).dot(u) - 1e-12) i_min = next(i_min);
    }
    const double umax = (hull[i_max] - a).dot(u);
    const double umin = (hull[i_min] - a).dot(u);
    const double vmax = (hull[i_far] - a).dot(v);
    const double area = (umax - umin) * vmax;
    if (area < best_area) {
      best_area = area;
      const Point2 c0 = a + u * umin;
      const Point2 c1 = a + u * umax;
      const Point2 c2 = c1 + v * vmax;
      const Point2 c3 = c0 + v * vmax;
      best.corners = {c0, c1, c2, c3};
      best.center = 0.25 * (c0 + c1 + c2 + c3);
      const double along = umax - umin;
      Point2 major = u;
      if (along >= vmax) {
        best.length = along;
        best.width = vmax;
      } else {
        best.length = vmax;
        best.width = along;
        major = v;
      }
      double dir = std::atan2(major.y(), major.x());
      if (dir < 0) dir += std::numbers::pi;
      if (dir >= std::numbers::pi) dir -= std::numbers::pi;
      best.direction = dir;
    }
  }
  return best;
}

double axis_angle_difference(double a, double b) {
  double d = std::fmod(std::abs(a - b), std::numbers::pi);
  return std::min(d, std::numbers::pi - d);
}

double point_segment_distance(const Point2& p, const Point2& a, const Point2& b) {
  const Point2 ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 == 0.0) return (p - a).norm();
  const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

}  // namespace lidreg
