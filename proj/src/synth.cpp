#include <lidreg/synth.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include <Eigen/Dense>

#include <lidreg/error.hpp>
#include <lidreg/text_format.hpp>

namespace lidreg {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

struct Material {
  Rgb color;
  double intensity;
};

constexpr Material kRoofPalette[] = {
    {{178, 74, 52}, 95.0},   {{120, 122, 128}, 70.0}, {{196, 190, 176}, 150.0}, {{92, 64, 48}, 55.0},
    {{64, 88, 140}, 80.0},   {{150, 40, 40}, 60.0},   {{70, 130, 125}, 105.0},  {{212, 206, 200}, 230.0},
};
constexpr Material kGrass{{96, 148, 72}, 190.0};
constexpr Material kRoad{{58, 58, 62}, 35.0};
constexpr Material kTree{{46, 92, 44}, 120.0};
constexpr Rgb kWall{228, 220, 205};
constexpr double kTreeRoughness = 0.3;
constexpr double kTreeTrunk = 4.0;
constexpr double kPlacementMargin = 6.0;

struct Road {
  bool vertical;  ///< runs north-south at x = position
  double position;
  double half_width;

  bool contains(double x, double y) const { return std::abs((vertical ? x : y) - position) <= half_width; }
};

/// Convex polyhedron as half-spaces n.x <= d.
struct HalfSpace {
  Eigen::Vector3d n;
  double d;
  bool roof;
};

std::vector<HalfSpace> building_solid(const Building& b) {
  const Eigen::Vector3d a(std::cos(b.orientation), std::sin(b.orientation), 0.0);
  const Eigen::Vector3d w(-a.y(), a.x(), 0.0);
  const Eigen::Vector3d c(b.center.x(), b.center.y(), 0.0);
  std::vector<HalfSpace> h = {
      {a, a.dot(c) + b.length / 2, false},  {-a, -a.dot(c) + b.length / 2, false},
      {w, w.dot(c) + b.width / 2, false},   {-w, -w.dot(c) + b.width / 2, false},
      {{0, 0, -1}, 0.0, false},
  };
  if (b.style == RoofStyle::Flat) {
    h.push_back({{0, 0, 1}, b.eave_height, true});
  } else {
    // z + k |w.(x - c)| <= ridge, split into the two roof planes.
    const double k = (b.ridge_height - b.eave_height) / (b.width / 2);
    for (const double s : {1.0, -1.0}) {
      const Eigen::Vector3d n = Eigen::Vector3d(0, 0, 1) + s * k * w;
      h.push_back({n, b.ridge_height + s * k * w.dot(c), true});
    }
  }
  return h;
}

/// Entry parameter of a ray into a convex solid and whether the entry face
/// is a roof face; t < 0 when missed.
std::pair<double, bool> intersect_solid(const std::vector<HalfSpace>& solid, const Eigen::Vector3d& origin,
                                        const Eigen::Vector3d& dir) {
  double t_in = 0.0, t_out = std::numeric_limits<double>::infinity();
  bool roof = false;
  for (const auto& h : solid) {
    const double nd = h.n.dot(dir);
    const double gap = h.d - h.n.dot(origin);
    if (std::abs(nd) < 1e-15) {
      if (gap < 0) return {-1.0, false};
      continue;
    }
    const double t = gap / nd;
    if (nd < 0) {
      if (t > t_in) {
        t_in = t;
        roof = h.roof;
      }
    } else {
      t_out = std::min(t_out, t);
    }
  }
  if (t_in > t_out) return {-1.0, false};
  return {t_in, roof};
}

double sphere_entry(const Tree& tree, const Eigen::Vector3d& origin, const Eigen::Vector3d& dir) {
  const Eigen::Vector3d oc = origin - tree.center;
  const double a = dir.squaredNorm(), b = 2.0 * oc.dot(dir), c = oc.squaredNorm() - tree.radius * tree.radius;
  const double disc = b * b - 4 * a * c;
  if (disc < 0) return -1.0;
  return (-b - std::sqrt(disc)) / (2 * a);
}

double polygon_distance(const Polygon& a, const Polygon& b) {
  const auto crosses = [](const Point2& p1, const Point2& p2, const Point2& q1, const Point2& q2) {
    const auto orient = [](const Point2& o, const Point2& u, const Point2& v) {
      return (u - o).x() * (v - o).y() - (u - o).y() * (v - o).x();
    };
    return orient(p1, p2, q1) * orient(p1, p2, q2) < 0 && orient(q1, q2, p1) * orient(q1, q2, p2) < 0;
  };
  for (const auto& p : a) {
    if (convex_contains(b, p, 0.0)) return 0.0;
  }
  for (const auto& p : b) {
    if (convex_contains(a, p, 0.0)) return 0.0;
  }
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < a.size(); ++i) {
    const Point2& a0 = a[i];
    const Point2& a1 = a[(i + 1) % a.size()];
    for (std::size_t j = 0; j < b.size(); ++j) {
      const Point2& b0 = b[j];
      const Point2& b1 = b[(j + 1) % b.size()];
      if (crosses(a0, a1, b0, b1)) return 0.0;
      best = std::min({best, point_segment_distance(a0, b0, b1), point_segment_distance(b0, a0, a1)});
    }
  }
  return best;
}

double point_polygon_distance(const Point2& p, const Polygon& poly) {
  if (convex_contains(poly, p, 0.0)) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < poly.size(); ++i) best = std::min(best, point_segment_distance(p, poly[i], poly[(i + 1) % poly.size()]));
  return best;
}

struct PixelBox {
  int r0, c0, r1, c1;  ///< inclusive
};

std::uint8_t clamp_byte(double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)); }

/// Deterministic per-pixel texture in [-1, 1].
double hash_noise(int r, int c) {
  std::uint64_t h = static_cast<std::uint64_t>(r) * 0x9E3779B97F4A7C15ULL ^ static_cast<std::uint64_t>(c) * 0xC2B2AE3D27D4EB4FULL;
  h ^= h >> 31;
  h *= 0xBF58476D1CE4E5B9ULL;
  h ^= h >> 29;
  return static_cast<double>(h % 2001) / 1000.0 - 1.0;
}

CameraPose scene_pose(const SceneSpec& spec) {
  CameraPose pose;
  pose.alpha_x = pose.alpha_y = spec.flying_height / spec.gsd;
  pose.px = (spec.image_cols - 1) / 2.0;
  pose.py = (spec.image_rows - 1) / 2.0;
  pose.x0 = spec.extent_x / 2;
  pose.y0 = spec.extent_y / 2;
  pose.z0 = spec.flying_height;
  pose.omega = wrap_angle(std::numbers::pi + spec.tilt_omega * kDeg);
  pose.phi = spec.tilt_phi * kDeg;
  pose.kappa = spec.kappa * kDeg;
  return pose;
}

}  // namespace

void SceneSpec::validate() const {
  const auto require = [](bool ok, const char* what) {
    if (!ok) throw Error(ErrorKind::InvalidSpec, what);
  };
  require(extent_x > 0 && extent_y > 0, "extent must be positive");
  require(building_count >= 0 && tree_count >= 0, "object counts must be non-negative");
  require(length_min > 0 && length_max >= length_min, "building length range is invalid");
  require(aspect_min >= 1 && aspect_max >= aspect_min, "aspect range is invalid");
  require(height_min > 0 && height_max >= height_min, "height range is invalid");
  require(gable_fraction >= 0 && gable_fraction <= 1 && gable_rise > 0, "gable settings are invalid");
  require(landmark_scale >= 1 && separation >= 0, "landmark scale or separation is invalid");
  require(tree_radius_min > 0 && tree_radius_max >= tree_radius_min, "tree radius range is invalid");
  require(road_width >= 0, "road width must be non-negative");
  require(lidar_density > 0 && lidar_noise >= 0, "LiDAR density must be positive and noise non-negative");
  require(gsd > 0 && flying_height > 0 && image_rows > 0 && image_cols > 0, "camera geometry must be positive");
  require(image_noise >= 0, "image noise must be non-negative");
}

Polygon Building::footprint() const {
  const Point2 a(std::cos(orientation) * length / 2, std::sin(orientation) * length / 2);
  const Point2 w(-std::sin(orientation) * width / 2, std::cos(orientation) * width / 2);
  return {center + a - w, center + a + w, center - a + w, center - a - w};
}

double Building::roof_height(double x, double y) const {
  const Point2 d = Point2(x, y) - center;
  const double s = d.x() * std::cos(orientation) + d.y() * std::sin(orientation);
  const double t = -d.x() * std::sin(orientation) + d.y() * std::cos(orientation);
  if (std::abs(s) > length / 2 || std::abs(t) > width / 2) return -1.0;
  if (style == RoofStyle::Flat) return eave_height;
  return ridge_height - (ridge_height - eave_height) * std::abs(t) / (width / 2);
}

Eigen::Vector3d Building::roof_centroid() const {
  return {center.x(), center.y(), 0.5 * (eave_height + ridge_height)};
}

std::vector<std::pair<Eigen::Vector3d, Eigen::Vector3d>> Building::roof_edges() const {
  const Polygon f = footprint();
  std::vector<std::pair<Eigen::Vector3d, Eigen::Vector3d>> edges;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const Point2& p = f[i];
    const Point2& q = f[(i + 1) % f.size()];
    edges.emplace_back(Eigen::Vector3d(p.x(), p.y(), eave_height), Eigen::Vector3d(q.x(), q.y(), eave_height));
  }
  return edges;
}

Scene generate_scene(const SceneSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  const auto uniform = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };

  Scene scene;
  scene.truth.pose = scene_pose(spec);
  const ProjectionMatrix P = build_camera_matrix(scene.truth.pose);
  const Eigen::Matrix3d M_inv = P.leftCols<3>().inverse();
  const Eigen::Vector3d C = scene.truth.pose.center();

  // Ground footprint of the image, shrunk to an axis-aligned placement box.
  const auto ground_hit = [&](double u, double v) {
    const Eigen::Vector3d d = M_inv * Eigen::Vector3d(u, v, 1.0);
    const double t = -C.z() / d.z();
    return Point2(C.x() + t * d.x(), C.y() + t * d.y());
  };
  const double umax = spec.image_cols - 1, vmax = spec.image_rows - 1;
  const Point2 corners[] = {ground_hit(0, 0), ground_hit(umax, 0), ground_hit(umax, vmax), ground_hit(0, vmax)};
  // Pixel (0, 0) is the north-west corner of a north-up image.
  double xmin = std::max(corners[0].x(), corners[3].x()), xmax = std::min(corners[1].x(), corners[2].x());
  double ymin = std::max(corners[2].y(), corners[3].y()), ymax = std::min(corners[0].y(), corners[1].y());
  xmin = std::max(xmin, 0.0) + kPlacementMargin;
  ymin = std::max(ymin, 0.0) + kPlacementMargin;
  xmax = std::min(xmax, spec.extent_x) - kPlacementMargin;
  ymax = std::min(ymax, spec.extent_y) - kPlacementMargin;
  if (!(xmax > xmin && ymax > ymin)) throw Error(ErrorKind::InvalidSpec, "image footprint leaves no room for buildings");

  std::vector<Road> roads;
  if (spec.road_width > 0) {
    roads.push_back({true, uniform(xmin + 0.35 * (xmax - xmin), xmin + 0.65 * (xmax - xmin)), spec.road_width / 2});
    roads.push_back({false, uniform(ymin + 0.35 * (ymax - ymin), ymin + 0.65 * (ymax - ymin)), spec.road_width / 2});
  }
  const auto clear_of_roads = [&](const Polygon& poly, double gap) {
    for (const auto& road : roads) {
      bool below = false, above = false;
      for (const auto& p : poly) {
        const double off = (road.vertical ? p.x() : p.y()) - road.position;
        if (std::abs(off) < road.half_width + gap) return false;
        (off < 0 ? below : above) = true;
      }
      if (below && above) return false;
    }
    return true;
  };
  const auto inside_box = [&](const Polygon& poly) {
    return std::all_of(poly.begin(), poly.end(),
                       [&](const Point2& p) { return p.x() >= xmin && p.x() <= xmax && p.y() >= ymin && p.y() <= ymax; });
  };

  auto& buildings = scene.truth.buildings;
  for (int id = 0; id < spec.building_count; ++id) {
    bool placed = false;
    for (int attempt = 0; attempt < 20000 && !placed; ++attempt) {
      Building b;
      b.id = id;
      b.length = uniform(spec.length_min, spec.length_max);
      b.width = b.length / uniform(spec.aspect_min, spec.aspect_max);
      if (id == 0) {
        b.length = spec.length_max * spec.landmark_scale;
        b.width = b.length / spec.aspect_min;
      }
      b.orientation = uniform(0.0, std::numbers::pi);
      b.center = {uniform(xmin, xmax), uniform(ymin, ymax)};
      b.eave_height = uniform(spec.height_min, spec.height_max);
      b.style = uniform(0.0, 1.0) < spec.gable_fraction ? RoofStyle::Gable : RoofStyle::Flat;
      b.ridge_height = b.eave_height + (b.style == RoofStyle::Gable ? spec.gable_rise : 0.0);
      const auto& m = kRoofPalette[std::uniform_int_distribution<int>(0, std::size(kRoofPalette) - 1)(rng)];
      b.roof_color = m.color;
      b.roof_intensity = m.intensity;
      const Polygon f = b.footprint();
      if (!inside_box(f) || !clear_of_roads(f, 3.0)) continue;
      if (std::any_of(buildings.begin(), buildings.end(), [&](const Building& o) {
            return polygon_distance(f, o.footprint()) < spec.separation;
          })) {
        continue;
      }
      buildings.push_back(b);
      placed = true;
    }
    if (!placed) {
      throw Error(ErrorKind::InvalidSpec, "could not place building " + std::to_string(id) + " of " +
                                              std::to_string(spec.building_count) + " in the image footprint");
    }
  }

  auto& trees = scene.truth.trees;
  for (int i = 0; i < spec.tree_count; ++i) {
    bool placed = false;
    for (int attempt = 0; attempt < 20000 && !placed; ++attempt) {
      Tree t;
      t.radius = uniform(spec.tree_radius_min, spec.tree_radius_max);
      const Point2 c(uniform(xmin, xmax), uniform(ymin, ymax));
      t.center = {c.x(), c.y(), kTreeTrunk + t.radius};
      const Polygon disc = {c + Point2(t.radius, 0), c + Point2(0, t.radius), c - Point2(t.radius, 0),
                            c - Point2(0, t.radius)};
      if (!clear_of_roads(disc, 1.0)) continue;
      if (std::any_of(buildings.begin(), buildings.end(), [&](const Building& b) {
            return point_polygon_distance(c, b.footprint()) < t.radius + 5.0;
          })) {
        continue;
      }
      if (std::any_of(trees.begin(), trees.end(), [&](const Tree& o) {
            return (o.center.head<2>() - c).norm() < o.radius + t.radius + 2.0;
          })) {
        continue;
      }
      trees.push_back(t);
      placed = true;
    }
    if (!placed) throw Error(ErrorKind::InvalidSpec, "could not place tree " + std::to_string(i));
  }

  // Image: ray cast from the true camera. Ground first, then every object
  // over the pixel box its bounding volume projects to.
  RgbImage image(spec.image_rows, spec.image_cols);
  Raster depth(image.frame(), std::numeric_limits<double>::infinity());
  const auto ray = [&](int r, int c) { return Eigen::Vector3d(M_inv * Eigen::Vector3d(c, r, 1.0)); };
  for (int r = 0; r < image.rows(); ++r) {
    for (int c = 0; c < image.cols(); ++c) {
      const Eigen::Vector3d d = ray(r, c);
      const double t = -C.z() / d.z();
      const double x = C.x() + t * d.x(), y = C.y() + t * d.y();
      const bool road = std::any_of(roads.begin(), roads.end(), [&](const Road& rd) { return rd.contains(x, y); });
      image(r, c) = road ? kRoad.color : kGrass.color;
      depth(r, c) = t;
    }
  }
  const auto pixel_box = [&](const std::vector<Eigen::Vector3d>& pts) {
    double u0 = 1e300, u1 = -1e300, v0 = 1e300, v1 = -1e300;
    for (const auto& p : pts) {
      const Point2 q = project_point(P, p);
      u0 = std::min(u0, q.x());
      u1 = std::max(u1, q.x());
      v0 = std::min(v0, q.y());
      v1 = std::max(v1, q.y());
    }
    return PixelBox{std::max(0, static_cast<int>(std::floor(v0)) - 1), std::max(0, static_cast<int>(std::floor(u0)) - 1),
                    std::min(image.rows() - 1, static_cast<int>(std::ceil(v1)) + 1),
                    std::min(image.cols() - 1, static_cast<int>(std::ceil(u1)) + 1)};
  };
  for (const auto& b : buildings) {
    std::vector<Eigen::Vector3d> box;
    for (const auto& p : b.footprint()) {
      box.emplace_back(p.x(), p.y(), 0.0);
      box.emplace_back(p.x(), p.y(), b.ridge_height);
    }
    const PixelBox w = pixel_box(box);
    const auto solid = building_solid(b);
    for (int r = w.r0; r <= w.r1; ++r) {
      for (int c = w.c0; c <= w.c1; ++c) {
        const auto [t, roof] = intersect_solid(solid, C, ray(r, c));
        if (t > 0 && t < depth(r, c)) {
          depth(r, c) = t;
          image(r, c) = roof ? b.roof_color : kWall;
        }
      }
    }
  }
  const Eigen::Vector3d light = Eigen::Vector3d(0.3, 0.4, 0.87).normalized();
  for (const auto& tree : trees) {
    std::vector<Eigen::Vector3d> box;
    for (const double sx : {-1.0, 1.0}) {
      for (const double sy : {-1.0, 1.0}) {
        for (const double sz : {-1.0, 1.0}) box.push_back(tree.center + tree.radius * Eigen::Vector3d(sx, sy, sz));
      }
    }
    const PixelBox w = pixel_box(box);
    for (int r = w.r0; r <= w.r1; ++r) {
      for (int c = w.c0; c <= w.c1; ++c) {
        const Eigen::Vector3d d = ray(r, c);
        const double t = sphere_entry(tree, C, d);
        if (t > 0 && t < depth(r, c)) {
          depth(r, c) = t;
          const Eigen::Vector3d n = (C + t * d - tree.center).normalized();
          const double shade = (0.55 + 0.45 * std::max(0.0, n.dot(light))) * (1.0 + 0.25 * hash_noise(r, c));
          image(r, c) = {clamp_byte(kTree.color[0] * shade), clamp_byte(kTree.color[1] * shade),
                         clamp_byte(kTree.color[2] * shade)};
        }
      }
    }
  }
  if (spec.image_noise > 0) {
    std::normal_distribution<double> noise(0.0, spec.image_noise);
    for (auto& px : image.values()) {
      for (auto& ch : px) ch = clamp_byte(ch + noise(rng));
    }
  }
  scene.image = {std::move(image), spec.gsd};

  // LiDAR: uniform planimetric samples on the top surface.
  constexpr double kBucket = 10.0;
  const int bx = static_cast<int>(std::ceil(spec.extent_x / kBucket)) + 1;
  const int by = static_cast<int>(std::ceil(spec.extent_y / kBucket)) + 1;
  std::vector<std::vector<int>> bucket_buildings(static_cast<std::size_t>(bx * by));
  std::vector<std::vector<int>> bucket_trees(static_cast<std::size_t>(bx * by));
  const auto bucket_range = [&](double x0, double x1, double y0, double y1, auto&& fn) {
    for (int i = std::max(0, static_cast<int>(x0 / kBucket)); i <= std::min(bx - 1, static_cast<int>(x1 / kBucket)); ++i) {
      for (int j = std::max(0, static_cast<int>(y0 / kBucket)); j <= std::min(by - 1, static_cast<int>(y1 / kBucket)); ++j) {
        fn(static_cast<std::size_t>(j * bx + i));
      }
    }
  };
  for (std::size_t i = 0; i < buildings.size(); ++i) {
    double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
    for (const auto& p : buildings[i].footprint()) {
      x0 = std::min(x0, p.x());
      x1 = std::max(x1, p.x());
      y0 = std::min(y0, p.y());
      y1 = std::max(y1, p.y());
    }
    bucket_range(x0, x1, y0, y1, [&](std::size_t k) { bucket_buildings[k].push_back(static_cast<int>(i)); });
  }
  for (std::size_t i = 0; i < trees.size(); ++i) {
    const auto& t = trees[i];
    bucket_range(t.center.x() - t.radius, t.center.x() + t.radius, t.center.y() - t.radius, t.center.y() + t.radius,
                 [&](std::size_t k) { bucket_trees[k].push_back(static_cast<int>(i)); });
  }

  const auto count = static_cast<std::size_t>(std::llround(spec.lidar_density * spec.extent_x * spec.extent_y));
  std::uniform_real_distribution<double> ux(0.0, spec.extent_x), uy(0.0, spec.extent_y);
  std::normal_distribution<double> znoise(0.0, 1.0);
  scene.cloud.points.reserve(count);
  scene.truth.source.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    LidarPoint pt;
    pt.x = ux(rng);
    pt.y = uy(rng);
    const std::size_t k = static_cast<std::size_t>(std::min(by - 1, static_cast<int>(pt.y / kBucket)) * bx +
                                                   std::min(bx - 1, static_cast<int>(pt.x / kBucket)));
    double top = 0.0;
    int source = std::any_of(roads.begin(), roads.end(), [&](const Road& rd) { return rd.contains(pt.x, pt.y); })
                     ? kSourceRoad
                     : kSourceGround;
    for (const int b : bucket_buildings[k]) {
      const double h = buildings[static_cast<std::size_t>(b)].roof_height(pt.x, pt.y);
      if (h > top) {
        top = h;
        source = buildings[static_cast<std::size_t>(b)].id;
      }
    }
    for (const int t : bucket_trees[k]) {
      const Tree& tree = trees[static_cast<std::size_t>(t)];
      const double d2 = std::pow(pt.x - tree.center.x(), 2) + std::pow(pt.y - tree.center.y(), 2);
      if (d2 >= tree.radius * tree.radius) continue;
      const double h = tree.center.z() + std::sqrt(tree.radius * tree.radius - d2);
      if (h > top) {
        top = h;
        source = kSourceTree;
      }
    }
    pt.z = top;
    if (source == kSourceTree) pt.z += kTreeRoughness * znoise(rng);
    if (spec.lidar_noise > 0) pt.z += spec.lidar_noise * znoise(rng);
    switch (source) {
      case kSourceGround:
        pt.intensity = kGrass.intensity;
        pt.cls = PointClass::Ground;
        break;
      case kSourceRoad:
        pt.intensity = kRoad.intensity;
        pt.cls = PointClass::Ground;
        break;
      case kSourceTree:
        pt.intensity = kTree.intensity;
        pt.cls = PointClass::HighVegetation;
        break;
      default:
        pt.intensity = buildings[static_cast<std::size_t>(source)].roof_intensity;
        pt.cls = PointClass::Building;
    }
    scene.cloud.points.push_back(pt);
    scene.truth.source.push_back(source);
  }
  return scene;
}

CameraPose perturb_pose(const CameraPose& pose, double translation, double angle, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto direction = [&] {
    Eigen::Vector3d v;
    do {
      v = {normal(rng), normal(rng), normal(rng)};
    } while (v.norm() < 1e-9);
    return Eigen::Vector3d(v.normalized());
  };
  const Eigen::Vector3d dc = translation * direction();
  const Eigen::Vector3d da = angle * direction();
  CameraPose out = pose;
  out.x0 += dc.x();
  out.y0 += dc.y();
  out.z0 += dc.z();
  out.omega = wrap_angle(out.omega + da.x());
  out.phi += da.y();
  out.kappa = wrap_angle(out.kappa + da.z());
  return out;
}

std::pair<PointCloud, GroundTruth> temporal_variant(const Scene& scene, const std::vector<int>& removal_ids) {
  std::set<int> remove;
  for (const int id : removal_ids) {
    const bool known = std::any_of(scene.truth.buildings.begin(), scene.truth.buildings.end(),
                                   [&](const Building& b) { return b.id == id; });
    if (!known) throw Error(ErrorKind::UnknownBuilding, "building " + std::to_string(id) + " is not in the scene");
    remove.insert(id);
  }
  PointCloud cloud;
  GroundTruth truth = scene.truth;
  truth.source.clear();
  for (std::size_t i = 0; i < scene.cloud.size(); ++i) {
    if (remove.count(scene.truth.source[i])) continue;
    cloud.points.push_back(scene.cloud.points[i]);
    truth.source.push_back(scene.truth.source[i]);
  }
  std::erase_if(truth.buildings, [&](const Building& b) { return remove.count(b.id) > 0; });
  return {std::move(cloud), std::move(truth)};
}

Projector pose_projector(const CameraPose& pose) {
  return [P = build_camera_matrix(pose)](const Eigen::Vector3d& x) { return project_point(P, x); };
}

std::vector<CheckPointPair> centroid_check_points(const GroundTruth& truth, const Projector& estimate, double gsd) {
  const ProjectionMatrix P = build_camera_matrix(truth.pose);
  std::vector<CheckPointPair> out;
  for (const auto& b : truth.buildings) {
    const Eigen::Vector3d X = b.roof_centroid();
    out.push_back({project_point(P, X) * gsd, estimate(X) * gsd});
  }
  return out;
}

std::vector<std::pair<LineSegment2D, LineSegment2D>> edge_check_lines(const GroundTruth& truth,
                                                                      const Projector& estimate, double gsd) {
  const ProjectionMatrix P = build_camera_matrix(truth.pose);
  std::vector<std::pair<LineSegment2D, LineSegment2D>> out;
  for (const auto& b : truth.buildings) {
    for (const auto& [p, q] : b.roof_edges()) {
      out.push_back({{project_point(P, p) * gsd, project_point(P, q) * gsd}, {estimate(p) * gsd, estimate(q) * gsd}});
    }
  }
  return out;
}

namespace {

template <typename Fn>
void for_each_spec_field(SceneSpec& s, Fn&& fn) {
  fn("extent_x", s.extent_x);
  fn("extent_y", s.extent_y);
  fn("building_count", s.building_count);
  fn("length_min", s.length_min);
  fn("length_max", s.length_max);
  fn("aspect_min", s.aspect_min);
  fn("aspect_max", s.aspect_max);
  fn("height_min", s.height_min);
  fn("height_max", s.height_max);
  fn("gable_fraction", s.gable_fraction);
  fn("gable_rise", s.gable_rise);
  fn("landmark_scale", s.landmark_scale);
  fn("separation", s.separation);
  fn("tree_count", s.tree_count);
  fn("tree_radius_min", s.tree_radius_min);
  fn("tree_radius_max", s.tree_radius_max);
  fn("road_width", s.road_width);
  fn("lidar_density", s.lidar_density);
  fn("lidar_noise", s.lidar_noise);
  fn("gsd", s.gsd);
  fn("flying_height", s.flying_height);
  fn("image_rows", s.image_rows);
  fn("image_cols", s.image_cols);
  fn("tilt_omega", s.tilt_omega);
  fn("tilt_phi", s.tilt_phi);
  fn("kappa", s.kappa);
  fn("image_noise", s.image_noise);
  fn("seed", s.seed);
}

}  // namespace

SceneSpec parse_scene_spec(std::string_view text) {
  const auto kv = parse_key_values(text);
  SceneSpec spec;
  for_each_spec_field(spec, [&](const char* name, auto& field) {
    auto it = kv.find(std::string("synth.") + name);
    if (it == kv.end()) it = kv.find(name);
    if (it == kv.end()) return;
    using T = std::decay_t<decltype(field)>;
    if constexpr (std::is_floating_point_v<T>) {
      field = parse_double(it->second, name);
    } else {
      const long long v = parse_integer(it->second, name);
      if (v < 0) throw Error(ErrorKind::InvalidSpec, std::string(name) + " must be non-negative");
      field = static_cast<T>(v);
    }
  });
  spec.validate();
  return spec;
}

std::string format_scene_spec(const SceneSpec& spec) {
  SceneSpec copy = spec;
  std::string out;
  for_each_spec_field(copy, [&](const char* name, auto& field) {
    using T = std::decay_t<decltype(field)>;
    if constexpr (std::is_floating_point_v<T>) {
      out += std::string("synth.") + name + " = " + format_double(field) + "\n";
    } else {
      out += std::string("synth.") + name + " = " + std::to_string(field) + "\n";
    }
  });
  return out;
}

std::string format_buildings_csv(const GroundTruth& truth) {
  std::ostringstream out;
  out << "id,center_x,center_y,length,width,orientation,eave_height,ridge_height,style,centroid_z\n";
  for (const auto& b : truth.buildings) {
    out << b.id << ',' << format_double(b.center.x()) << ',' << format_double(b.center.y()) << ','
        << format_double(b.length) << ',' << format_double(b.width) << ',' << format_double(b.orientation) << ','
        << format_double(b.eave_height) << ',' << format_double(b.ridge_height) << ','
        << (b.style == RoofStyle::Flat ? "flat" : "gable") << ',' << format_double(b.roof_centroid().z()) << '\n';
  }
  return out.str();
}

std::string format_edges_csv(const GroundTruth& truth) {
  std::ostringstream out;
  out << "building,ax,ay,az,bx,by,bz\n";
  for (const auto& b : truth.buildings) {
    for (const auto& [p, q] : b.roof_edges()) {
      out << b.id << ',' << format_double(p.x()) << ',' << format_double(p.y()) << ',' << format_double(p.z()) << ','
          << format_double(q.x()) << ',' << format_double(q.y()) << ',' << format_double(q.z()) << '\n';
    }
  }
  return out.str();
}

}  // namespace lidreg
