#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include <lidreg/error.hpp>
#include <lidreg/lidar_extract.hpp>

using namespace lidreg;

namespace {

void add_ground(PointCloud& cloud, double w, double h, double step, double z = 0.0) {
  for (double y = 0; y <= h; y += step) {
    for (double x = 0; x <= w; x += step) cloud.points.push_back({x, y, z, 100, PointClass::Ground});
  }
}

// Rotated box roof sampled on a jittered grid at the given density.
int add_box(PointCloud& cloud, double cx, double cy, double len, double wid, double angle, double height,
            double density, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int n = static_cast<int>(std::round(len * wid * density));
  const double c = std::cos(angle), s = std::sin(angle);
  for (int i = 0; i < n; ++i) {
    const double a = (u(rng) - 0.5) * len, b = (u(rng) - 0.5) * wid;
    cloud.points.push_back({cx + a * c - b * s, cy + a * s + b * c, height, 200, PointClass::Building});
  }
  return n;
}

BinaryGrid brute_open(const BinaryGrid& g, int r) {
  const auto apply = [&](const BinaryGrid& in, bool erode) {
    BinaryGrid out(in.frame());
    for (int i = 0; i < in.rows(); ++i) {
      for (int j = 0; j < in.cols(); ++j) {
        bool all = true, any = false;
        for (int di = -r; di <= r; ++di) {
          for (int dj = -r; dj <= r; ++dj) {
            const bool v = in.contains(i + di, j + dj) && in(i + di, j + dj);
            all = all && v;
            any = any || v;
          }
        }
        out(i, j) = erode ? all : any;
      }
    }
    return out;
  };
  return apply(apply(g, true), false);
}

}  // namespace

TEST_SUITE("lidar_extract") {
  TEST_CASE("split_ground threshold and partition") {
    PointCloud cloud;
    cloud.points = {{0, 0, 10, 0, PointClass::Ground},
                    {1, 0, 10, 0, PointClass::Ground},
                    {2, 0, 12.4, 0, PointClass::Unclassified},
                    {3, 0, 12.6, 0, PointClass::Unclassified}};
    const GroundSplit s = split_ground(cloud, {});
    CHECK(s.ground_elevation == doctest::Approx(10.0));
    CHECK(s.threshold == doctest::Approx(12.5));
    CHECK(s.ground.size() == 3);
    REQUIRE(s.nonground.size() == 1);
    CHECK(s.nonground.points[0].z == 12.6);
    CHECK(s.ground.size() + s.nonground.size() == cloud.size());
  }

  TEST_CASE("split_ground all at ground height") {
    PointCloud cloud;
    add_ground(cloud, 10, 10, 1);
    CHECK(split_ground(cloud, {}).nonground.empty());
  }

  TEST_CASE("split_ground without ground points") {
    PointCloud cloud;
    cloud.points = {{0, 0, 1, 0, PointClass::Building}};
    try {
      split_ground(cloud, {});
      FAIL("expected NoGroundPoints");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::NoGroundPoints);
    }
  }

  TEST_CASE("split_ground counts box roof points") {
    std::mt19937_64 rng(1);
    PointCloud cloud;
    add_ground(cloud, 60, 60, 0.7);
    int roof = 0;
    roof += add_box(cloud, 15, 15, 10, 8, 0.2, 6, 2, rng);
    roof += add_box(cloud, 40, 40, 12, 9, -0.4, 6, 2, rng);
    CHECK(split_ground(cloud, {}).nonground.size() == static_cast<std::size_t>(roof));
  }

  TEST_CASE("rasterize_nonground") {
    PointCloud one;
    one.points = {{5, 5, 3, 0, PointClass::Building}};
    ElevationGrid g = rasterize_nonground(one, 1.0);
    int occupied = 0;
    for (auto v : g.occupancy.values()) occupied += v;
    CHECK(occupied == 1);

    PointCloud two;
    two.points = {{5.1, 5.1, 3, 0, PointClass::Building}, {5.6, 5.1, 4, 0, PointClass::Building}};
    g = rasterize_nonground(two, 1.0);
    occupied = 0;
    for (auto v : g.occupancy.values()) occupied += v;
    CHECK(occupied == 1);
    const auto [r, c] = g.cell_of(5.1, 5.1);
    CHECK(g.elevation(r, c) == 4.0);

    CHECK_THROWS_AS(rasterize_nonground(PointCloud{}, 1.0), Error);
  }

  TEST_CASE("rasterize matches independent binning") {
    std::mt19937_64 rng(2);
    PointCloud roof;
    add_box(roof, 7.3, 4.6, 20, 10, 0.0, 5, 2, rng);
    const ElevationGrid g = rasterize_nonground(roof, 1.0);
    std::set<std::pair<long, long>> cells;
    for (const auto& p : roof.points) {
      cells.insert({static_cast<long>(std::floor((p.x - g.origin_x) / g.resolution)),
                    static_cast<long>(std::floor((g.origin_y - p.y) / g.resolution))});
    }
    int occupied = 0;
    for (auto v : g.occupancy.values()) occupied += v;
    CHECK(occupied == static_cast<int>(cells.size()));
    CHECK(occupied > 150);
    CHECK(occupied <= 231);
  }

  TEST_CASE("morphological_open examples") {
    BinaryGrid speck(9, 9, 0);
    speck(4, 4) = 1;
    CHECK(morphological_open(speck, 1) == BinaryGrid(9, 9, 0));

    BinaryGrid block(14, 14, 0);
    for (int r = 2; r < 12; ++r) {
      for (int c = 2; c < 12; ++c) block(r, c) = 1;
    }
    CHECK(morphological_open(block, 1) == block);
  }

  TEST_CASE("morphological_open equals brute force") {
    std::mt19937_64 rng(3);
    for (int radius : {1, 2}) {
      for (int trial = 0; trial < 5; ++trial) {
        BinaryGrid g(64, 64);
        std::bernoulli_distribution b(0.6);
        for (auto& v : g.values()) v = b(rng);
        const BinaryGrid opened = morphological_open(g, radius);
        CHECK(opened == brute_open(g, radius));
      }
    }
  }

  TEST_CASE("label_components area threshold and connectivity") {
    BinaryGrid g(12, 12, 0);
    for (int r = 1; r < 4; ++r) {
      for (int c = 1; c < 4; ++c) g(r, c) = 1;  // 9 m^2
    }
    LabelGrid l = label_components(g, 10.0, 1.0);
    CHECK(std::all_of(l.values().begin(), l.values().end(), [](int v) { return v == 0; }));

    for (int r = 6; r < 10; ++r) {
      for (int c = 6; c < 9; ++c) g(r, c) = 1;  // 12 m^2
    }
    l = label_components(g, 10.0, 1.0);
    CHECK(l(7, 7) == 1);
    CHECK(l(2, 2) == 0);

    BinaryGrid d(6, 6, 0);
    d(1, 1) = d(2, 2) = 1;
    l = label_components(d, 0.0, 1.0);
    CHECK(l(1, 1) == 1);
    CHECK(l(2, 2) == 1);
  }

  TEST_CASE("flat ground yields no regions") {
    PointCloud cloud;
    add_ground(cloud, 30, 30, 0.5);
    CHECK(extract_building_regions(cloud, {}).empty());
  }

  TEST_CASE("single 10x20 box building") {
    std::mt19937_64 rng(4);
    PointCloud cloud;
    add_ground(cloud, 60, 60, 0.7);
    const double angle = 25.0 * std::numbers::pi / 180.0;
    add_box(cloud, 30, 30, 20, 10, angle, 8, 2, rng);
    const auto regions = extract_building_regions(cloud, {});
    REQUIRE(regions.size() == 1);
    const BuildingRegion& r = regions[0];
    CHECK(std::abs(r.area - 200.0) < 20.0);
    CHECK(axis_angle_difference(r.direction, angle) < 2.0 * std::numbers::pi / 180.0);
    CHECK(convex_contains(r.boundary, r.centroid));
    CHECK(signed_area(r.boundary) > 0);
    for (auto i : r.members) {
      CHECK(cloud.points[i].z > 2.5);
      CHECK(convex_contains(r.boundary, {cloud.points[i].x, cloud.points[i].y}, 1e-9));
    }
  }

  TEST_CASE("separated buildings are each found") {
    std::mt19937_64 rng(5);
    PointCloud cloud;
    add_ground(cloud, 100, 100, 0.7);
    std::uniform_real_distribution<double> a(0, std::numbers::pi);
    int n = 0;
    for (double y = 15; y < 100; y += 25) {
      for (double x = 15; x < 100; x += 25) {
        add_box(cloud, x, y, 13, 9, a(rng), 7, 2, rng);
        ++n;
      }
    }
    CHECK(extract_building_regions(cloud, {}).size() == static_cast<std::size_t>(n));
  }
}
