#include <lidreg/lidar_extract.hpp>

#include <algorithm>
#include <cmath>
#include <map>

#include <lidreg/error.hpp>
#include <lidreg/text_format.hpp>

namespace lidreg {

GroundSplit split_ground(const PointCloud& cloud, const ExtractionConfig& cfg) {
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& p : cloud.points) {
    if (p.cls == PointClass::Ground) {
      sum += p.z;
      ++count;
    }
  }
  if (count == 0) throw Error(ErrorKind::NoGroundPoints, "cloud has no ground-classified points");

  GroundSplit split;
  split.ground_elevation = sum / static_cast<double>(count);
  split.threshold = split.ground_elevation + cfg.relief_factor;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto& p = cloud.points[i];
    if (p.z > split.threshold) {
      split.nonground.points.push_back(p);
      split.nonground_indices.push_back(i);
    } else {
      split.ground.points.push_back(p);
      split.ground_indices.push_back(i);
    }
  }
  return split;
}

std::pair<int, int> ElevationGrid::cell_of(double x, double y) const {
  const int col = static_cast<int>(std::floor((x - origin_x) / resolution));
  const int row = static_cast<int>(std::floor((origin_y - y) / resolution));
  return {row, col};
}

ElevationGrid rasterize_nonground(const PointCloud& nonground, double resolution) {
  if (nonground.empty()) throw Error(ErrorKind::EmptyCloud, "no non-ground points to rasterize");
  if (!(resolution > 0)) throw Error(ErrorKind::InvalidConfig, "grid resolution must be positive");
  constexpr int kBorder = 2;
  const Bounds3 b = nonground.bounds();
  ElevationGrid g;
  g.resolution = resolution;
  g.origin_x = std::floor(b.min.x() / resolution) * resolution - kBorder * resolution;
  g.origin_y = (std::floor(b.max.y() / resolution) + 1) * resolution + kBorder * resolution;
  const int cols = static_cast<int>(std::floor((b.max.x() - g.origin_x) / resolution)) + 1 + kBorder;
  const int rows = static_cast<int>(std::floor((g.origin_y - b.min.y()) / resolution)) + 1 + kBorder;
  g.elevation = Raster(rows, cols, 0.0);
  g.occupancy = BinaryGrid(rows, cols, 0);
  for (const auto& p : nonground.points) {
    const auto [r, c] = g.cell_of(p.x, p.y);
    if (!g.occupancy(r, c)) {
      g.occupancy(r, c) = 1;
      g.elevation(r, c) = p.z;
    } else {
      g.elevation(r, c) = std::max(g.elevation(r, c), p.z);
    }
  }
  return g;
}

namespace {

// Separable min (erode) or max (dilate) filter with a square element; cells
// outside the grid read as 0.
BinaryGrid square_filter(const BinaryGrid& in, int radius, bool erode) {
  const int rows = in.rows(), cols = in.cols();
  BinaryGrid tmp(rows, cols), out(rows, cols);
  auto reduce = [erode](std::uint8_t acc, std::uint8_t v) -> std::uint8_t { return erode ? (acc & v) : (acc | v); };
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      std::uint8_t acc = erode ? 1 : 0;
      for (int k = c - radius; k <= c + radius; ++k) acc = reduce(acc, (k >= 0 && k < cols) ? in(r, k) : 0);
      tmp(r, c) = acc;
    }
  }
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      std::uint8_t acc = erode ? 1 : 0;
      for (int k = r - radius; k <= r + radius; ++k) acc = reduce(acc, (k >= 0 && k < rows) ? tmp(k, c) : 0);
      out(r, c) = acc;
    }
  }
  return out;
}

}  // namespace

BinaryGrid morphological_open(const BinaryGrid& grid, int radius) {
  if (radius < 1) throw Error(ErrorKind::InvalidConfig, "opening radius must be >= 1");
  BinaryGrid normalized = grid;
  for (auto& v : normalized.values()) v = v ? 1 : 0;
  return square_filter(square_filter(normalized, radius, true), radius, false);
}

LabelGrid label_components(const BinaryGrid& grid, double min_area, double resolution) {
  const int rows = grid.rows(), cols = grid.cols();
  LabelGrid provisional(rows, cols, 0);
  std::vector<std::size_t> sizes{0};
  std::vector<std::pair<int, int>> stack;
  int next = 0;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      if (!grid(r, c) || provisional(r, c)) continue;
      ++next;
      sizes.push_back(0);
      stack.assign(1, {r, c});
      provisional(r, c) = next;
      while (!stack.empty()) {
        const auto [cr, cc] = stack.back();
        stack.pop_back();
        ++sizes[next];
        for (int dr = -1; dr <= 1; ++dr) {
          for (int dc = -1; dc <= 1; ++dc) {
            const int nr = cr + dr, nc = cc + dc;
            if ((dr || dc) && grid.contains(nr, nc) && grid(nr, nc) && !provisional(nr, nc)) {
              provisional(nr, nc) = next;
              stack.emplace_back(nr, nc);
            }
          }
        }
      }
    }
  }
  std::vector<int> remap(sizes.size(), 0);
  int kept = 0;
  const double cell_area = resolution * resolution;
  for (std::size_t l = 1; l < sizes.size(); ++l) {
    if (static_cast<double>(sizes[l]) * cell_area >= min_area) remap[l] = ++kept;
  }
  for (auto& v : provisional.values()) v = remap[v];
  return provisional;
}

std::vector<BuildingRegion> extract_building_regions(const PointCloud& cloud, const ExtractionConfig& cfg) {
  if (!cfg.valid()) throw Error(ErrorKind::InvalidConfig, "extraction config values must be positive");
  const GroundSplit split = split_ground(cloud, cfg);
  if (split.nonground.empty()) return {};
  const ElevationGrid grid = rasterize_nonground(split.nonground, cfg.grid_resolution);
  const BinaryGrid opened = morphological_open(grid.occupancy, cfg.opening_radius);
  const LabelGrid labels = label_components(opened, cfg.min_segment_area, cfg.grid_resolution);

  // Opening trims the staircase cells along oblique walls; points in those
  // cells rejoin the nearest labeled cell within the opening radius so the
  // hull keeps the full roof outline.
  const int reach = cfg.opening_radius;
  const auto nearest_label = [&](int r, int c) {
    if (labels(r, c) > 0) return labels(r, c);
    int best = 0, best_d = reach + 1;
    for (int dr = -reach; dr <= reach; ++dr) {
      for (int dc = -reach; dc <= reach; ++dc) {
        if (!labels.contains(r + dr, c + dc) || labels(r + dr, c + dc) == 0) continue;
        const int d = std::max(std::abs(dr), std::abs(dc));
        if (d < best_d) {
          best_d = d;
          best = labels(r + dr, c + dc);
        }
      }
    }
    return best;
  };
  std::map<int, std::vector<std::size_t>> members;
  for (std::size_t k = 0; k < split.nonground.size(); ++k) {
    const auto& p = split.nonground.points[k];
    const auto [r, c] = grid.cell_of(p.x, p.y);
    const int label = nearest_label(r, c);
    if (label > 0) members[label].push_back(split.nonground_indices[k]);
  }

  std::vector<BuildingRegion> regions;
  for (auto& [label, indices] : members) {
    std::vector<Point2> xy;
    xy.reserve(indices.size());
    double zsum = 0.0;
    for (const auto i : indices) {
      xy.emplace_back(cloud.points[i].x, cloud.points[i].y);
      zsum += cloud.points[i].z;
    }
    Polygon hull = convex_hull(xy);
    const double area = polygon_area(hull);
    if (hull.size() < 3 || area <= 0.0) continue;
    BuildingRegion region;
    region.id = static_cast<int>(regions.size()) + 1;
    region.members = std::move(indices);
    region.boundary = std::move(hull);
    region.area = area;
    region.centroid = polygon_centroid(region.boundary);
    region.mbr = min_area_rect(region.boundary);
    region.direction = region.mbr.direction;
    region.mean_elevation = zsum / static_cast<double>(region.members.size());
    regions.push_back(std::move(region));
  }
  return regions;
}

std::string format_regions_wkt(const std::vector<BuildingRegion>& regions) {
  std::string out;
  for (const auto& r : regions) {
    out += std::to_string(r.id) + ";POLYGON((";
    for (std::size_t i = 0; i <= r.boundary.size(); ++i) {
      const auto& p = r.boundary[i % r.boundary.size()];
      if (i) out += ", ";
      out += format_double(p.x()) + " " + format_double(p.y());
    }
    out += "))\n";
  }
  return out;
}

}  // namespace lidreg
