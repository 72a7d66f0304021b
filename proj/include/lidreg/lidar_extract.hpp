#pragma once

#include <vector>

#include <lidreg/geometry2d.hpp>
#include <lidreg/grid.hpp>
#include <lidreg/point_cloud.hpp>

namespace lidreg {

struct ExtractionConfig {
  double relief_factor = 2.5;     ///< T_rf, meters above mean ground elevation
  double grid_resolution = 2.0;   ///< meters per cell
  double min_segment_area = 10.0; ///< square meters
  int opening_radius = 1;         ///< cells

  bool valid() const { return relief_factor > 0 && grid_resolution > 0 && min_segment_area > 0 && opening_radius > 0; }
};

struct GroundSplit {
  PointCloud ground;
  PointCloud nonground;
  std::vector<std::size_t> ground_indices;
  std::vector<std::size_t> nonground_indices;
  double ground_elevation = 0.0;  ///< mean z of ground-classified points
  double threshold = 0.0;         ///< ground_elevation + relief_factor
};

/// Points strictly above mean ground elevation + relief factor are non-ground.
/// Throws NoGroundPoints when no point carries the ground class.
GroundSplit split_ground(const PointCloud& cloud, const ExtractionConfig& cfg);

/// Vertical projection onto a regular grid. Row 0 is the northernmost row so
/// the grid reads like a north-up map; cell (r, c) covers
/// x in [origin_x + c*res, origin_x + (c+1)*res) and
/// y in (origin_y - (r+1)*res, origin_y - r*res].
struct ElevationGrid {
  Raster elevation;     ///< max z per occupied cell, 0 elsewhere
  BinaryGrid occupancy; ///< 1 where at least one point fell
  double origin_x = 0.0;
  double origin_y = 0.0;
  double resolution = 1.0;

  /// Cell of a planimetric position; may fall outside the grid.
  std::pair<int, int> cell_of(double x, double y) const;
};

/// The grid spans the cloud's planimetric bounds plus a two-cell border.
/// Throws EmptyCloud for an empty input.
ElevationGrid rasterize_nonground(const PointCloud& nonground, double resolution);

/// Erosion then dilation with a (2*radius+1)^2 square; outside cells count as 0.
BinaryGrid morphological_open(const BinaryGrid& grid, int radius);

/// 8-connected labeling. Components smaller than min_area (cell count times
/// resolution squared) are erased; survivors are numbered 1..L in raster scan
/// order of their first cell.
LabelGrid label_components(const BinaryGrid& grid, double min_area, double resolution);

struct BuildingRegion {
  int id = 0;
  std::vector<std::size_t> members;  ///< indices into the input cloud
  Polygon boundary;                  ///< convex hull, counterclockwise
  Point2 centroid = Point2::Zero();
  double area = 0.0;                 ///< hull area, m^2
  double direction = 0.0;            ///< MBR major-axis direction in [0, pi)
  double mean_elevation = 0.0;       ///< mean z of member points
  RotatedRect mbr;
};

/// Full chain: split, rasterize, open, label, then per-region hull geometry.
std::vector<BuildingRegion> extract_building_regions(const PointCloud& cloud, const ExtractionConfig& cfg);

/// Plain-text WKT-style listing: one `id;POLYGON((x y, ...))` line per region.
std::string format_regions_wkt(const std::vector<BuildingRegion>& regions);

}  // namespace lidreg
