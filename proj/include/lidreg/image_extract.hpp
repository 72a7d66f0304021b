#pragma once

#include <vector>

#include <lidreg/geometry2d.hpp>
#include <lidreg/grid.hpp>

namespace lidreg {

/// Optical image plus its ground sample distance in meters per pixel.
struct OpticalImage {
  RgbImage pixels;
  double gsd = 1.0;
};

struct PixelIndex {
  int row = 0;
  int col = 0;
  bool operator==(const PixelIndex&) const = default;
};

/// sRGB (D65) to CIE L*a*b*.
Lab srgb_to_lab(const Rgb& rgb);
Grid<Lab> rgb_to_lab(const RgbImage& image);

struct MeanShiftConfig {
  double spatial_bandwidth = 8.0;  ///< pixels
  double range_bandwidth = 8.0;    ///< L*a*b* units
  int min_region = 50;             ///< pixels
  int max_iterations = 20;

  bool valid() const { return spatial_bandwidth > 0 && range_bandwidth > 0 && min_region >= 0 && max_iterations > 0; }
};

/// Joint spatial-range mean shift with flat kernels. Every pixel climbs to its
/// mode; 8-adjacent pixels whose mode colors lie within the range bandwidth
/// share a segment; segments below min_region pixels are absorbed by the
/// adjacent segment of closest mean color. Labels are 1..L in raster order.
LabelGrid mean_shift_segment(const Grid<Lab>& lab, const MeanShiftConfig& cfg);

/// Area of the pixel set over the area of its minimal rotated bounding
/// rectangle, in percent. Pixels are unit squares centered on integer
/// (col, row) positions. Throws EmptySegment.
double mbr_filling(const std::vector<PixelIndex>& pixels);

struct RefineConfig {
  double min_area = 20.0;       ///< m^2
  double max_area = 2000.0;     ///< m^2
  double mbr_threshold = 50.0;  ///< percent

  bool valid() const { return min_area > 0 && max_area > min_area && mbr_threshold > 0; }
};

struct CandidateSegment {
  int id = 0;  ///< label in the segment map
  std::vector<PixelIndex> pixels;
  Point2 centroid = Point2::Zero();  ///< (col, row)
  double area = 0.0;                 ///< m^2
  RotatedRect mbr;                   ///< pixel coordinates
  double mbr_filling = 0.0;          ///< percent
  double direction = 0.0;            ///< MBR major axis in the image (x = col, y = row), [0, pi)
};

/// Keeps segments whose area lies within [min_area, max_area] and whose MBR
/// filling reaches the threshold.
std::vector<CandidateSegment> refine_segments(const LabelGrid& labels, double gsd, const RefineConfig& cfg);

/// Sidecar table: `id,centroid_col,centroid_row,area_m2,direction_rad,mbr_filling_pct`.
std::string format_segment_table(const std::vector<CandidateSegment>& segments);

}  // namespace lidreg
