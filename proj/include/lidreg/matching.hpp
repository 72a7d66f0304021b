#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <lidreg/camera.hpp>
#include <lidreg/geometry2d.hpp>
#include <lidreg/image_extract.hpp>
#include <lidreg/lidar_extract.hpp>

namespace lidreg {

/// A building candidate reduced to what matching compares: a centroid in
/// image pixels, an area in m^2 and an axis direction in the image frame.
struct MatchCandidate {
  int id = 0;
  Point2 center = Point2::Zero();  ///< pixels (col, row)
  double area = 0.0;
  double direction = 0.0;
  Point2 world_xy = Point2::Zero();  ///< planimetric centroid for LiDAR candidates, meters
};

/// Projects LiDAR regions into the image with a pose hint. The region
/// centroid is lifted to its mean elevation; the direction is the image-frame
/// angle of the projected major axis.
std::vector<MatchCandidate> lidar_candidates(const std::vector<BuildingRegion>& regions, const CameraPose& pose_hint);
std::vector<MatchCandidate> image_candidates(const std::vector<CandidateSegment>& segments);

struct MatchConfig {
  int gtm_k = 4;
  double area_tolerance = 0.15;
  double direction_tolerance = 2.0 * 3.14159265358979323846 / 180.0;

  bool valid() const { return gtm_k >= 1 && area_tolerance > 0 && direction_tolerance > 0; }
};

struct Correspondence {
  int lidar_id = 0;
  int image_id = 0;
  Point2 lidar_xy = Point2::Zero();  ///< meters, z = 0 plane
  Point2 lidar_px = Point2::Zero();  ///< projected LiDAR centroid, pixels
  Point2 image_px = Point2::Zero();  ///< image segment centroid, pixels
  bool inlier = true;

  bool operator==(const Correspondence&) const = default;
};

/// Image-minus-LiDAR centroid offset of the largest candidate in each set.
/// Throws AmbiguousLargest when either largest area is below 1.2 times its
/// runner-up.
Point2 largest_segment_translation(const std::vector<MatchCandidate>& lidar, const std::vector<MatchCandidate>& image,
                                   double dominance = 1.2);

/// Greedy one-to-one pairing: repeatedly pairs the globally closest remaining
/// (translated LiDAR, image) centers, which are then mutual nearest neighbors.
std::vector<Correspondence> initial_match(const std::vector<MatchCandidate>& lidar,
                                          const std::vector<MatchCandidate>& image, const Point2& translation);

/// Graph transformation matching. Builds k-NN graphs, restricted to edges no
/// longer than the median pairwise distance, over both centroid sets and
/// removes the correspondence with the most disagreeing adjacency row until
/// the graphs coincide. Throws TooFewMatches when fewer than k + 1 matches.
std::vector<Correspondence> gtm_filter(const std::vector<Correspondence>& matches, int k,
                                       const Point2& translation = Point2::Zero());

/// Directed k-NN adjacency under the median-distance rule; exposed for tests.
std::vector<std::vector<std::uint8_t>> knn_median_graph(const std::vector<Point2>& points, int k);

/// RANSAC with a 2-D similarity model; seeded and deterministic.
std::vector<Correspondence> ransac_filter(const std::vector<Correspondence>& matches, double inlier_threshold,
                                          int iterations, std::uint64_t seed);

/// Keeps pairs with relative area difference and undirected axis difference
/// within tolerance.
std::vector<Correspondence> validate_area_direction(const std::vector<Correspondence>& matches,
                                                    const std::vector<MatchCandidate>& lidar,
                                                    const std::vector<MatchCandidate>& image, const MatchConfig& cfg);

/// `lidar_id image_id lx ly ix iy inlier_flag` lines.
std::string format_correspondences(const std::vector<Correspondence>& matches);
std::vector<Correspondence> parse_correspondences(std::string_view text);

}  // namespace lidreg
