#include <lidreg/matching.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <unordered_map>

#include <lidreg/error.hpp>
#include <lidreg/text_format.hpp>

namespace lidreg {

std::vector<MatchCandidate> lidar_candidates(const std::vector<BuildingRegion>& regions, const CameraPose& pose_hint) {
  const ProjectionMatrix P = build_camera_matrix(pose_hint);
  std::vector<MatchCandidate> out;
  out.reserve(regions.size());
  for (const auto& r : regions) {
    const Eigen::Vector3d c(r.centroid.x(), r.centroid.y(), r.mean_elevation);
    const Eigen::Vector3d axis(std::cos(r.direction), std::sin(r.direction), 0.0);
    const Point2 a = project_point(P, c);
    const Point2 b = project_point(P, c + 10.0 * axis);
    double dir = std::atan2(b.y() - a.y(), b.x() - a.x());
    if (dir < 0) dir += std::numbers::pi;
    if (dir >= std::numbers::pi) dir -= std::numbers::pi;
    out.push_back({r.id, a, r.area, dir, r.centroid});
  }
  return out;
}

std::vector<MatchCandidate> image_candidates(const std::vector<CandidateSegment>& segments) {
  std::vector<MatchCandidate> out;
  out.reserve(segments.size());
  for (const auto& s : segments) out.push_back({s.id, s.centroid, s.area, s.direction, Point2::Zero()});
  return out;
}

namespace {

const MatchCandidate& largest_dominant(const std::vector<MatchCandidate>& set, double dominance, const char* which) {
  if (set.empty()) throw Error(ErrorKind::AmbiguousLargest, std::string(which) + " candidate set is empty");
  std::vector<const MatchCandidate*> sorted;
  for (const auto& c : set) sorted.push_back(&c);
  std::sort(sorted.begin(), sorted.end(), [](const auto* a, const auto* b) { return a->area > b->area; });
  if (sorted.size() > 1 && sorted[0]->area < dominance * sorted[1]->area) {
    throw Error(ErrorKind::AmbiguousLargest, std::string(which) + " largest candidate is not dominant");
  }
  return *sorted[0];
}

}  // namespace

Point2 largest_segment_translation(const std::vector<MatchCandidate>& lidar, const std::vector<MatchCandidate>& image,
                                   double dominance) {
  const MatchCandidate& l = largest_dominant(lidar, dominance, "LiDAR");
  const MatchCandidate& i = largest_dominant(image, dominance, "image");
  return i.center - l.center;
}

std::vector<Correspondence> initial_match(const std::vector<MatchCandidate>& lidar,
                                          const std::vector<MatchCandidate>& image, const Point2& translation) {
  struct Pair {
    double d;
    std::size_t li;
    std::size_t ii;
  };
  std::vector<Pair> pairs;
  pairs.reserve(lidar.size() * image.size());
  for (std::size_t a = 0; a < lidar.size(); ++a) {
    for (std::size_t b = 0; b < image.size(); ++b) {
      pairs.push_back({(lidar[a].center + translation - image[b].center).norm(), a, b});
    }
  }
  std::sort(pairs.begin(), pairs.end(), [&](const Pair& x, const Pair& y) {
    if (x.d != y.d) return x.d < y.d;
    if (lidar[x.li].id != lidar[y.li].id) return lidar[x.li].id < lidar[y.li].id;
    return image[x.ii].id < image[y.ii].id;
  });
  std::vector<bool> used_l(lidar.size(), false), used_i(image.size(), false);
  std::vector<Correspondence> out;
  for (const auto& p : pairs) {
    if (used_l[p.li] || used_i[p.ii]) continue;
    used_l[p.li] = used_i[p.ii] = true;
    Correspondence c;
    c.lidar_id = lidar[p.li].id;
    c.image_id = image[p.ii].id;
    c.lidar_xy = lidar[p.li].world_xy;
    c.lidar_px = lidar[p.li].center;
    c.image_px = image[p.ii].center;
    out.push_back(c);
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.lidar_id < b.lidar_id; });
  return out;
}

std::vector<std::vector<std::uint8_t>> knn_median_graph(const std::vector<Point2>& points, int k) {
  const std::size_t n = points.size();
  std::vector<std::vector<std::uint8_t>> adj(n, std::vector<std::uint8_t>(n, 0));
  if (n < 2) return adj;
  const std::size_t kk = std::min<std::size_t>(static_cast<std::size_t>(k), n - 1);
  std::vector<double> all;
  all.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) all.push_back((points[i] - points[j]).norm());
  }
  std::nth_element(all.begin(), all.begin() + (all.size() - 1) / 2, all.end());
  const double median = all[(all.size() - 1) / 2];

  std::vector<std::pair<double, std::size_t>> dist;
  for (std::size_t i = 0; i < n; ++i) {
    dist.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) dist.emplace_back((points[i] - points[j]).norm(), j);
    }
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(kk), dist.end());
    for (std::size_t m = 0; m < kk; ++m) {
      if (dist[m].first <= median) adj[i][dist[m].second] = 1;
    }
  }
  return adj;
}

std::vector<Correspondence> gtm_filter(const std::vector<Correspondence>& matches, int k, const Point2& translation) {
  if (k < 1 || matches.size() < static_cast<std::size_t>(k) + 1) {
    throw Error(ErrorKind::TooFewMatches, "GTM needs at least k + 1 = " + std::to_string(k + 1) + " matches, got " +
                                              std::to_string(matches.size()));
  }
  // Canonical order makes the outcome independent of the input order.
  std::vector<Correspondence> current = matches;
  std::sort(current.begin(), current.end(), [](const auto& a, const auto& b) {
    return std::tie(a.lidar_id, a.image_id) < std::tie(b.lidar_id, b.image_id);
  });

  while (current.size() > 1) {
    std::vector<Point2> lp, ip;
    for (const auto& c : current) {
      lp.push_back(c.lidar_px);
      ip.push_back(c.image_px);
    }
    const auto a = knn_median_graph(lp, k);
    const auto b = knn_median_graph(ip, k);
    std::size_t worst = current.size();
    int worst_score = 0;
    double worst_residual = -1.0;
    for (std::size_t i = 0; i < current.size(); ++i) {
      int score = 0;
      for (std::size_t j = 0; j < current.size(); ++j) score += a[i][j] != b[i][j];
      if (score == 0) continue;
      const double residual = (current[i].lidar_px + translation - current[i].image_px).norm();
      if (score > worst_score || (score == worst_score && residual > worst_residual)) {
        worst = i;
        worst_score = score;
        worst_residual = residual;
      }
    }
    if (worst == current.size()) break;
    current.erase(current.begin() + static_cast<std::ptrdiff_t>(worst));
  }
  return current;
}

std::vector<Correspondence> ransac_filter(const std::vector<Correspondence>& matches, double inlier_threshold,
                                          int iterations, std::uint64_t seed) {
  if (matches.size() < 3) throw Error(ErrorKind::TooFewMatches, "RANSAC needs at least 3 matches");
  using C = std::complex<double>;
  const std::size_t n = matches.size();
  std::vector<C> src(n), dst(n);
  for (std::size_t i = 0; i < n; ++i) {
    src[i] = C(matches[i].lidar_px.x(), matches[i].lidar_px.y());
    dst[i] = C(matches[i].image_px.x(), matches[i].image_px.y());
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::vector<bool> best_mask(n, false);
  std::size_t best_count = 0;
  for (int it = 0; it < iterations; ++it) {
    const std::size_t i = pick(rng);
    std::size_t j = pick(rng);
    while (j == i) j = pick(rng);
    if (std::abs(src[j] - src[i]) < 1e-12) continue;
    // Similarity z -> a z + b through the two samples.
    const C a = (dst[j] - dst[i]) / (src[j] - src[i]);
    const C b = dst[i] - a * src[i];
    std::vector<bool> mask(n, false);
    std::size_t count = 0;
    for (std::size_t m = 0; m < n; ++m) {
      if (std::abs(a * src[m] + b - dst[m]) <= inlier_threshold) {
        mask[m] = true;
        ++count;
      }
    }
    if (count > best_count) {
      best_count = count;
      best_mask = std::move(mask);
    }
  }
  std::vector<Correspondence> out;
  for (std::size_t m = 0; m < n; ++m) {
    if (best_mask[m]) out.push_back(matches[m]);
  }
  return out;
}

std::vector<Correspondence> validate_area_direction(const std::vector<Correspondence>& matches,
                                                    const std::vector<MatchCandidate>& lidar,
                                                    const std::vector<MatchCandidate>& image, const MatchConfig& cfg) {
  std::unordered_map<int, const MatchCandidate*> by_lidar, by_image;
  for (const auto& c : lidar) by_lidar[c.id] = &c;
  for (const auto& c : image) by_image[c.id] = &c;
  std::vector<Correspondence> out;
  for (const auto& m : matches) {
    const auto li = by_lidar.find(m.lidar_id);
    const auto ii = by_image.find(m.image_id);
    if (li == by_lidar.end() || ii == by_image.end()) continue;
    const double a = li->second->area, b = ii->second->area;
    const double rel = std::abs(a - b) / std::max(a, b);
    const double ang = axis_angle_difference(li->second->direction, ii->second->direction);
    if (rel <= cfg.area_tolerance && ang <= cfg.direction_tolerance) out.push_back(m);
  }
  return out;
}

std::string format_correspondences(const std::vector<Correspondence>& matches) {
  std::string out;
  for (const auto& m : matches) {
    out += std::to_string(m.lidar_id) + " " + std::to_string(m.image_id) + " " + format_double(m.lidar_xy.x()) + " " +
           format_double(m.lidar_xy.y()) + " " + format_double(m.image_px.x()) + " " + format_double(m.image_px.y()) +
           " " + (m.inlier ? "1" : "0") + "\n";
  }
  return out;
}

std::vector<Correspondence> parse_correspondences(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::vector<Correspondence> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream fields(line);
    Correspondence c;
    double lx, ly, ix, iy;
    int flag;
    if (!(fields >> c.lidar_id >> c.image_id >> lx >> ly >> ix >> iy >> flag)) {
      throw Error(ErrorKind::IoError, "correspondence line " + std::to_string(line_no) + " is malformed");
    }
    c.lidar_xy = {lx, ly};
    c.image_px = {ix, iy};
    c.inlier = flag != 0;
    out.push_back(c);
  }
  return out;
}

}  // namespace lidreg
