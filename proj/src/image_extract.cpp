#include <lidreg/image_extract.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <limits>
#include <numeric>

#include <lidreg/error.hpp>
#include <lidreg/text_format.hpp>

namespace lidreg {
namespace {

const std::array<double, 256>& srgb_linear_table() {
  static const std::array<double, 256> table = [] {
    std::array<double, 256> t{};
    for (int i = 0; i < 256; ++i) {
      const double c = i / 255.0;
      t[i] = c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
    }
    return t;
  }();
  return table;
}

double lab_f(double t) {
  constexpr double delta = 6.0 / 29.0;
  return t > delta * delta * delta ? std::cbrt(t) : t / (3.0 * delta * delta) + 4.0 / 29.0;
}

double color_distance2(const Lab& a, const Lab& b) {
  const double d0 = a[0] - b[0], d1 = a[1] - b[1], d2 = a[2] - b[2];
  return d0 * d0 + d1 * d1 + d2 * d2;
}

class DisjointSet {
public:
  explicit DisjointSet(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  // The smaller root index survives so results do not depend on merge order.
  std::size_t unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return a;
    if (b < a) std::swap(a, b);
    parent_[b] = a;
    return a;
  }

private:
  std::vector<std::size_t> parent_;
};

}  // namespace

Lab srgb_to_lab(const Rgb& rgb) {
  const auto& lin = srgb_linear_table();
  const double r = lin[rgb[0]], g = lin[rgb[1]], b = lin[rgb[2]];
  const double x = 0.4124564 * r + 0.3575761 * g + 0.1804375 * b;
  const double y = 0.2126729 * r + 0.7151522 * g + 0.0721750 * b;
  const double z = 0.0193339 * r + 0.1191920 * g + 0.9503041 * b;
  const double fx = lab_f(x / 0.95047), fy = lab_f(y / 1.0), fz = lab_f(z / 1.08883);
  return {116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

Grid<Lab> rgb_to_lab(const RgbImage& image) {
  Grid<Lab> out(image.frame());
  for (std::size_t i = 0; i < image.size(); ++i) out[i] = srgb_to_lab(image[i]);
  return out;
}

LabelGrid mean_shift_segment(const Grid<Lab>& lab, const MeanShiftConfig& cfg) {
  if (!cfg.valid()) throw Error(ErrorKind::InvalidConfig, "mean-shift bandwidths must be positive");
  const int rows = lab.rows(), cols = lab.cols();
  const double hs = cfg.spatial_bandwidth, hr = cfg.range_bandwidth;
  const double hs2 = hs * hs, hr2 = hr * hr;
  const int radius = static_cast<int>(std::floor(hs));

  // Mode seeking: each pixel climbs independently.
  Grid<Lab> modes(lab.frame());
  for (int r0 = 0; r0 < rows; ++r0) {
    for (int c0 = 0; c0 < cols; ++c0) {
      double pr = r0, pc = c0;
      Lab color = lab(r0, c0);
      for (int it = 0; it < cfg.max_iterations; ++it) {
        const int rc = static_cast<int>(std::lround(pr)), cc = static_cast<int>(std::lround(pc));
        double sr = 0, sc = 0, s0 = 0, s1 = 0, s2 = 0;
        int n = 0;
        for (int r = std::max(0, rc - radius); r <= std::min(rows - 1, rc + radius); ++r) {
          const double dr = r - pr;
          for (int c = std::max(0, cc - radius); c <= std::min(cols - 1, cc + radius); ++c) {
            const double dc = c - pc;
            if (dr * dr + dc * dc > hs2) continue;
            const Lab& v = lab(r, c);
            if (color_distance2(v, color) > hr2) continue;
            sr += r;
            sc += c;
            s0 += v[0];
            s1 += v[1];
            s2 += v[2];
            ++n;
          }
        }
        if (n == 0) break;
        const double inv = 1.0 / n;
        const double nr = sr * inv, nc = sc * inv;
        const Lab ncolor{s0 * inv, s1 * inv, s2 * inv};
        const double shift = ((nr - pr) * (nr - pr) + (nc - pc) * (nc - pc)) / hs2 + color_distance2(ncolor, color) / hr2;
        pr = nr;
        pc = nc;
        color = ncolor;
        if (shift < 1e-4) break;
      }
      modes(r0, c0) = color;
    }
  }

  // Adjacent pixels with nearby modes form one segment.
  const std::size_t n = lab.size();
  DisjointSet sets(n);
  auto index = [cols](int r, int c) { return static_cast<std::size_t>(r) * cols + c; };
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      constexpr int kNeighbors[4][2] = {{0, 1}, {1, -1}, {1, 0}, {1, 1}};
      for (const auto& d : kNeighbors) {
        const int nr = r + d[0], nc = c + d[1];
        if (!lab.contains(nr, nc)) continue;
        if (color_distance2(modes(r, c), modes(nr, nc)) < hr2) sets.unite(index(r, c), index(nr, nc));
      }
    }
  }

  // Absorb small segments into the adjacent segment of closest mean color.
  for (bool changed = true; changed;) {
    changed = false;
    std::vector<std::size_t> size(n, 0);
    std::vector<Lab> sum(n, Lab{0, 0, 0});
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t root = sets.find(i);
      ++size[root];
      for (int k = 0; k < 3; ++k) sum[root][k] += lab[i][k];
    }
    std::map<std::size_t, std::map<std::size_t, int>> adjacency;
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) {
        const std::size_t a = sets.find(index(r, c));
        constexpr int kNeighbors[4][2] = {{0, 1}, {1, -1}, {1, 0}, {1, 1}};
        for (const auto& d : kNeighbors) {
          const int nr = r + d[0], nc = c + d[1];
          if (!lab.contains(nr, nc)) continue;
          const std::size_t b = sets.find(index(nr, nc));
          if (a == b) continue;
          if (static_cast<int>(size[a]) < cfg.min_region) adjacency[a][b] = 1;
          if (static_cast<int>(size[b]) < cfg.min_region) adjacency[b][a] = 1;
        }
      }
    }
    std::vector<std::size_t> small;
    for (const auto& [root, _] : adjacency) small.push_back(root);
    std::stable_sort(small.begin(), small.end(), [&](std::size_t a, std::size_t b) { return size[a] < size[b]; });
    std::vector<bool> touched(n, false);
    for (const std::size_t root : small) {
      if (touched[root]) continue;
      const auto mean = [&](std::size_t s) {
        return Lab{sum[s][0] / size[s], sum[s][1] / size[s], sum[s][2] / size[s]};
      };
      std::size_t best = root;
      double best_d = std::numeric_limits<double>::infinity();
      for (const auto& [nb, _] : adjacency[root]) {
        const double d = color_distance2(mean(root), mean(nb));
        if (d < best_d) {
          best_d = d;
          best = nb;
        }
      }
      if (best == root) continue;
      if (touched[best]) {
        changed = true;  // revisit next pass
        continue;
      }
      touched[root] = touched[best] = true;
      sets.unite(root, best);
      changed = true;
    }
  }

  LabelGrid labels(lab.frame(), 0);
  std::vector<int> label_of_root(n, 0);
  int next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t root = sets.find(i);
    if (label_of_root[root] == 0) label_of_root[root] = ++next;
    labels[i] = label_of_root[root];
  }
  return labels;
}

namespace {

struct RowSpan {
  int row;
  int min_col;
  int max_col;
};

// Hull of the unit squares covering the given row spans.
Polygon span_hull(const std::vector<RowSpan>& spans) {
  std::vector<Point2> corners;
  corners.reserve(spans.size() * 4);
  for (const auto& s : spans) {
    corners.emplace_back(s.min_col - 0.5, s.row - 0.5);
    corners.emplace_back(s.max_col + 0.5, s.row - 0.5);
    corners.emplace_back(s.min_col - 0.5, s.row + 0.5);
    corners.emplace_back(s.max_col + 0.5, s.row + 0.5);
  }
  return convex_hull(corners);
}

std::vector<RowSpan> spans_of(const std::vector<PixelIndex>& pixels) {
  std::map<int, RowSpan> by_row;
  for (const auto& p : pixels) {
    auto [it, inserted] = by_row.try_emplace(p.row, RowSpan{p.row, p.col, p.col});
    if (!inserted) {
      it->second.min_col = std::min(it->second.min_col, p.col);
      it->second.max_col = std::max(it->second.max_col, p.col);
    }
  }
  std::vector<RowSpan> spans;
  for (const auto& [_, s] : by_row) spans.push_back(s);
  return spans;
}

}  // namespace

double mbr_filling(const std::vector<PixelIndex>& pixels) {
  if (pixels.empty()) throw Error(ErrorKind::EmptySegment, "segment has no pixels");
  const RotatedRect rect = min_area_rect(span_hull(spans_of(pixels)));
  return 100.0 * static_cast<double>(pixels.size()) / rect.area();
}

std::vector<CandidateSegment> refine_segments(const LabelGrid& labels, double gsd, const RefineConfig& cfg) {
  if (!cfg.valid() || !(gsd > 0)) throw Error(ErrorKind::InvalidConfig, "refinement thresholds must satisfy 0 < min < max and gsd > 0");
  struct Stats {
    std::size_t count = 0;
    double sum_row = 0, sum_col = 0;
    std::vector<RowSpan> spans;
  };
  std::map<int, Stats> stats;
  for (int r = 0; r < labels.rows(); ++r) {
    for (int c = 0; c < labels.cols(); ++c) {
      const int l = labels(r, c);
      if (l <= 0) continue;
      Stats& s = stats[l];
      ++s.count;
      s.sum_row += r;
      s.sum_col += c;
      if (s.spans.empty() || s.spans.back().row != r) {
        s.spans.push_back({r, c, c});
      } else {
        s.spans.back().max_col = std::max(s.spans.back().max_col, c);
      }
    }
  }

  const double pixel_area = gsd * gsd;
  std::map<int, CandidateSegment> kept;
  for (const auto& [label, s] : stats) {
    const double area = static_cast<double>(s.count) * pixel_area;
    if (area < cfg.min_area || area > cfg.max_area) continue;
    const RotatedRect rect = min_area_rect(span_hull(s.spans));
    const double filling = 100.0 * static_cast<double>(s.count) / rect.area();
    if (filling < cfg.mbr_threshold) continue;
    CandidateSegment seg;
    seg.id = label;
    seg.area = area;
    seg.centroid = Point2(s.sum_col / s.count, s.sum_row / s.count);
    seg.mbr = rect;
    seg.mbr_filling = filling;
    seg.direction = rect.direction;
    seg.pixels.reserve(s.count);
    kept.emplace(label, std::move(seg));
  }
  for (int r = 0; r < labels.rows(); ++r) {
    for (int c = 0; c < labels.cols(); ++c) {
      if (auto it = kept.find(labels(r, c)); it != kept.end()) it->second.pixels.push_back({r, c});
    }
  }
  std::vector<CandidateSegment> out;
  out.reserve(kept.size());
  for (auto& [_, seg] : kept) out.push_back(std::move(seg));
  return out;
}

std::string format_segment_table(const std::vector<CandidateSegment>& segments) {
  std::string out = "id,centroid_col,centroid_row,area_m2,direction_rad,mbr_filling_pct\n";
  for (const auto& s : segments) {
    out += std::to_string(s.id) + "," + format_double(s.centroid.x()) + "," + format_double(s.centroid.y()) + "," +
           format_double(s.area) + "," + format_double(s.direction) + "," + format_double(s.mbr_filling) + "\n";
  }
  return out;
}

}  // namespace lidreg
