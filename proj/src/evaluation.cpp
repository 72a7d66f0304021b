#include <lidreg/evaluation.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

#include <lidreg/error.hpp>
#include <lidreg/text_format.hpp>

namespace lidreg {

MeanStd mean_std(const std::vector<double>& values) {
  if (values.empty()) throw Error(ErrorKind::EmptySet, "no values to summarize");
  double sum = 0.0;
  for (const double v : values) sum += v;
  const double mean = sum / static_cast<double>(values.size());
  double var = 0.0;
  for (const double v : values) var += (v - mean) * (v - mean);
  return {mean, std::sqrt(var / static_cast<double>(values.size()))};
}

MeanStd centroid_discrepancy(const std::vector<CheckPointPair>& pairs) {
  std::vector<double> d;
  d.reserve(pairs.size());
  for (const auto& p : pairs) d.push_back((p.image - p.lidar).norm());
  return mean_std(d);
}

double discrepancy_gain(double before, double after) { return (before - after) / before * 100.0; }

double peng_line_distance(const LineSegment2D& p, const LineSegment2D& q) {
  return 0.5 * (point_segment_distance(p.a, q.a, q.b) + point_segment_distance(p.b, q.a, q.b));
}

double hausdorff_segment_distance(const LineSegment2D& p, const LineSegment2D& q) {
  return std::max({point_segment_distance(p.a, q.a, q.b), point_segment_distance(p.b, q.a, q.b),
                   point_segment_distance(q.a, p.a, p.b), point_segment_distance(q.b, p.a, p.b)});
}

MeanStd pair_line_report(const std::vector<std::pair<LineSegment2D, LineSegment2D>>& pairs) {
  std::vector<double> d;
  d.reserve(pairs.size());
  for (const auto& [p, q] : pairs) d.push_back(hausdorff_segment_distance(p, q));
  return mean_std(d);
}

std::vector<std::pair<LineSegment2D, LineSegment2D>> parse_segment_pairs(std::string_view text) {
  std::string cleaned(text);
  std::replace(cleaned.begin(), cleaned.end(), ',', ' ');
  std::istringstream in(cleaned);
  std::vector<std::pair<LineSegment2D, LineSegment2D>> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream fields(line);
    double v[8];
    for (double& x : v) {
      if (!(fields >> x)) throw Error(ErrorKind::IoError, "segment pair line " + std::to_string(line_no) + " is malformed");
    }
    out.push_back({{{v[0], v[1]}, {v[2], v[3]}}, {{v[4], v[5]}, {v[6], v[7]}}});
  }
  return out;
}

std::string format_segment_pairs(const std::vector<std::pair<LineSegment2D, LineSegment2D>>& pairs) {
  std::string out;
  for (const auto& [p, q] : pairs) {
    out += format_double(p.a.x()) + "," + format_double(p.a.y()) + "," + format_double(p.b.x()) + "," +
           format_double(p.b.y()) + "," + format_double(q.a.x()) + "," + format_double(q.a.y()) + "," +
           format_double(q.b.x()) + "," + format_double(q.b.y()) + "\n";
  }
  return out;
}

std::string format_stage_table(const std::vector<StageRow>& rows) {
  std::ostringstream out;
  out << "stage,mean_m,std_m,gain_percent\n";
  for (const auto& r : rows) {
    const double base = rows.front().stats.mean;
    const double gain = base > 0 ? discrepancy_gain(base, r.stats.mean) : 0.0;
    out << r.stage << ',' << format_double(r.stats.mean) << ',' << format_double(r.stats.std) << ','
        << format_double(gain) << '\n';
  }
  return out.str();
}

}  // namespace lidreg
