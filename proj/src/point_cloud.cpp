#include <lidreg/point_cloud.hpp>

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include <lidreg/error.hpp>
#include <lidreg/text_format.hpp>

namespace lidreg {
namespace {

static_assert(std::endian::native == std::endian::little, "binary cloud I/O assumes a little-endian host");

constexpr std::size_t kRecordSize = 4 * sizeof(double) + 1;

PointClass class_from_code(long long code, std::size_t line) {
  if (code < 0 || code > 5) {
    throw Error(ErrorKind::IoError, "record " + std::to_string(line) + ": class code out of range 0-5");
  }
  return static_cast<PointClass>(code);
}

}  // namespace

Bounds3 PointCloud::bounds() const {
  Bounds3 b;
  if (points.empty()) return b;
  b.min = b.max = points.front().position();
  for (const auto& p : points) {
    b.min = b.min.cwiseMin(p.position());
    b.max = b.max.cwiseMax(p.position());
  }
  return b;
}

bool PointCloud::valid() const {
  for (const auto& p : points) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z)) return false;
    if (!(p.intensity >= 0.0 && p.intensity <= 255.0)) return false;
  }
  return true;
}

PointCloud read_cloud_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  PointCloud cloud;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos || line[line.find_first_not_of(" \t\r")] == '#') continue;
    std::istringstream fields(line);
    LidarPoint p;
    long long code = 0;
    if (!(fields >> p.x >> p.y >> p.z >> p.intensity >> code)) {
      throw Error(ErrorKind::IoError, path.string() + ":" + std::to_string(line_no) + ": expected 'x y z intensity class'");
    }
    p.cls = class_from_code(code, line_no);
    cloud.points.push_back(p);
  }
  if (!cloud.valid()) throw Error(ErrorKind::IoError, path.string() + ": non-finite coordinate or intensity outside [0, 255]");
  return cloud;
}

void write_cloud_text(const std::filesystem::path& path, const PointCloud& cloud) {
  std::string out;
  out.reserve(cloud.size() * 48);
  for (const auto& p : cloud.points) {
    out += format_double(p.x);
    out += ' ';
    out += format_double(p.y);
    out += ' ';
    out += format_double(p.z);
    out += ' ';
    out += format_double(p.intensity);
    out += ' ';
    out += std::to_string(static_cast<int>(p.cls));
    out += '\n';
  }
  write_text_file(path, out);
}

PointCloud read_cloud_binary(const std::filesystem::path& path) {
  const std::string bytes = read_text_file(path);
  if (bytes.size() % kRecordSize != 0) {
    throw Error(ErrorKind::IoError, path.string() + ": size is not a multiple of the record size");
  }
  PointCloud cloud;
  cloud.points.resize(bytes.size() / kRecordSize);
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    const char* rec = bytes.data() + i * kRecordSize;
    double v[4];
    std::memcpy(v, rec, sizeof(v));
    auto& p = cloud.points[i];
    p.x = v[0];
    p.y = v[1];
    p.z = v[2];
    p.intensity = v[3];
    p.cls = class_from_code(static_cast<unsigned char>(rec[32]), i + 1);
  }
  if (!cloud.valid()) throw Error(ErrorKind::IoError, path.string() + ": non-finite coordinate or intensity outside [0, 255]");
  return cloud;
}

void write_cloud_binary(const std::filesystem::path& path, const PointCloud& cloud) {
  std::string bytes(cloud.size() * kRecordSize, '\0');
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    const auto& p = cloud.points[i];
    const double v[4] = {p.x, p.y, p.z, p.intensity};
    char* rec = bytes.data() + i * kRecordSize;
    std::memcpy(rec, v, sizeof(v));
    rec[32] = static_cast<char>(p.cls);
  }
  write_text_file(path, bytes);
}

PointCloud read_cloud(const std::filesystem::path& path) {
  return path.extension() == ".bin" ? read_cloud_binary(path) : read_cloud_text(path);
}

void write_cloud(const std::filesystem::path& path, const PointCloud& cloud) {
  if (path.extension() == ".bin") {
    write_cloud_binary(path, cloud);
  } else {
    write_cloud_text(path, cloud);
  }
}

}  // namespace lidreg
