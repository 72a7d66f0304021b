#include <lidreg/image_io.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>
#include <vector>

#include <png.h>

#include <lidreg/error.hpp>
#include <lidreg/text_format.hpp>

namespace lidreg {

Raster luma(const RgbImage& image) {
  Raster out(image.frame());
  for (std::size_t i = 0; i < image.size(); ++i) {
    const auto& p = image[i];
    out[i] = 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2];
  }
  return out;
}

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  return f;
}

void png_error_handler(png_structp, png_const_charp msg) { throw Error(ErrorKind::IoError, std::string("libpng: ") + msg); }
void png_warning_handler(png_structp, png_const_charp) {}

void write_png(const std::filesystem::path& path, int rows, int cols, int color_type, int bit_depth,
               const std::vector<png_bytep>& row_pointers) {
  auto file = open_file(path, "wb");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_handler, png_warning_handler);
  if (!png) throw Error(ErrorKind::IoError, "png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  try {
    png_init_io(png, file.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(cols), static_cast<png_uint_32>(rows), bit_depth, color_type,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    if (bit_depth == 16) png_set_swap(png);
    png_write_image(png, const_cast<png_bytepp>(row_pointers.data()));
    png_write_end(png, nullptr);
  } catch (...) {
    png_destroy_write_struct(&png, &info);
    throw;
  }
  png_destroy_write_struct(&png, &info);
}

struct PngData {
  int rows = 0;
  int cols = 0;
  std::vector<unsigned char> bytes;
};

PngData read_png(const std::filesystem::path& path, bool want_rgb8) {
  auto file = open_file(path, "rb");
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_handler, png_warning_handler);
  if (!png) throw Error(ErrorKind::IoError, "png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  PngData out;
  try {
    png_init_io(png, file.get());
    png_read_info(png, info);
    const int color = png_get_color_type(png, info);
    const int depth = png_get_bit_depth(png, info);
    if (want_rgb8) {
      if (depth == 16) png_set_strip_16(png);
      if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
      if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA) png_set_gray_to_rgb(png);
      if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
      if (depth < 8) png_set_packing(png);
    } else {
      if (color != PNG_COLOR_TYPE_GRAY || depth != 16) throw Error(ErrorKind::IoError, path.string() + ": expected 16-bit grayscale PNG");
      png_set_swap(png);
    }
    png_read_update_info(png, info);
    out.rows = static_cast<int>(png_get_image_height(png, info));
    out.cols = static_cast<int>(png_get_image_width(png, info));
    const std::size_t stride = png_get_rowbytes(png, info);
    out.bytes.resize(stride * out.rows);
    std::vector<png_bytep> rows(out.rows);
    for (int r = 0; r < out.rows; ++r) rows[r] = out.bytes.data() + r * stride;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
  } catch (...) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw;
  }
  png_destroy_read_struct(&png, &info, nullptr);
  return out;
}

RgbImage read_ppm(const std::filesystem::path& path) {
  const std::string bytes = read_text_file(path);
  std::istringstream in(bytes);
  std::string magic;
  in >> magic;
  auto next_int = [&]() {
    int v = 0;
    while (in >> std::ws && in.peek() == '#') {
      std::string comment;
      std::getline(in, comment);
    }
    if (!(in >> v)) throw Error(ErrorKind::IoError, path.string() + ": malformed PPM header");
    return v;
  };
  if (magic != "P6") throw Error(ErrorKind::IoError, path.string() + ": only binary P6 PPM is supported");
  const int cols = next_int();
  const int rows = next_int();
  const int maxval = next_int();
  if (maxval != 255 || rows <= 0 || cols <= 0) throw Error(ErrorKind::IoError, path.string() + ": unsupported PPM header");
  in.get();
  const auto offset = static_cast<std::size_t>(in.tellg());
  if (bytes.size() < offset + static_cast<std::size_t>(rows) * cols * 3) {
    throw Error(ErrorKind::IoError, path.string() + ": truncated PPM data");
  }
  RgbImage image(rows, cols);
  std::memcpy(image.data(), bytes.data() + offset, image.size() * 3);
  return image;
}

void write_ppm(const std::filesystem::path& path, const RgbImage& image) {
  std::string out = "P6\n" + std::to_string(image.cols()) + " " + std::to_string(image.rows()) + "\n255\n";
  const std::size_t header = out.size();
  out.resize(header + image.size() * 3);
  std::memcpy(out.data() + header, image.data(), image.size() * 3);
  write_text_file(path, out);
}

}  // namespace

RgbImage read_rgb_image(const std::filesystem::path& path) {
  if (path.extension() == ".ppm") return read_ppm(path);
  const PngData data = read_png(path, true);
  RgbImage image(data.rows, data.cols);
  std::memcpy(image.data(), data.bytes.data(), image.size() * 3);
  return image;
}

void write_rgb_image(const std::filesystem::path& path, const RgbImage& image) {
  if (path.extension() == ".ppm") {
    write_ppm(path, image);
    return;
  }
  RgbImage copy = image;
  std::vector<png_bytep> rows(image.rows());
  for (int r = 0; r < image.rows(); ++r) rows[r] = reinterpret_cast<png_bytep>(copy.data() + static_cast<std::size_t>(r) * image.cols());
  write_png(path, image.rows(), image.cols(), PNG_COLOR_TYPE_RGB, 8, rows);
}

void write_png_gray8(const std::filesystem::path& path, const Grid<std::uint8_t>& image) {
  Grid<std::uint8_t> copy = image;
  std::vector<png_bytep> rows(image.rows());
  for (int r = 0; r < image.rows(); ++r) rows[r] = copy.data() + static_cast<std::size_t>(r) * image.cols();
  write_png(path, image.rows(), image.cols(), PNG_COLOR_TYPE_GRAY, 8, rows);
}

void write_png_gray16(const std::filesystem::path& path, const Grid<std::uint16_t>& image) {
  Grid<std::uint16_t> copy = image;
  std::vector<png_bytep> rows(image.rows());
  for (int r = 0; r < image.rows(); ++r) {
    rows[r] = reinterpret_cast<png_bytep>(copy.data() + static_cast<std::size_t>(r) * image.cols());
  }
  write_png(path, image.rows(), image.cols(), PNG_COLOR_TYPE_GRAY, 16, rows);
}

Grid<std::uint16_t> read_png_gray16(const std::filesystem::path& path) {
  const PngData data = read_png(path, false);
  Grid<std::uint16_t> image(data.rows, data.cols);
  std::memcpy(image.data(), data.bytes.data(), image.size() * 2);
  return image;
}

Grid<std::uint16_t> scale_to_u16(const Raster& raster) {
  Grid<std::uint16_t> out(raster.frame());
  if (raster.empty()) return out;
  const auto [lo, hi] = std::minmax_element(raster.values().begin(), raster.values().end());
  const double range = *hi - *lo;
  for (std::size_t i = 0; i < raster.size(); ++i) {
    const double t = range > 0 ? (raster[i] - *lo) / range : 0.0;
    out[i] = static_cast<std::uint16_t>(std::lround(t * 65535.0));
  }
  return out;
}

void write_float_raster(const std::filesystem::path& path, const Raster& raster, const std::string& channel,
                        const std::string& pose_hash) {
  std::string out = "rows = " + std::to_string(raster.rows()) + "\ncols = " + std::to_string(raster.cols()) +
                    "\nchannel = " + channel + "\npose_hash = " + pose_hash + "\ndata\n";
  const std::size_t header = out.size();
  out.resize(header + raster.size() * sizeof(float));
  for (std::size_t i = 0; i < raster.size(); ++i) {
    const float v = static_cast<float>(raster[i]);
    std::memcpy(out.data() + header + i * sizeof(float), &v, sizeof(float));
  }
  write_text_file(path, out);
}

Raster read_float_raster(const std::filesystem::path& path, RasterHeader* header) {
  const std::string bytes = read_text_file(path);
  const auto marker = bytes.find("\ndata\n");
  if (marker == std::string::npos) throw Error(ErrorKind::IoError, path.string() + ": missing raster header terminator");
  const auto fields = parse_key_values(std::string_view(bytes).substr(0, marker));
  RasterHeader h;
  try {
    h.rows = static_cast<int>(parse_integer(fields.at("rows"), "rows"));
    h.cols = static_cast<int>(parse_integer(fields.at("cols"), "cols"));
    h.channel = fields.count("channel") ? fields.at("channel") : "";
    h.pose_hash = fields.count("pose_hash") ? fields.at("pose_hash") : "";
  } catch (const std::out_of_range&) {
    throw Error(ErrorKind::IoError, path.string() + ": raster header lacks rows/cols");
  }
  const std::size_t offset = marker + 6;
  Raster raster(h.rows, h.cols);
  if (bytes.size() != offset + raster.size() * sizeof(float)) {
    throw Error(ErrorKind::IoError, path.string() + ": raster payload size mismatch");
  }
  for (std::size_t i = 0; i < raster.size(); ++i) {
    float v = 0;
    std::memcpy(&v, bytes.data() + offset + i * sizeof(float), sizeof(float));
    raster[i] = v;
  }
  if (header) *header = h;
  return raster;
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace lidreg
