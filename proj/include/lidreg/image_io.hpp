#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <lidreg/grid.hpp>

namespace lidreg {

/// 8-bit RGB PNG or binary PPM (P6), chosen by extension.
RgbImage read_rgb_image(const std::filesystem::path& path);
void write_rgb_image(const std::filesystem::path& path, const RgbImage& image);

void write_png_gray8(const std::filesystem::path& path, const Grid<std::uint8_t>& image);
void write_png_gray16(const std::filesystem::path& path, const Grid<std::uint16_t>& image);
Grid<std::uint16_t> read_png_gray16(const std::filesystem::path& path);

/// Affinely maps [min, max] of the raster onto the full 16-bit range.
Grid<std::uint16_t> scale_to_u16(const Raster& raster);

/// Float32 raster: a `name = value` text header (rows, cols, channel,
/// pose_hash) closed by a line `data`, then row-major little-endian float32.
struct RasterHeader {
  int rows = 0;
  int cols = 0;
  std::string channel;
  std::string pose_hash;
};
void write_float_raster(const std::filesystem::path& path, const Raster& raster, const std::string& channel,
                        const std::string& pose_hash);
Raster read_float_raster(const std::filesystem::path& path, RasterHeader* header = nullptr);

/// 64-bit FNV-1a of a byte string, as 16 hex digits.
std::string fnv1a_hex(std::string_view bytes);

}  // namespace lidreg
