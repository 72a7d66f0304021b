#pragma once

#include <algorithm>
#include <array>
#include <cassert>
#include <cstdint>
#include <span>
#include <vector>

namespace lidreg {

/// Raster dimensions. Pixel (row, col) is addressed from the top-left; pixel
/// coordinates used by projections are x = col, y = row with integer values at
/// pixel centers.
struct Frame {
  int rows = 0;
  int cols = 0;

  std::size_t size() const { return static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols); }
  bool valid() const { return rows >= 1 && cols >= 1; }
  bool contains(int row, int col) const { return row >= 0 && row < rows && col >= 0 && col < cols; }
  bool operator==(const Frame&) const = default;
};

/// Rectangular sub-region of a larger frame.
struct Window {
  int row0 = 0;
  int col0 = 0;
  int rows = 0;
  int cols = 0;

  Frame frame() const { return {rows, cols}; }
  bool contains(int row, int col) const {
    return row >= row0 && row < row0 + rows && col >= col0 && col < col0 + cols;
  }
  bool operator==(const Window&) const = default;
};

/// Dense row-major 2-D grid.
template <typename T>
class Grid {
public:
  Grid() = default;
  Grid(int rows, int cols, const T& fill = T{}) : frame_{rows, cols}, data_(frame_.size(), fill) {}
  explicit Grid(Frame frame, const T& fill = T{}) : Grid(frame.rows, frame.cols, fill) {}

  int rows() const { return frame_.rows; }
  int cols() const { return frame_.cols; }
  const Frame& frame() const { return frame_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }
  bool contains(int row, int col) const { return frame_.contains(row, col); }

  T& operator()(int row, int col) {
    assert(contains(row, col));
    return data_[static_cast<std::size_t>(row) * frame_.cols + col];
  }
  const T& operator()(int row, int col) const {
    assert(contains(row, col));
    return data_[static_cast<std::size_t>(row) * frame_.cols + col];
  }

  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }
  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }

  void fill(const T& value) { std::fill(data_.begin(), data_.end(), value); }

  /// Copy of a sub-window; the window must lie inside the grid.
  Grid crop(const Window& w) const {
    Grid out(w.rows, w.cols);
    for (int r = 0; r < w.rows; ++r) {
      for (int c = 0; c < w.cols; ++c) {
        out(r, c) = (*this)(w.row0 + r, w.col0 + c);
      }
    }
    return out;
  }

  bool operator==(const Grid&) const = default;

private:
  Frame frame_;
  std::vector<T> data_;
};

using Rgb = std::array<std::uint8_t, 3>;
using Lab = std::array<double, 3>;
using RgbImage = Grid<Rgb>;
using Raster = Grid<double>;
using BinaryGrid = Grid<std::uint8_t>;
using LabelGrid = Grid<int>;

/// ITU-R BT.601 luma of an RGB image, in [0, 255].
Raster luma(const RgbImage& image);

}  // namespace lidreg
