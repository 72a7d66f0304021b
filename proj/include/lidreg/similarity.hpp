#pragma once

#include <initializer_list>
#include <span>
#include <vector>

#include <lidreg/grid.hpp>

namespace lidreg {

struct HistogramSpec {
  int bins = 64;       ///< per axis for two-image MI
  int ncmi_bins = 32;  ///< per axis for the three-image NCMI table

  bool valid() const { return bins >= 2 && ncmi_bins >= 2; }
};

/// Normalized joint histogram over 1-3 co-registered rasters. Each raster is
/// binned uniformly over its own [min, max]; a constant raster falls in bin 0.
struct JointPdf {
  int dims = 0;
  int bins = 0;
  std::vector<double> p;  ///< row-major, first raster varies slowest

  /// Marginal over the listed axes (in increasing order).
  JointPdf marginal(std::initializer_list<int> keep) const;
};

JointPdf joint_histogram(std::span<const Raster* const> images, int bins);
JointPdf joint_histogram(const Raster& a, int bins);
JointPdf joint_histogram(const Raster& a, const Raster& b, int bins);
JointPdf joint_histogram(const Raster& a, const Raster& b, const Raster& c, int bins);

/// Shannon entropy in bits; 0 log 0 = 0. Throws NotNormalized unless the
/// masses sum to 1 within 1e-9.
double entropy(std::span<const double> pdf);

/// H(A) + H(B) - H(A, B), in bits.
double mutual_information(const Raster& a, const Raster& b, const HistogramSpec& spec);

/// (H(A, B) + H(C)) / H(A, B, C) from one ncmi_bins^3 table. Throws
/// DegenerateEntropy when the triple entropy is zero.
double ncmi(const Raster& a, const Raster& b, const Raster& c, const HistogramSpec& spec);

}  // namespace lidreg
