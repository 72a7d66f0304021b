#include <lidreg/similarity.hpp>

#include <algorithm>
#include <cmath>

#include <lidreg/error.hpp>

namespace lidreg {

JointPdf JointPdf::marginal(std::initializer_list<int> keep) const {
  JointPdf out;
  out.dims = static_cast<int>(keep.size());
  out.bins = bins;
  std::size_t out_size = 1;
  for (int i = 0; i < out.dims; ++i) out_size *= static_cast<std::size_t>(bins);
  out.p.assign(out_size, 0.0);
  std::vector<int> idx(static_cast<std::size_t>(dims), 0);
  for (std::size_t flat = 0; flat < p.size(); ++flat) {
    std::size_t rem = flat;
    for (int d = dims - 1; d >= 0; --d) {
      idx[static_cast<std::size_t>(d)] = static_cast<int>(rem % bins);
      rem /= bins;
    }
    std::size_t o = 0;
    for (const int axis : keep) o = o * bins + static_cast<std::size_t>(idx[static_cast<std::size_t>(axis)]);
    out.p[o] += p[flat];
  }
  return out;
}

JointPdf joint_histogram(std::span<const Raster* const> images, int bins) {
  if (images.empty() || images.size() > 3) throw Error(ErrorKind::FrameMismatch, "joint histogram takes 1 to 3 rasters");
  if (bins < 2) throw Error(ErrorKind::InvalidConfig, "histogram needs at least 2 bins");
  const Frame frame = images.front()->frame();
  for (const Raster* r : images) {
    if (r->frame() != frame) throw Error(ErrorKind::FrameMismatch, "rasters do not share a frame");
  }
  const std::size_t n = images.front()->size();
  if (n == 0) throw Error(ErrorKind::FrameMismatch, "empty raster");

  std::vector<std::size_t> flat(n, 0);
  for (const Raster* r : images) {
    const auto [lo, hi] = std::minmax_element(r->values().begin(), r->values().end());
    const double low = *lo, range = *hi - *lo;
    const double scale = range > 0 ? bins / range : 0.0;
    const double* v = r->data();
    for (std::size_t i = 0; i < n; ++i) {
      const int b = std::min(bins - 1, static_cast<int>((v[i] - low) * scale));
      flat[i] = flat[i] * bins + static_cast<std::size_t>(b);
    }
  }
  JointPdf pdf;
  pdf.dims = static_cast<int>(images.size());
  pdf.bins = bins;
  std::size_t cells = 1;
  for (int d = 0; d < pdf.dims; ++d) cells *= static_cast<std::size_t>(bins);
  std::vector<std::size_t> counts(cells, 0);
  for (const auto f : flat) ++counts[f];
  pdf.p.resize(cells);
  const double inv = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < cells; ++i) pdf.p[i] = static_cast<double>(counts[i]) * inv;
  return pdf;
}

JointPdf joint_histogram(const Raster& a, int bins) {
  const Raster* list[] = {&a};
  return joint_histogram(list, bins);
}

JointPdf joint_histogram(const Raster& a, const Raster& b, int bins) {
  const Raster* list[] = {&a, &b};
  return joint_histogram(list, bins);
}

JointPdf joint_histogram(const Raster& a, const Raster& b, const Raster& c, int bins) {
  const Raster* list[] = {&a, &b, &c};
  return joint_histogram(list, bins);
}

double entropy(std::span<const double> pdf) {
  double total = 0.0, h = 0.0;
  for (const double p : pdf) {
    total += p;
    if (p > 0) h -= p * std::log2(p);
  }
  if (std::abs(total - 1.0) > 1e-9) throw Error(ErrorKind::NotNormalized, "probabilities sum to " + std::to_string(total));
  return h;
}

double mutual_information(const Raster& a, const Raster& b, const HistogramSpec& spec) {
  const JointPdf joint = joint_histogram(a, b, spec.bins);
  return entropy(joint.marginal({0}).p) + entropy(joint.marginal({1}).p) - entropy(joint.p);
}

double ncmi(const Raster& a, const Raster& b, const Raster& c, const HistogramSpec& spec) {
  const JointPdf joint = joint_histogram(a, b, c, spec.ncmi_bins);
  const double h_abc = entropy(joint.p);
  if (h_abc <= 0.0) throw Error(ErrorKind::DegenerateEntropy, "triple joint entropy is zero");
  return (entropy(joint.marginal({0, 1}).p) + entropy(joint.marginal({2}).p)) / h_abc;
}

}  // namespace lidreg
