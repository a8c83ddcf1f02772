// SPDX-License-Identifier: Apache-2.0
#include "olaq/outlier.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <string>

#include "olaq/error.hpp"
#include "olaq/serialize.hpp"

namespace olaq {

bool OutlierMask::contains(std::size_t index) const {
  return std::ranges::binary_search(indices, index);
}

double OutlierMask::fraction() const noexcept {
  if (extent == 0) return 0.0;
  return static_cast<double>(indices.size()) / static_cast<double>(extent);
}

namespace {

void require_gamma(float gamma) {
  if (!(gamma > 0.0f) || !std::isfinite(gamma)) {
    throw ConfigError("gamma must be a positive finite threshold, got " +
                      std::to_string(gamma));
  }
}

void require_matrix(const FloatTensor& x, const char* what) {
  if (!x.is_matrix()) {
    throw ShapeError(std::string(what) + " needs a 2-D tensor, got " +
                     std::to_string(x.ndim()) + " dimensions");
  }
}

}  // namespace

OutlierMask detect_outliers(const FloatTensor& x, float gamma, MaskMode mode) {
  require_gamma(gamma);
  validate(x);
  OutlierMask mask;
  mask.mode = mode;
  mask.total = x.size();
  if (mode == MaskMode::PerElement) {
    mask.extent = x.size();
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (std::fabs(x.values[i]) > gamma) mask.indices.push_back(i);
    }
    return mask;
  }

  require_matrix(x, "per-column outlier detection");
  mask.extent = x.cols();
  std::vector<float> col_max(x.cols(), 0.0f);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t c = 0; c < x.cols(); ++c) {
      col_max[c] = std::max(col_max[c], std::fabs(x.at(r, c)));
    }
  }
  for (std::size_t c = 0; c < x.cols(); ++c) {
    if (col_max[c] > gamma) mask.indices.push_back(c);
  }
  return mask;
}

SplitValue split_outlier_value(float x, float gamma) {
  const double g = gamma;
  const double width = 2.0 * g;
  const double xv = x;
  double m = std::floor((xv + g) / width);
  SplitValue s{xv - m * width, m * width};
  // The quotient can round across an integer near bin edges; step the
  // multiple until the residual is back in [-g, g).
  while (s.residual < -g) {
    m -= 1.0;
    s = {xv - m * width, m * width};
  }
  while (s.residual >= g) {
    m += 1.0;
    s = {xv - m * width, m * width};
  }
  return s;
}

Approach1Decomposition decompose_approach1(const FloatTensor& x, float gamma) {
  require_matrix(x, "unified-scale decomposition");
  Approach1Decomposition d;
  d.gamma = gamma;
  d.mask = detect_outliers(x, gamma, MaskMode::PerColumn);

  FloatTensor regular = x;
  FloatTensor outlier = FloatTensor::zeros(x.shape);
  for (std::size_t c : d.mask.indices) {
    for (std::size_t r = 0; r < x.rows(); ++r) {
      outlier.at(r, c) = x.at(r, c);
      regular.at(r, c) = 0.0f;
    }
  }
  d.regular = quantize_block(regular, kRegularBits);
  d.outlier = quantize_block(outlier, kUnifiedOutlierBits);
  return d;
}

std::pair<FloatTensor, FloatTensor> split_tensor(const FloatTensor& x,
                                                 const OutlierMask& mask,
                                                 float gamma) {
  if (mask.mode != MaskMode::PerElement || mask.total != x.size()) {
    throw MaskMismatch("split needs a per-element mask over the same tensor");
  }
  FloatTensor merged = x;
  FloatTensor coarse = FloatTensor::zeros(x.shape);
  for (std::size_t i : mask.indices) {
    const SplitValue s = split_outlier_value(x.values[i], gamma);
    merged.values[i] = static_cast<float>(s.residual);
    coarse.values[i] = static_cast<float>(s.coarse);
  }
  return {std::move(merged), std::move(coarse)};
}

Approach2Decomposition decompose_approach2(const FloatTensor& x, float gamma) {
  Approach2Decomposition d;
  d.gamma = gamma;
  d.mask = detect_outliers(x, gamma, MaskMode::PerElement);
  auto [merged, coarse] = split_tensor(x, d.mask, gamma);
  // One block for the merged tensor: both populations are bounded by gamma,
  // so they share S_x without clamping.
  d.merged = quantize_block(merged, kRegularBits);
  d.coarse = quantize_block(coarse, kRegularBits);
  return d;
}

namespace {

FloatTensor add(const FloatTensor& a, const FloatTensor& b) {
  FloatTensor out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out.values[i] += b.values[i];
  return out;
}

}  // namespace

FloatTensor reconstruct(const Approach1Decomposition& d) {
  return add(dequantize(d.regular), dequantize(d.outlier));
}

FloatTensor reconstruct(const Approach2Decomposition& d) {
  return add(dequantize(d.merged), dequantize(d.coarse));
}

std::pair<QuantizedBlock, QuantizedBlock> partition_weight_rows(
    const FloatTensor& w, const OutlierMask& mask) {
  require_matrix(w, "weight partitioning");
  if (mask.mode != MaskMode::PerColumn || mask.extent != w.rows()) {
    throw MaskMismatch("weight rows (" + std::to_string(w.rows()) +
                       ") do not match the activation column mask (" +
                       std::to_string(mask.extent) + " columns)");
  }
  FloatTensor regular = w;
  FloatTensor outlier = FloatTensor::zeros(w.shape);
  for (std::size_t r : mask.indices) {
    for (std::size_t c = 0; c < w.cols(); ++c) {
      outlier.at(r, c) = w.at(r, c);
      regular.at(r, c) = 0.0f;
    }
  }
  return {quantize_block(regular, kRegularBits),
          quantize_block(outlier, kUnifiedOutlierBits)};
}

void write_mask(std::ostream& os, const OutlierMask& mask) {
  io::write_u8(os, static_cast<std::uint8_t>(mask.mode));
  io::write_u64(os, mask.indices.size());
  for (std::size_t i : mask.indices) io::write_u64(os, i);
}

OutlierMask read_mask(std::istream& is, const Shape& source_shape) {
  OutlierMask mask;
  const auto mode = io::read_u8(is);
  if (mode > 1) throw FormatError("unknown mask mode " + std::to_string(mode));
  mask.mode = static_cast<MaskMode>(mode);
  mask.total = element_count(source_shape);
  if (mask.mode == MaskMode::PerColumn) {
    if (source_shape.size() != 2) {
      throw FormatError("per-column mask over a non-2-D tensor");
    }
    mask.extent = source_shape[1];
  } else {
    mask.extent = mask.total;
  }
  const std::uint64_t count = io::read_u64(is);
  if (count > mask.extent) throw FormatError("mask has more indices than slots");
  mask.indices.resize(count);
  for (std::size_t k = 0; k < count; ++k) {
    mask.indices[k] = io::read_u64(is);
    if (mask.indices[k] >= mask.extent ||
        (k > 0 && mask.indices[k] <= mask.indices[k - 1])) {
      throw FormatError("mask indices must be strictly increasing and in range");
    }
  }
  return mask;
}

namespace {

void write_pair(std::ostream& os, ContainerKind kind, float gamma,
                const QuantizedBlock& first, const QuantizedBlock& second,
                const OutlierMask& mask) {
  write_container_header(os, kind);
  io::write_f32(os, gamma);
  write_tensor(os, first);
  write_tensor(os, second);
  write_mask(os, mask);
}

void expect_kind(std::istream& is, ContainerKind kind) {
  const ContainerKind got = read_container_header(is);
  if (got != kind) {
    throw FormatError("container holds kind " +
                      std::to_string(static_cast<int>(got)) + ", expected " +
                      std::to_string(static_cast<int>(kind)));
  }
}

}  // namespace

void write_decomposition(std::ostream& os, const Approach1Decomposition& d) {
  write_pair(os, ContainerKind::Approach1, d.gamma, d.regular, d.outlier, d.mask);
}

void write_decomposition(std::ostream& os, const Approach2Decomposition& d) {
  write_pair(os, ContainerKind::Approach2, d.gamma, d.merged, d.coarse, d.mask);
}

Approach1Decomposition read_approach1(std::istream& is) {
  expect_kind(is, ContainerKind::Approach1);
  Approach1Decomposition d;
  d.gamma = io::read_f32(is);
  d.regular = read_quantized_block(is);
  d.outlier = read_quantized_block(is);
  d.mask = read_mask(is, d.regular.shape);
  return d;
}

Approach2Decomposition read_approach2(std::istream& is) {
  expect_kind(is, ContainerKind::Approach2);
  Approach2Decomposition d;
  d.gamma = io::read_f32(is);
  d.merged = read_quantized_block(is);
  d.coarse = read_quantized_block(is);
  d.mask = read_mask(is, d.merged.shape);
  return d;
}

}  // namespace olaq
