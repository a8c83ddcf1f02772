// SPDX-License-Identifier: Apache-2.0
//
// Outlier detection and the two outlier-aware decompositions of an
// activation tensor.
//
// Unified scale: outlier feature columns are moved into their own 12-bit
// block; the remaining columns form an ordinary 8-bit block.
//
//   X ~= S_x * X_int8 + S_out * X_int12
//
// Split (tiling): every outlier value x is split into a coarse part that
// is an integer multiple of 2*gamma and a residual in [-gamma, gamma):
//
//   coarse   = floor((x + gamma) / (2 * gamma)) * 2 * gamma
//   residual = x - coarse
//
// Residuals are merged with the non-outlier values into one 8-bit block,
// and the coarse parts get a second 8-bit block with its own scale:
//
//   X ~= S_x * (X_int8 + residual_int8) + S_out * coarse_int8
#pragma once

#include <cstddef>
#include <iosfwd>
#include <utility>
#include <vector>

#include "olaq/bfp.hpp"
#include "olaq/tensor.hpp"

namespace olaq {

inline constexpr float kDefaultGamma = 5.0f;

enum class MaskMode : std::uint8_t { PerElement = 0, PerColumn = 1 };

struct OutlierMask {
  MaskMode mode = MaskMode::PerElement;
  /// Flat element indices (PerElement) or column indices (PerColumn),
  /// strictly increasing.
  std::vector<std::size_t> indices;
  /// Element count of the source tensor.
  std::size_t total = 0;
  /// Size of the index domain: `total` for PerElement, column count for
  /// PerColumn.
  std::size_t extent = 0;

  bool empty() const noexcept { return indices.empty(); }
  bool contains(std::size_t index) const;
  /// Fraction of source elements covered by the mask.
  double fraction() const noexcept;

  bool operator==(const OutlierMask&) const = default;
};

OutlierMask detect_outliers(const FloatTensor& x, float gamma, MaskMode mode);

/// Residual and coarse part of one outlier value. Both are held in double
/// so that residual + coarse == x is exact for every single-precision x.
struct SplitValue {
  double residual = 0.0;
  double coarse = 0.0;
};

SplitValue split_outlier_value(float x, float gamma);

struct Approach1Decomposition {
  QuantizedBlock regular;  // 8-bit, outlier columns zeroed
  QuantizedBlock outlier;  // 12-bit, zero off outlier columns
  OutlierMask mask;        // PerColumn
  float gamma = kDefaultGamma;
};

struct Approach2Decomposition {
  QuantizedBlock merged;  // 8-bit, non-outliers plus residuals
  QuantizedBlock coarse;  // 8-bit, zero off outlier positions
  OutlierMask mask;       // PerElement
  float gamma = kDefaultGamma;
};

inline constexpr int kRegularBits = 8;
inline constexpr int kUnifiedOutlierBits = 12;

Approach1Decomposition decompose_approach1(const FloatTensor& x, float gamma);
Approach2Decomposition decompose_approach2(const FloatTensor& x, float gamma);

/// Real-valued tensors that decompose_approach2 quantizes: the merged
/// tensor (non-outliers with residuals written into outlier slots) and the
/// coarse tensor (zero except at outlier positions).
std::pair<FloatTensor, FloatTensor> split_tensor(const FloatTensor& x,
                                                 const OutlierMask& mask,
                                                 float gamma);

FloatTensor reconstruct(const Approach1Decomposition& d);
FloatTensor reconstruct(const Approach2Decomposition& d);

/// Splits weight rows by the per-column activation mask: rows whose index
/// is in the mask go to a 12-bit block, the others to an 8-bit block. Rows
/// not owned by a block are zero in it.
std::pair<QuantizedBlock, QuantizedBlock> partition_weight_rows(
    const FloatTensor& w, const OutlierMask& mask);

void write_mask(std::ostream& os, const OutlierMask& mask);
OutlierMask read_mask(std::istream& is, const Shape& source_shape);

void write_decomposition(std::ostream& os, const Approach1Decomposition& d);
void write_decomposition(std::ostream& os, const Approach2Decomposition& d);
Approach1Decomposition read_approach1(std::istream& is);
Approach2Decomposition read_approach2(std::istream& is);

}  // namespace olaq
