// SPDX-License-Identifier: Apache-2.0
//
// Block floating-point (dynamic fixed-point) tensors.
//
// A block is a tensor of signed integers sharing one power-of-two scale.
// The scale is derived from the largest binary exponent in the source
// tensor so that the block maximum lands in the upper half of the integer
// range:
//
//   e_max = floor(log2(max |x_i|))
//   scale_exp = e_max - bits + 2
//   q_i = clamp(round_half_even(x_i / 2^scale_exp), -(2^(bits-1) - 1), 2^(bits-1) - 1)
//
// Dequantization multiplies by 2^scale_exp, which is exact in single
// precision for every in-range exponent.
#pragma once

#include <cstdint>
#include <vector>

#include "olaq/tensor.hpp"

namespace olaq {

/// Bit widths the block format accepts. 12- and 16-bit values live in the
/// same 16-bit containers as 8-bit ones.
inline constexpr int kSupportedBits[] = {8, 12, 16};

bool is_supported_bit_width(int bits) noexcept;

/// Largest magnitude representable at `bits`: 2^(bits-1) - 1.
constexpr std::int32_t max_level(int bits) noexcept {
  return (std::int32_t{1} << (bits - 1)) - 1;
}

struct QuantizedBlock {
  Shape shape;
  std::vector<std::int16_t> q;
  int bit_width = 8;
  int scale_exp = 0;

  std::size_t size() const noexcept { return q.size(); }
  bool is_matrix() const noexcept { return shape.size() == 2; }
  std::size_t rows() const noexcept { return shape.at(0); }
  std::size_t cols() const noexcept { return shape.at(1); }

  bool operator==(const QuantizedBlock&) const = default;
};

/// Checks container length, bit width and the symmetric range invariant.
void validate(const QuantizedBlock& qb);

enum class Granularity { PerTensor, PerRow };

QuantizedBlock quantize_block(const FloatTensor& x, int bits);

/// One block per row of a 2-D tensor; each block has shape {1, cols}.
std::vector<QuantizedBlock> quantize_rows(const FloatTensor& x, int bits);

/// Dispatches on granularity. PerTensor returns a single block.
std::vector<QuantizedBlock> quantize(const FloatTensor& x, int bits,
                                     Granularity granularity);

FloatTensor dequantize(const QuantizedBlock& qb);
FloatTensor dequantize_rows(const std::vector<QuantizedBlock>& rows);

/// 2^scale_exp.
double quantization_step(const QuantizedBlock& qb) noexcept;

QuantizedBlock transpose(const QuantizedBlock& qb);

}  // namespace olaq
