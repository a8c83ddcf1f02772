// SPDX-License-Identifier: Apache-2.0
//
// Exact integer GEMM over block floating-point operands, and the tiled
// products that evaluate an outlier decomposition against quantized
// weights using narrow-operand GEMMs only.
#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <utility>
#include <vector>

#include "olaq/bfp.hpp"
#include "olaq/outlier.hpp"
#include "olaq/tensor.hpp"

namespace olaq {

/// Counts GEMM invocations keyed by (lhs bits, rhs bits). Thread-safe.
class GemmAudit {
 public:
  void record(int lhs_bits, int rhs_bits);

  std::uint64_t total() const;
  std::uint64_t count(int lhs_bits, int rhs_bits) const;
  /// GEMMs where either operand is wider than `bits`.
  std::uint64_t wider_than(int bits) const;
  std::map<std::pair<int, int>, std::uint64_t> snapshot() const;
  void reset();

 private:
  mutable std::mutex mutex_;
  std::map<std::pair<int, int>, std::uint64_t> counts_;
};

struct GemmContext {
  /// Row-range splits of the output; results are bit-identical for any value.
  unsigned workers = 1;
  GemmAudit* audit = nullptr;
};

struct AccumulatorMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::int64_t> values;
  int scale_exp = 0;

  std::int64_t at(std::size_t r, std::size_t c) const {
    return values[r * cols + c];
  }
  bool operator==(const AccumulatorMatrix&) const = default;
};

AccumulatorMatrix igemm(const QuantizedBlock& a, const QuantizedBlock& b,
                        const GemmContext& ctx = {});

/// acc * 2^scale_exp, rounded once to single precision per element.
FloatTensor dequantize(const AccumulatorMatrix& acc);

/// Rounds lhs * 2^lhs_exp + rhs * 2^rhs_exp to the nearest float. The sum
/// is formed exactly in 128-bit integers whenever the aligned operands fit,
/// so the only rounding is the final one.
float combine_scaled(std::int64_t lhs, int lhs_exp, std::int64_t rhs,
                     int rhs_exp) noexcept;

/// merged x w and coarse x w as two 8-bit GEMMs, rescaled and summed.
FloatTensor tiled_matmul_approach2(const Approach2Decomposition& d,
                                   const QuantizedBlock& w,
                                   const GemmContext& ctx = {});

/// regular x w_regular (8-bit) plus outlier x w_outlier (12-bit).
/// Throws MaskMismatch if w_outlier has nonzero rows outside d.mask.
FloatTensor tiled_matmul_approach1(const Approach1Decomposition& d,
                                   const QuantizedBlock& w_regular,
                                   const QuantizedBlock& w_outlier,
                                   const GemmContext& ctx = {});

}  // namespace olaq
