// SPDX-License-Identifier: Apache-2.0
#include "olaq/igemm.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <thread>

#include "olaq/error.hpp"

namespace olaq {

void GemmAudit::record(int lhs_bits, int rhs_bits) {
  std::lock_guard lock(mutex_);
  ++counts_[{lhs_bits, rhs_bits}];
}

std::uint64_t GemmAudit::total() const {
  std::lock_guard lock(mutex_);
  std::uint64_t n = 0;
  for (const auto& [key, count] : counts_) n += count;
  return n;
}

std::uint64_t GemmAudit::count(int lhs_bits, int rhs_bits) const {
  std::lock_guard lock(mutex_);
  auto it = counts_.find({lhs_bits, rhs_bits});
  return it == counts_.end() ? 0 : it->second;
}

std::uint64_t GemmAudit::wider_than(int bits) const {
  std::lock_guard lock(mutex_);
  std::uint64_t n = 0;
  for (const auto& [key, count] : counts_) {
    if (key.first > bits || key.second > bits) n += count;
  }
  return n;
}

std::map<std::pair<int, int>, std::uint64_t> GemmAudit::snapshot() const {
  std::lock_guard lock(mutex_);
  return counts_;
}

void GemmAudit::reset() {
  std::lock_guard lock(mutex_);
  counts_.clear();
}

namespace {

struct MatrixView {
  std::size_t rows;
  std::size_t cols;
};

// 1-D blocks act as a single row.
MatrixView view_of(const QuantizedBlock& qb) {
  if (qb.shape.size() == 1) return {1, qb.shape[0]};
  if (qb.shape.size() == 2) return {qb.shape[0], qb.shape[1]};
  throw ShapeError("GEMM operands must be 1-D or 2-D, got " +
                   std::to_string(qb.shape.size()) + " dimensions");
}

constexpr std::size_t kColumnTile = 256;

void gemm_rows(const QuantizedBlock& a, const QuantizedBlock& b,
               std::size_t inner, std::size_t cols, std::size_t row_begin,
               std::size_t row_end, std::int64_t* out) {
  const std::int16_t* aq = a.q.data();
  const std::int16_t* bq = b.q.data();
  for (std::size_t j0 = 0; j0 < cols; j0 += kColumnTile) {
    const std::size_t j1 = std::min(cols, j0 + kColumnTile);
    for (std::size_t i = row_begin; i < row_end; ++i) {
      std::int64_t* acc = out + i * cols;
      for (std::size_t t = 0; t < inner; ++t) {
        const std::int32_t av = aq[i * inner + t];
        if (av == 0) continue;
        const std::int16_t* brow = bq + t * cols;
        for (std::size_t j = j0; j < j1; ++j) {
          acc[j] += static_cast<std::int64_t>(av * static_cast<std::int32_t>(brow[j]));
        }
      }
    }
  }
}

}  // namespace

AccumulatorMatrix igemm(const QuantizedBlock& a, const QuantizedBlock& b,
                        const GemmContext& ctx) {
  const MatrixView av = view_of(a);
  const MatrixView bv = view_of(b);
  if (av.cols != bv.rows || a.q.size() != av.rows * av.cols ||
      b.q.size() != bv.rows * bv.cols) {
    throw ShapeError("igemm inner dimensions differ: " + std::to_string(av.rows) +
                     "x" + std::to_string(av.cols) + " times " +
                     std::to_string(bv.rows) + "x" + std::to_string(bv.cols));
  }
  if (ctx.audit != nullptr) ctx.audit->record(a.bit_width, b.bit_width);

  AccumulatorMatrix acc;
  acc.rows = av.rows;
  acc.cols = bv.cols;
  acc.scale_exp = a.scale_exp + b.scale_exp;
  acc.values.assign(acc.rows * acc.cols, 0);

  const std::size_t workers =
      std::clamp<std::size_t>(ctx.workers, 1, std::max<std::size_t>(acc.rows, 1));
  if (workers == 1) {
    gemm_rows(a, b, av.cols, acc.cols, 0, acc.rows, acc.values.data());
    return acc;
  }

  // Disjoint row ranges: each output element is produced by exactly one
  // worker with the same summation order as the serial path.
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (acc.rows + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(acc.rows, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&, begin, end] {
      gemm_rows(a, b, av.cols, acc.cols, begin, end, acc.values.data());
    });
  }
  pool.clear();
  return acc;
}

namespace {

__extension__ using int128 = __int128;

float to_float(int128 v) noexcept {
  if (v >= std::numeric_limits<std::int64_t>::min() && v <= std::numeric_limits<std::int64_t>::max()) {
    return static_cast<float>(static_cast<std::int64_t>(v));
  }
  return static_cast<float>(v);
}

unsigned magnitude_bits(std::int64_t v) noexcept {
  const auto mag = v < 0 ? static_cast<std::uint64_t>(-(v + 1)) + 1
                         : static_cast<std::uint64_t>(v);
  return static_cast<unsigned>(std::bit_width(mag));
}

}  // namespace

float combine_scaled(std::int64_t lhs, int lhs_exp, std::int64_t rhs,
                     int rhs_exp) noexcept {
  if (rhs == 0) return std::ldexp(to_float(lhs), lhs_exp);
  if (lhs == 0) return std::ldexp(to_float(rhs), rhs_exp);

  std::int64_t fine = lhs, coarse = rhs;
  int fine_exp = lhs_exp, coarse_exp = rhs_exp;
  if (fine_exp > coarse_exp) {
    std::swap(fine, coarse);
    std::swap(fine_exp, coarse_exp);
  }
  const int shift = coarse_exp - fine_exp;
  if (magnitude_bits(coarse) + static_cast<unsigned>(shift) <= 125) {
    const int128 sum = static_cast<int128>(fine) + (static_cast<int128>(coarse) << shift);
    return std::ldexp(to_float(sum), fine_exp);
  }
  // Exponents too far apart to align in 128 bits; the fine term is below
  // single-precision resolution of the coarse one anyway.
  return static_cast<float>(std::ldexp(static_cast<double>(coarse), coarse_exp) +
                            std::ldexp(static_cast<double>(fine), fine_exp));
}

FloatTensor dequantize(const AccumulatorMatrix& acc) {
  FloatTensor out = FloatTensor::zeros({acc.rows, acc.cols});
  for (std::size_t i = 0; i < acc.values.size(); ++i) {
    out.values[i] = combine_scaled(acc.values[i], acc.scale_exp, 0, acc.scale_exp);
  }
  return out;
}

namespace {

FloatTensor combine(const AccumulatorMatrix& a, const AccumulatorMatrix& b) {
  FloatTensor out = FloatTensor::zeros({a.rows, a.cols});
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    out.values[i] = combine_scaled(a.values[i], a.scale_exp, b.values[i], b.scale_exp);
  }
  return out;
}

void require_width(const QuantizedBlock& qb, int bits, const char* what) {
  if (qb.bit_width != bits) {
    throw InvalidInput(std::string(what) + " must be " + std::to_string(bits) +
                       "-bit, got " + std::to_string(qb.bit_width) + "-bit");
  }
}

}  // namespace

FloatTensor tiled_matmul_approach2(const Approach2Decomposition& d,
                                   const QuantizedBlock& w,
                                   const GemmContext& ctx) {
  require_width(d.merged, 8, "merged activations");
  require_width(d.coarse, 8, "coarse outlier activations");
  require_width(w, 8, "weights");
  if (d.merged.shape != d.coarse.shape) {
    throw ShapeError("merged and coarse blocks differ in shape");
  }
  const AccumulatorMatrix regular = igemm(d.merged, w, ctx);
  const AccumulatorMatrix outlier = igemm(d.coarse, w, ctx);
  return combine(regular, outlier);
}

FloatTensor tiled_matmul_approach1(const Approach1Decomposition& d,
                                   const QuantizedBlock& w_regular,
                                   const QuantizedBlock& w_outlier,
                                   const GemmContext& ctx) {
  require_width(d.regular, kRegularBits, "regular activations");
  require_width(d.outlier, kUnifiedOutlierBits, "outlier activations");
  require_width(w_regular, kRegularBits, "regular weights");
  require_width(w_outlier, kUnifiedOutlierBits, "outlier weights");
  if (d.regular.shape != d.outlier.shape) {
    throw ShapeError("regular and outlier blocks differ in shape");
  }
  if (w_regular.shape != w_outlier.shape || !w_outlier.is_matrix()) {
    throw ShapeError("regular and outlier weights differ in shape");
  }
  for (std::size_t r = 0; r < w_outlier.rows(); ++r) {
    if (d.mask.contains(r)) continue;
    for (std::size_t c = 0; c < w_outlier.cols(); ++c) {
      if (w_outlier.q[r * w_outlier.cols() + c] != 0) {
        throw MaskMismatch("outlier weights have a nonzero row " +
                           std::to_string(r) + " outside the activation mask");
      }
    }
  }
  const AccumulatorMatrix regular = igemm(d.regular, w_regular, ctx);
  const AccumulatorMatrix outlier = igemm(d.outlier, w_outlier, ctx);
  return combine(regular, outlier);
}

}  // namespace olaq
