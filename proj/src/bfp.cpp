// SPDX-License-Identifier: Apache-2.0
#include "olaq/bfp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "olaq/error.hpp"

namespace olaq {

bool is_supported_bit_width(int bits) noexcept {
  return std::ranges::find(kSupportedBits, bits) != std::end(kSupportedBits);
}

namespace {

void require_bits(int bits) {
  if (!is_supported_bit_width(bits)) {
    throw ConfigError("unsupported bit width " + std::to_string(bits) +
                      " (expected 8, 12 or 16)");
  }
}

QuantizedBlock quantize_values(std::span<const float> values, Shape shape,
                               int bits) {
  QuantizedBlock out;
  out.shape = std::move(shape);
  out.bit_width = bits;
  out.q.assign(values.size(), 0);

  float max_abs = 0.0f;
  for (float v : values) max_abs = std::max(max_abs, std::fabs(v));
  if (max_abs == 0.0f) {
    out.scale_exp = 0;
    return out;
  }

  const int e_max = std::ilogb(max_abs);
  out.scale_exp = e_max - bits + 2;

  const double limit = max_level(bits);
  for (std::size_t i = 0; i < values.size(); ++i) {
    // Exact: scaling a float by a power of two in double never rounds.
    const double scaled = std::ldexp(static_cast<double>(values[i]), -out.scale_exp);
    // Default rounding mode is round-to-nearest, ties-to-even.
    const double r = std::clamp(std::nearbyint(scaled), -limit, limit);
    out.q[i] = static_cast<std::int16_t>(r);
  }
  return out;
}

}  // namespace

void validate(const QuantizedBlock& qb) {
  require_bits(qb.bit_width);
  if (qb.q.size() != element_count(qb.shape)) {
    throw ShapeError("quantized block value count does not match its shape");
  }
  const std::int32_t lim = max_level(qb.bit_width);
  for (std::int16_t v : qb.q) {
    if (v > lim || v < -lim) {
      throw InvalidInput("quantized value " + std::to_string(v) +
                         " outside the symmetric " +
                         std::to_string(qb.bit_width) + "-bit range");
    }
  }
}

QuantizedBlock quantize_block(const FloatTensor& x, int bits) {
  require_bits(bits);
  validate(x);
  return quantize_values(x.values, x.shape, bits);
}

std::vector<QuantizedBlock> quantize_rows(const FloatTensor& x, int bits) {
  require_bits(bits);
  validate(x);
  if (!x.is_matrix()) throw ShapeError("per-row quantization needs a 2-D tensor");
  std::vector<QuantizedBlock> rows;
  rows.reserve(x.rows());
  const std::span<const float> all = x.values;
  for (std::size_t r = 0; r < x.rows(); ++r) {
    rows.push_back(quantize_values(all.subspan(r * x.cols(), x.cols()),
                                   {1, x.cols()}, bits));
  }
  return rows;
}

std::vector<QuantizedBlock> quantize(const FloatTensor& x, int bits,
                                     Granularity granularity) {
  if (granularity == Granularity::PerRow) return quantize_rows(x, bits);
  return {quantize_block(x, bits)};
}

FloatTensor dequantize(const QuantizedBlock& qb) {
  FloatTensor out;
  out.shape = qb.shape;
  out.values.resize(qb.q.size());
  for (std::size_t i = 0; i < qb.q.size(); ++i) {
    out.values[i] = std::ldexp(static_cast<float>(qb.q[i]), qb.scale_exp);
  }
  return out;
}

FloatTensor dequantize_rows(const std::vector<QuantizedBlock>& rows) {
  if (rows.empty()) return FloatTensor::zeros({0, 0});
  const std::size_t cols = rows.front().size();
  std::vector<float> values;
  values.reserve(rows.size() * cols);
  for (const auto& row : rows) {
    if (row.size() != cols) throw ShapeError("row blocks differ in length");
    const FloatTensor r = dequantize(row);
    values.insert(values.end(), r.values.begin(), r.values.end());
  }
  return FloatTensor::matrix(rows.size(), cols, std::move(values));
}

double quantization_step(const QuantizedBlock& qb) noexcept {
  return std::ldexp(1.0, qb.scale_exp);
}

QuantizedBlock transpose(const QuantizedBlock& qb) {
  if (!qb.is_matrix()) throw ShapeError("transpose needs a 2-D block");
  QuantizedBlock out;
  out.shape = {qb.cols(), qb.rows()};
  out.bit_width = qb.bit_width;
  out.scale_exp = qb.scale_exp;
  out.q.resize(qb.q.size());
  const std::size_t rows = qb.rows(), cols = qb.cols();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      out.q[c * rows + r] = qb.q[r * cols + c];
    }
  }
  return out;
}

}  // namespace olaq
