// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace olaq {

using Shape = std::vector<std::size_t>;

std::size_t element_count(const Shape& shape) noexcept;

/// Row-major single-precision tensor.
struct FloatTensor {
  Shape shape;
  std::vector<float> values;

  FloatTensor() = default;
  FloatTensor(Shape s, std::vector<float> v);

  static FloatTensor zeros(Shape s);
  static FloatTensor matrix(std::size_t rows, std::size_t cols,
                            std::vector<float> v);
  static FloatTensor vector(std::vector<float> v);

  std::size_t size() const noexcept { return values.size(); }
  std::size_t ndim() const noexcept { return shape.size(); }
  bool is_matrix() const noexcept { return shape.size() == 2; }
  std::size_t rows() const noexcept { return shape.at(0); }
  std::size_t cols() const noexcept { return shape.at(1); }

  float& at(std::size_t r, std::size_t c) { return values[r * shape[1] + c]; }
  float at(std::size_t r, std::size_t c) const {
    return values[r * shape[1] + c];
  }

  std::span<const float> span() const noexcept { return values; }

  bool operator==(const FloatTensor&) const = default;
};

/// Throws ShapeError if values.size() disagrees with the shape and
/// InvalidInput if any value is NaN or infinite.
void validate(const FloatTensor& t);

bool all_finite(std::span<const float> values) noexcept;

}  // namespace olaq
