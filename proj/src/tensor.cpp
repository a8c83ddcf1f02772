// SPDX-License-Identifier: Apache-2.0
#include "olaq/tensor.hpp"

#include <cmath>
#include <string>

#include "olaq/error.hpp"

namespace olaq {

std::size_t element_count(const Shape& shape) noexcept {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

FloatTensor::FloatTensor(Shape s, std::vector<float> v)
    : shape(std::move(s)), values(std::move(v)) {
  if (values.size() != element_count(shape)) {
    throw ShapeError("tensor has " + std::to_string(values.size()) +
                     " values but shape holds " +
                     std::to_string(element_count(shape)));
  }
}

FloatTensor FloatTensor::zeros(Shape s) {
  const std::size_t n = element_count(s);
  return FloatTensor(std::move(s), std::vector<float>(n, 0.0f));
}

FloatTensor FloatTensor::matrix(std::size_t rows, std::size_t cols,
                                std::vector<float> v) {
  return FloatTensor({rows, cols}, std::move(v));
}

FloatTensor FloatTensor::vector(std::vector<float> v) {
  const std::size_t n = v.size();
  return FloatTensor({n}, std::move(v));
}

bool all_finite(std::span<const float> values) noexcept {
  for (float v : values) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void validate(const FloatTensor& t) {
  if (t.values.size() != element_count(t.shape)) {
    throw ShapeError("tensor value count does not match its shape");
  }
  if (!all_finite(t.values)) {
    throw InvalidInput("tensor contains NaN or infinite values");
  }
}

}  // namespace olaq
