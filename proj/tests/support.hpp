// SPDX-License-Identifier: Apache-2.0
//
// Shared generators for the unit and acceptance tests.
#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "olaq/tensor.hpp"

namespace testing {

inline std::vector<float> uniform(std::mt19937_64& rng, std::size_t n, float lo, float hi) {
  std::uniform_real_distribution<float> d(lo, hi);
  std::vector<float> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

inline std::vector<float> normal(std::mt19937_64& rng, std::size_t n, double mean, double sd) {
  std::normal_distribution<double> d(mean, sd);
  std::vector<float> v(n);
  for (auto& x : v) x = static_cast<float>(d(rng));
  return v;
}

inline olaq::FloatTensor uniform_matrix(std::mt19937_64& rng, std::size_t r, std::size_t c,
                                        float lo, float hi) {
  return olaq::FloatTensor::matrix(r, c, uniform(rng, r * c, lo, hi));
}

/// Uniform [-1, 1] entries with `count` random positions replaced by values
/// of magnitude in [lo, hi] and random sign.
inline olaq::FloatTensor with_outliers(std::mt19937_64& rng, std::size_t r, std::size_t c,
                                       std::size_t count, float lo, float hi) {
  olaq::FloatTensor t = uniform_matrix(rng, r, c, -1.0f, 1.0f);
  std::uniform_int_distribution<std::size_t> pos(0, t.size() - 1);
  std::uniform_real_distribution<float> mag(lo, hi);
  std::bernoulli_distribution sign(0.5);
  for (std::size_t i = 0; i < count; ++i) {
    const float m = mag(rng);
    t.values[pos(rng)] = sign(rng) ? m : -m;
  }
  return t;
}

inline double cosine(const std::vector<float>& a, const std::vector<float>& b) {
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += static_cast<double>(a[i]) * b[i];
    aa += static_cast<double>(a[i]) * a[i];
    bb += static_cast<double>(b[i]) * b[i];
  }
  return ab / std::sqrt(aa * bb);
}

inline double rmse(const std::vector<float>& a, const std::vector<float>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - b[i];
    s += d * d;
  }
  return std::sqrt(s / static_cast<double>(a.size()));
}

}  // namespace testing
