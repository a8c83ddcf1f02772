// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "olaq/error.hpp"
#include "olaq/outlier.hpp"
#include "oracles/oracles.hpp"
#include "support.hpp"

using olaq::FloatTensor;
using olaq::MaskMode;

TEST_SUITE("outlier") {

TEST_CASE("detect_outliers on small tensors") {
  const auto m = olaq::detect_outliers(FloatTensor::vector({1, -6, 3}), 5, MaskMode::PerElement);
  CHECK(m.indices == std::vector<std::size_t>{1});
  CHECK(m.total == 3);
  CHECK(m.fraction() == doctest::Approx(1.0 / 3));

  CHECK(olaq::detect_outliers(FloatTensor::vector({1, 2, 3}), 5, MaskMode::PerElement).empty());

  const auto c =
      olaq::detect_outliers(FloatTensor::matrix(2, 2, {1, 9, 2, 1}), 5, MaskMode::PerColumn);
  CHECK(c.indices == std::vector<std::size_t>{1});
  CHECK(c.extent == 2);
  CHECK(c.contains(1));
  CHECK_FALSE(c.contains(0));
  CHECK(c.fraction() == 0.5);

  // Strict inequality: exactly gamma is not an outlier.
  CHECK(olaq::detect_outliers(FloatTensor::vector({5, -5}), 5, MaskMode::PerElement).empty());
}

TEST_CASE("detect_outliers errors") {
  CHECK_THROWS_AS(olaq::detect_outliers(FloatTensor::vector({1}), 0, MaskMode::PerElement),
                  olaq::ConfigError);
  CHECK_THROWS_AS(olaq::detect_outliers(FloatTensor::vector({1}), -1, MaskMode::PerElement),
                  olaq::ConfigError);
  CHECK_THROWS_AS(olaq::detect_outliers(FloatTensor::vector({1}), 5, MaskMode::PerColumn),
                  olaq::ShapeError);
}

TEST_CASE("raising gamma never adds mask indices") {
  std::mt19937_64 rng(31);
  const FloatTensor x = testing::with_outliers(rng, 10, 10, 20, 1.0f, 50.0f);
  for (auto mode : {MaskMode::PerElement, MaskMode::PerColumn}) {
    auto prev = olaq::detect_outliers(x, 0.5f, mode);
    for (float g = 1.0f; g < 60.0f; g *= 1.5f) {
      const auto next = olaq::detect_outliers(x, g, mode);
      CHECK(std::includes(prev.indices.begin(), prev.indices.end(), next.indices.begin(),
                          next.indices.end()));
      prev = next;
    }
  }
}

TEST_CASE("split_outlier_value on hand-computed values") {
  auto s = olaq::split_outlier_value(7.0f, 5.0f);
  CHECK(s.coarse == 10.0);
  CHECK(s.residual == -3.0);
  s = olaq::split_outlier_value(10.0f, 5.0f);
  CHECK(s.coarse == 10.0);
  CHECK(s.residual == 0.0);
  s = olaq::split_outlier_value(-7.0f, 5.0f);
  CHECK(s.coarse == -10.0);
  CHECK(s.residual == 3.0);
  // Upper boundary of the residual interval belongs to the next multiple.
  s = olaq::split_outlier_value(15.0f, 5.0f);
  CHECK(s.coarse == 20.0);
  CHECK(s.residual == -5.0);
}

TEST_CASE("split is exact, residual bounded and coarse a multiple of 2 gamma") {
  std::mt19937_64 rng(32);
  std::uniform_real_distribution<double> log_mag(std::log(5.0), std::log(1e6));
  std::uniform_real_distribution<float> gammas(0.1f, 20.0f);
  for (int i = 0; i < 20000; ++i) {
    const float gamma = i % 2 ? 5.0f : gammas(rng);
    float x = static_cast<float>(std::exp(log_mag(rng)) * (gamma / 5.0));
    if (std::fabs(x) <= gamma) continue;
    if (i % 3 == 0) x = -x;
    const auto s = olaq::split_outlier_value(x, gamma);
    const auto exact_sum = oracle::exact(s.residual) + oracle::exact(s.coarse);
    REQUIRE(exact_sum == oracle::exact(x));
    REQUIRE(s.residual >= -static_cast<double>(gamma));
    REQUIRE(s.residual < static_cast<double>(gamma));
    const auto ratio = oracle::exact(s.coarse) / (2 * oracle::exact(gamma));
    REQUIRE(denominator(ratio) == 1);
  }
}

TEST_CASE("approach 1 on the small example") {
  const FloatTensor x = FloatTensor::matrix(2, 2, {1, 9, 2, 1});
  const auto d = olaq::decompose_approach1(x, 5);
  CHECK(d.mask.mode == MaskMode::PerColumn);
  CHECK(d.mask.indices == std::vector<std::size_t>{1});
  CHECK(d.regular.bit_width == 8);
  CHECK(d.outlier.bit_width == 12);
  // Column 1 is zero in the regular block, column 0 zero in the outlier block.
  CHECK(d.regular.q[1] == 0);
  CHECK(d.regular.q[3] == 0);
  CHECK(d.outlier.q[0] == 0);
  CHECK(d.outlier.q[2] == 0);

  const auto ref_reg = oracle::quantize({1, 0, 2, 0}, 8);
  const auto ref_out = oracle::quantize({0, 9, 0, 1}, 12);
  CHECK(d.regular.scale_exp == ref_reg.scale_exp);
  CHECK(d.outlier.scale_exp == ref_out.scale_exp);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(d.regular.q[i] == ref_reg.q[i]);
    CHECK(d.outlier.q[i] == ref_out.q[i]);
  }

  const FloatTensor r = olaq::reconstruct(d);
  const double s_reg = std::ldexp(1.0, d.regular.scale_exp);
  const double s_out = std::ldexp(1.0, d.outlier.scale_exp);
  for (std::size_t i = 0; i < 4; ++i) {
    const double owner = d.mask.contains(i % 2) ? s_out : s_reg;
    CHECK(std::fabs(r.values[i] - x.values[i]) <= owner / 2);
  }
}

TEST_CASE("approach 1 degenerate masks") {
  const FloatTensor small = FloatTensor::matrix(2, 2, {1, 2, 3, 4});
  const auto none = olaq::decompose_approach1(small, 5);
  CHECK(none.regular == olaq::quantize_block(small, 8));
  CHECK(std::all_of(none.outlier.q.begin(), none.outlier.q.end(), [](auto q) { return q == 0; }));

  const FloatTensor big = FloatTensor::matrix(2, 2, {10, 20, 30, 40});
  const auto all = olaq::decompose_approach1(big, 5);
  CHECK(std::all_of(all.regular.q.begin(), all.regular.q.end(), [](auto q) { return q == 0; }));
  CHECK(all.outlier == olaq::quantize_block(big, 12));

  CHECK_THROWS_AS(olaq::decompose_approach1(FloatTensor::vector({1, 2}), 5), olaq::ShapeError);
}

TEST_CASE("approach 2 on small examples") {
  const FloatTensor x = FloatTensor::vector({3.0f, 7.0f});
  const auto [merged, coarse] =
      olaq::split_tensor(x, olaq::detect_outliers(x, 5, MaskMode::PerElement), 5);
  CHECK(merged.values == std::vector<float>{3.0f, -3.0f});
  CHECK(coarse.values == std::vector<float>{0.0f, 10.0f});

  const auto d = olaq::decompose_approach2(x, 5);
  CHECK(d.merged == olaq::quantize_block(merged, 8));
  CHECK(d.coarse == olaq::quantize_block(coarse, 8));
  const FloatTensor r = olaq::reconstruct(d);
  const double bound = (olaq::quantization_step(d.merged) + olaq::quantization_step(d.coarse)) / 2;
  CHECK(std::fabs(r.values[0] - 3.0) <= bound);
  CHECK(std::fabs(r.values[1] - 7.0) <= bound);

  const auto ten = olaq::decompose_approach2(FloatTensor::vector({10.0f}), 5);
  CHECK(ten.merged.q == std::vector<std::int16_t>{0});
  CHECK(olaq::dequantize(ten.coarse).values == std::vector<float>{10.0f});

  const FloatTensor calm = FloatTensor::vector({1.0f, -2.0f, 4.5f});
  const auto d0 = olaq::decompose_approach2(calm, 5);
  CHECK(d0.merged == olaq::quantize_block(calm, 8));
  CHECK(std::all_of(d0.coarse.q.begin(), d0.coarse.q.end(), [](auto q) { return q == 0; }));

  const auto zero = olaq::decompose_approach2(FloatTensor::zeros({3, 3}), 5);
  CHECK(olaq::reconstruct(zero) == FloatTensor::zeros({3, 3}));
}

TEST_CASE("approach 2 merged values stay within gamma and bounds hold") {
  std::mt19937_64 rng(33);
  for (int trial = 0; trial < 200; ++trial) {
    const FloatTensor x = testing::with_outliers(rng, 8, 8, 6, 5.5f, 5000.0f);
    const auto mask = olaq::detect_outliers(x, 5, MaskMode::PerElement);
    const auto [merged, coarse] = olaq::split_tensor(x, mask, 5);
    for (float v : merged.values) REQUIRE(std::fabs(v) <= 5.0f);
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (!mask.contains(i)) REQUIRE(coarse.values[i] == 0.0f);
    }
    const auto d = olaq::decompose_approach2(x, 5);
    const FloatTensor r = olaq::reconstruct(d);
    const double bound =
        (olaq::quantization_step(d.merged) + olaq::quantization_step(d.coarse)) / 2;
    // The bound covers elements that neither block clamps at its top level.
    auto clamped = [](float v, const olaq::QuantizedBlock& qb) {
      return std::fabs(v) / olaq::quantization_step(qb) > olaq::max_level(qb.bit_width);
    };
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (clamped(merged.values[i], d.merged) || clamped(coarse.values[i], d.coarse)) continue;
      REQUIRE(std::fabs(static_cast<double>(r.values[i]) - x.values[i]) <= bound * (1 + 1e-6));
    }

    const auto d1 = olaq::decompose_approach1(x, 5);
    const FloatTensor r1 = olaq::reconstruct(d1);
    const double b1 = std::max(olaq::quantization_step(d1.regular),
                               olaq::quantization_step(d1.outlier)) / 2;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const auto& owner = d1.mask.contains(i % x.cols()) ? d1.outlier : d1.regular;
      if (clamped(x.values[i], owner)) continue;
      REQUIRE(std::fabs(static_cast<double>(r1.values[i]) - x.values[i]) <= b1);
    }
  }
}

TEST_CASE("both approaches beat untreated quantization on outlier tensors") {
  std::mt19937_64 rng(34);
  for (int trial = 0; trial < 100; ++trial) {
    const FloatTensor x = testing::with_outliers(rng, 16, 16, 3, 80.0f, 800.0f);
    const double untreated =
        testing::rmse(olaq::dequantize(olaq::quantize_block(x, 8)).values, x.values);
    CHECK(testing::rmse(olaq::reconstruct(olaq::decompose_approach1(x, 5)).values, x.values) <
          untreated);
    CHECK(testing::rmse(olaq::reconstruct(olaq::decompose_approach2(x, 5)).values, x.values) <
          untreated);
  }
}

TEST_CASE("weight rows follow the column mask") {
  const FloatTensor w = FloatTensor::matrix(3, 2, {1, 2, 30, 40, 5, 6});
  olaq::OutlierMask mask{MaskMode::PerColumn, {1}, 6, 3};
  const auto [reg, out] = olaq::partition_weight_rows(w, mask);
  CHECK(reg.bit_width == 8);
  CHECK(out.bit_width == 12);
  CHECK(reg.q[2] == 0);
  CHECK(reg.q[3] == 0);
  CHECK(out.q[0] == 0);
  CHECK(out.q[5] == 0);
  CHECK(olaq::dequantize(out).values[3] == 40.0f);

  olaq::OutlierMask wrong{MaskMode::PerColumn, {1}, 8, 4};
  CHECK_THROWS_AS(olaq::partition_weight_rows(w, wrong), olaq::MaskMismatch);
}

}  // TEST_SUITE
