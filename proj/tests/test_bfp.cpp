// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "olaq/bfp.hpp"
#include "olaq/error.hpp"
#include "oracles/oracles.hpp"
#include "support.hpp"

using olaq::FloatTensor;
using olaq::QuantizedBlock;

TEST_SUITE("bfp") {

TEST_CASE("known blocks quantize to the expected integers and scale") {
  const QuantizedBlock a = olaq::quantize_block(FloatTensor::vector({1.0f, -2.0f, 3.5f}), 8);
  CHECK(a.scale_exp == -5);
  CHECK(a.q == std::vector<std::int16_t>{32, -64, 112});
  CHECK(olaq::quantization_step(a) == 0.03125);

  const QuantizedBlock z = olaq::quantize_block(FloatTensor::vector({0.0f, 0.0f, 0.0f}), 8);
  CHECK(z.scale_exp == 0);
  CHECK(z.q == std::vector<std::int16_t>{0, 0, 0});

  const QuantizedBlock four = olaq::quantize_block(FloatTensor::vector({4.0f}), 8);
  CHECK(four.scale_exp == -4);
  CHECK(four.q == std::vector<std::int16_t>{64});
}

TEST_CASE("dequantize inverts the known blocks") {
  QuantizedBlock qb{{3}, {32, -64, 112}, 8, -5};
  CHECK(olaq::dequantize(qb).values == std::vector<float>{1.0f, -2.0f, 3.5f});
  QuantizedBlock zero{{1}, {0}, 8, 0};
  CHECK(olaq::dequantize(zero).values == std::vector<float>{0.0f});
}

TEST_CASE("quantization_step is two to the scale exponent") {
  QuantizedBlock qb{{1}, {0}, 8, 0};
  CHECK(olaq::quantization_step(qb) == 1.0);
  qb.scale_exp = 3;
  CHECK(olaq::quantization_step(qb) == 8.0);
  qb.scale_exp = -5;
  CHECK(olaq::quantization_step(qb) == 0.03125);
}

TEST_CASE("ties round to even") {
  // Max 4 at 8 bits gives step 1/16; 1/32 and 3/32 sit exactly on ties.
  const QuantizedBlock qb =
      olaq::quantize_block(FloatTensor::vector({4.0f, 0.03125f, 0.09375f, -0.03125f}), 8);
  CHECK(qb.scale_exp == -4);
  CHECK(qb.q == std::vector<std::int16_t>{64, 0, 2, 0});
}

TEST_CASE("the block maximum can round up to the clamp") {
  // 255.9 at 8 bits: e_max = 7, step 2, 127.95 rounds to 128 and clamps.
  const QuantizedBlock qb = olaq::quantize_block(FloatTensor::vector({255.9f, -255.9f}), 8);
  CHECK(qb.q == std::vector<std::int16_t>{127, -127});
}

TEST_CASE("matches the element-wise reference quantizer on random blocks") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> len(1, 64);
  std::uniform_real_distribution<float> range_exp(-20.0f, 20.0f);
  for (int bits : olaq::kSupportedBits) {
    for (int trial = 0; trial < 300; ++trial) {
      const float mag = std::exp2(range_exp(rng));
      const auto values = testing::uniform(rng, static_cast<std::size_t>(len(rng)), -mag, mag);
      const QuantizedBlock qb = olaq::quantize_block(FloatTensor::vector(values), bits);
      const oracle::ScalarQuantized ref = oracle::quantize(values, bits);
      REQUIRE(qb.scale_exp == ref.scale_exp);
      for (std::size_t i = 0; i < values.size(); ++i) REQUIRE(qb.q[i] == ref.q[i]);
    }
  }
}

TEST_CASE("block invariants hold on random data") {
  std::mt19937_64 rng(12);
  for (int bits : olaq::kSupportedBits) {
    for (int trial = 0; trial < 200; ++trial) {
      const auto values = testing::normal(rng, 50, 0.0, std::exp2(trial % 30 - 15));
      const QuantizedBlock qb = olaq::quantize_block(FloatTensor::vector(values), bits);
      olaq::validate(qb);
      int max_q = 0;
      for (auto q : qb.q) max_q = std::max(max_q, std::abs(static_cast<int>(q)));
      CHECK(max_q >= (1 << (bits - 2)));
      CHECK(max_q <= olaq::max_level(bits));

      // Monotone: sorting the inputs sorts the integers.
      std::vector<std::size_t> order(values.size());
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(),
                [&](auto a, auto b) { return values[a] < values[b]; });
      for (std::size_t i = 1; i < order.size(); ++i) {
        CHECK(qb.q[order[i - 1]] <= qb.q[order[i]]);
      }
    }
  }
}

TEST_CASE("round trip stays within half a step for unclamped elements") {
  std::mt19937_64 rng(13);
  for (int bits : olaq::kSupportedBits) {
    for (int trial = 0; trial < 200; ++trial) {
      const auto values = testing::uniform(rng, 40, -1000.0f, 1000.0f);
      const QuantizedBlock qb = olaq::quantize_block(FloatTensor::vector(values), bits);
      const FloatTensor back = olaq::dequantize(qb);
      const double half = olaq::quantization_step(qb) / 2;
      for (std::size_t i = 0; i < values.size(); ++i) {
        if (std::abs(qb.q[i]) == olaq::max_level(bits)) continue;
        CHECK(std::fabs(static_cast<double>(back.values[i]) - values[i]) <= half);
      }
    }
  }
}

TEST_CASE("identical input bits give identical blocks") {
  std::mt19937_64 rng(14);
  const auto values = testing::normal(rng, 500, 0.0, 3.0);
  CHECK(olaq::quantize_block(FloatTensor::vector(values), 8) ==
        olaq::quantize_block(FloatTensor::vector(values), 8));
}

TEST_CASE("per-row granularity gives each row its own scale") {
  const FloatTensor x = FloatTensor::matrix(2, 2, {1.0f, 0.5f, 100.0f, -3.0f});
  const auto rows = olaq::quantize(x, 8, olaq::Granularity::PerRow);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].scale_exp == -6);
  CHECK(rows[1].scale_exp == 0);
  CHECK(rows[0].shape == olaq::Shape{1, 2});
  const FloatTensor back = olaq::dequantize_rows(rows);
  CHECK(back.shape == x.shape);
  CHECK(back.values[0] == 1.0f);
  CHECK(back.values[2] == 100.0f);

  const auto single = olaq::quantize(x, 8, olaq::Granularity::PerTensor);
  REQUIRE(single.size() == 1);
  CHECK(single[0] == olaq::quantize_block(x, 8));
}

TEST_CASE("transpose swaps the integer layout and keeps the scale") {
  const QuantizedBlock qb{{2, 3}, {1, 2, 3, 4, 5, 6}, 8, -2};
  const QuantizedBlock t = olaq::transpose(qb);
  CHECK(t.shape == olaq::Shape{3, 2});
  CHECK(t.q == std::vector<std::int16_t>{1, 4, 2, 5, 3, 6});
  CHECK(t.scale_exp == -2);
  CHECK(olaq::transpose(t) == qb);
}

TEST_CASE("errors") {
  CHECK_THROWS_AS(olaq::quantize_block(FloatTensor::vector({1.0f}), 4), olaq::ConfigError);
  CHECK_THROWS_AS(olaq::quantize_block(FloatTensor::vector({1.0f}), 9), olaq::ConfigError);
  CHECK_THROWS_AS(olaq::quantize_block(FloatTensor::vector({1.0f, NAN}), 8),
                  olaq::InvalidInput);
  CHECK_THROWS_AS(olaq::quantize_block(FloatTensor::vector({INFINITY}), 8), olaq::InvalidInput);
  CHECK_THROWS_AS(FloatTensor({2, 2}, {1.0f}), olaq::ShapeError);
  CHECK_THROWS_AS(olaq::validate(QuantizedBlock{{1}, {128}, 8, 0}), olaq::InvalidInput);
  CHECK_THROWS_AS(olaq::validate(QuantizedBlock{{1}, {-128}, 8, 0}), olaq::InvalidInput);
  CHECK_THROWS_AS(olaq::quantize_rows(FloatTensor::vector({1.0f}), 8), olaq::ShapeError);
}

}  // TEST_SUITE
