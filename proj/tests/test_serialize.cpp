// SPDX-License-Identifier: Apache-2.0
#include <filesystem>
#include <random>
#include <sstream>

#include "doctest.h"
#include "olaq/error.hpp"
#include "olaq/ilinear.hpp"
#include "olaq/outlier.hpp"
#include "olaq/serialize.hpp"
#include "support.hpp"

using olaq::FloatTensor;
using olaq::QuantizedBlock;

namespace {

std::string bytes_of(const std::ostringstream& os) { return os.str(); }

std::istringstream stream_of(const std::string& s) { return std::istringstream(s); }

}  // namespace

TEST_SUITE("serialize") {

TEST_CASE("float tensor record has the documented byte layout") {
  std::ostringstream os;
  olaq::write_tensor(os, FloatTensor::matrix(1, 2, {1.0f, -2.0f}));
  const std::string b = bytes_of(os);
  REQUIRE(b.size() == 4 + 4 + 1 + 1 + 2 * 8 + 2 * 4);
  CHECK(b.substr(0, 4) == "OLAQ");
  CHECK(b[4] == 1);  // version, little-endian
  CHECK(b[5] == 0);
  CHECK(b[8] == 0);  // dtype float32
  CHECK(b[9] == 2);  // ndim
  CHECK(b[10] == 1);  // dims[0] low byte
  CHECK(b[18] == 2);  // dims[1] low byte
  // 1.0f = 0x3F800000
  CHECK(static_cast<unsigned char>(b[26]) == 0x00);
  CHECK(static_cast<unsigned char>(b[29]) == 0x3F);
}

TEST_CASE("quantized record has the documented byte layout") {
  std::ostringstream os;
  olaq::write_tensor(os, QuantizedBlock{{2}, {-1, 300}, 12, -7});
  const std::string b = bytes_of(os);
  REQUIRE(b.size() == 4 + 4 + 1 + 1 + 8 + 1 + 4 + 2 * 2);
  CHECK(b[8] == 1);                                     // dtype quantized
  CHECK(b[18] == 12);                                   // bit width
  CHECK(static_cast<unsigned char>(b[19]) == 0xF9);     // -7 as i32 LE
  CHECK(static_cast<unsigned char>(b[22]) == 0xFF);
  CHECK(static_cast<unsigned char>(b[23]) == 0xFF);     // -1 as i16 LE
  CHECK(static_cast<unsigned char>(b[25]) == 0x2C);     // 300 = 0x012C
  CHECK(static_cast<unsigned char>(b[26]) == 0x01);
}

TEST_CASE("records round-trip bit-exactly") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const FloatTensor f = testing::uniform_matrix(rng, 1 + trial % 5, 1 + trial % 7, -1e6f, 1e6f);
    const QuantizedBlock q = olaq::quantize_block(f, olaq::kSupportedBits[trial % 3]);
    std::ostringstream os;
    olaq::write_tensor(os, f);
    olaq::write_tensor(os, q);
    auto is = stream_of(os.str());
    CHECK(olaq::read_float_tensor(is) == f);
    CHECK(olaq::read_quantized_block(is) == q);
  }
}

TEST_CASE("files round-trip through save and load") {
  const auto dir = std::filesystem::temp_directory_path() / "olaq_serialize_test";
  std::filesystem::create_directories(dir);
  const FloatTensor f = FloatTensor::vector({0.5f, -0.25f, 7.0f});
  olaq::save_tensor(dir / "f.bin", f);
  CHECK(std::get<FloatTensor>(olaq::load_tensor(dir / "f.bin")) == f);
  const QuantizedBlock q = olaq::quantize_block(f, 8);
  olaq::save_tensor(dir / "q.bin", q);
  CHECK(std::get<QuantizedBlock>(olaq::load_tensor(dir / "q.bin")) == q);
  CHECK_THROWS_AS(olaq::load_tensor(dir / "missing.bin"), olaq::IoError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("malformed records are rejected") {
  std::ostringstream os;
  olaq::write_tensor(os, QuantizedBlock{{2}, {1, 2}, 8, 0});
  const std::string good = os.str();

  SUBCASE("bad magic") {
    std::string b = good;
    b[0] = 'X';
    auto is = stream_of(b);
    CHECK_THROWS_AS(olaq::read_tensor(is), olaq::FormatError);
  }
  SUBCASE("bad version") {
    std::string b = good;
    b[4] = 9;
    auto is = stream_of(b);
    CHECK_THROWS_AS(olaq::read_tensor(is), olaq::FormatError);
  }
  SUBCASE("unknown dtype") {
    std::string b = good;
    b[8] = 7;
    auto is = stream_of(b);
    CHECK_THROWS_AS(olaq::read_tensor(is), olaq::FormatError);
  }
  SUBCASE("truncated payload") {
    auto is = stream_of(good.substr(0, good.size() - 1));
    CHECK_THROWS_AS(olaq::read_tensor(is), olaq::FormatError);
  }
  SUBCASE("value outside the bit width") {
    std::string b = good;
    b[b.size() - 2] = static_cast<char>(0x80);  // 128 at 8 bits
    auto is = stream_of(b);
    CHECK_THROWS_AS(olaq::read_tensor(is), olaq::FormatError);
  }
  SUBCASE("unsupported bit width") {
    std::string b = good;
    b[18] = 5;
    auto is = stream_of(b);
    CHECK_THROWS_AS(olaq::read_tensor(is), olaq::FormatError);
  }
  SUBCASE("wrong record type") {
    auto is = stream_of(good);
    CHECK_THROWS_AS(olaq::read_float_tensor(is), olaq::FormatError);
  }
}

TEST_CASE("decomposition containers round-trip") {
  std::mt19937_64 rng(22);
  const FloatTensor x = testing::with_outliers(rng, 6, 5, 4, 10.0f, 200.0f);

  const auto d1 = olaq::decompose_approach1(x, 5.0f);
  std::ostringstream os1;
  olaq::write_decomposition(os1, d1);
  auto is1 = stream_of(os1.str());
  const auto r1 = olaq::read_approach1(is1);
  CHECK(r1.regular == d1.regular);
  CHECK(r1.outlier == d1.outlier);
  CHECK(r1.mask == d1.mask);
  CHECK(r1.gamma == d1.gamma);

  const auto d2 = olaq::decompose_approach2(x, 5.0f);
  std::ostringstream os2;
  olaq::write_decomposition(os2, d2);
  auto is2 = stream_of(os2.str());
  const auto r2 = olaq::read_approach2(is2);
  CHECK(r2.merged == d2.merged);
  CHECK(r2.coarse == d2.coarse);
  CHECK(r2.mask == d2.mask);

  auto wrong = stream_of(os2.str());
  CHECK_THROWS_AS(olaq::read_approach1(wrong), olaq::FormatError);
}

TEST_CASE("layer checkpoints round-trip") {
  olaq::LayerConfig cfg;
  cfg.mode = olaq::LayerMode::Approach1;
  cfg.gamma = 3.5f;
  const auto layer = olaq::make_layer(FloatTensor::matrix(2, 3, {1, 2, 3, 4, 5, 6}),
                                      FloatTensor::vector({0.5f, 0.25f, -1.0f}), cfg);
  std::ostringstream os;
  olaq::write_checkpoint(os, layer);
  auto is = stream_of(os.str());
  const auto back = olaq::read_checkpoint(is);
  CHECK(back.weights == layer.weights);
  CHECK(back.bias == layer.bias);
  CHECK(back.config == layer.config);

  std::string bad = os.str();
  auto truncated = stream_of(bad.substr(0, bad.size() - 2));
  CHECK_THROWS_AS(olaq::read_checkpoint(truncated), olaq::FormatError);
}

}  // TEST_SUITE
