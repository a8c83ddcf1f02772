// SPDX-License-Identifier: Apache-2.0
//
// Arbitrary-precision reference kernels. They share no code with the
// production kernels and are used to verify them.
#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "olaq/bfp.hpp"
#include "olaq/igemm.hpp"

namespace olaq::reference {

/// Exact product using arbitrary-precision integers, triple loop, no tiling.
/// Entries are returned as decimal strings so callers need no bignum type.
struct BigMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::string> values;
  int scale_exp = 0;
};

BigMatrix bigint_gemm(const QuantizedBlock& a, const QuantizedBlock& b);

struct GemmMismatch {
  std::size_t row = 0;
  std::size_t col = 0;
  std::string expected;
  std::string actual;
};

/// First entry where acc differs from the reference (or a scale/shape
/// mismatch reported at (0, 0)); nullopt when they agree.
std::optional<GemmMismatch> compare(const AccumulatorMatrix& acc,
                                    const BigMatrix& ref);

}  // namespace olaq::reference
