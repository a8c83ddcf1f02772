// SPDX-License-Identifier: Apache-2.0
#include "olaq/reference.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include "olaq/error.hpp"

namespace olaq::reference {

using boost::multiprecision::cpp_int;

BigMatrix bigint_gemm(const QuantizedBlock& a, const QuantizedBlock& b) {
  const std::size_t n = a.shape.size() == 1 ? 1 : a.shape.at(0);
  const std::size_t d = a.shape.back();
  const std::size_t k = b.shape.size() == 1 ? b.shape[0] : b.shape.at(1);
  const std::size_t b_rows = b.shape.size() == 1 ? 1 : b.shape.at(0);
  if (d != b_rows) throw ShapeError("reference GEMM inner dimensions differ");

  BigMatrix out;
  out.rows = n;
  out.cols = k;
  out.scale_exp = a.scale_exp + b.scale_exp;
  out.values.reserve(n * k);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      cpp_int sum = 0;
      for (std::size_t t = 0; t < d; ++t) {
        sum += cpp_int(a.q[i * d + t]) * cpp_int(b.q[t * k + j]);
      }
      out.values.push_back(sum.str());
    }
  }
  return out;
}

std::optional<GemmMismatch> compare(const AccumulatorMatrix& acc,
                                    const BigMatrix& ref) {
  if (acc.rows != ref.rows || acc.cols != ref.cols) {
    return GemmMismatch{0, 0,
                        "shape " + std::to_string(ref.rows) + "x" + std::to_string(ref.cols),
                        "shape " + std::to_string(acc.rows) + "x" + std::to_string(acc.cols)};
  }
  if (acc.scale_exp != ref.scale_exp) {
    return GemmMismatch{0, 0, "scale_exp " + std::to_string(ref.scale_exp),
                        "scale_exp " + std::to_string(acc.scale_exp)};
  }
  for (std::size_t i = 0; i < acc.rows; ++i) {
    for (std::size_t j = 0; j < acc.cols; ++j) {
      const std::string got = std::to_string(acc.at(i, j));
      const std::string& want = ref.values[i * ref.cols + j];
      if (got != want) return GemmMismatch{i, j, want, got};
    }
  }
  return std::nullopt;
}

}  // namespace olaq::reference
