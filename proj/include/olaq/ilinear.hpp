// SPDX-License-Identifier: Apache-2.0
//
// Integer linear layer: y = x W + b with an outlier-aware integer forward
// pass and an all-8-bit integer backward pass. Master weights and bias are
// single precision; they are quantized afresh on every call.
#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

#include "olaq/igemm.hpp"
#include "olaq/outlier.hpp"
#include "olaq/tensor.hpp"

namespace olaq {

enum class LayerMode : std::uint8_t {
  FullPrecision = 0,
  Untreated = 1,
  Approach1 = 2,
  Approach2 = 3,
};

std::string_view to_string(LayerMode mode) noexcept;
/// Accepts "full-precision", "untreated", "approach1", "approach2" (and
/// "1"/"2" for the approaches). Throws ConfigError otherwise.
LayerMode parse_layer_mode(std::string_view text);

inline constexpr int kGradientBits = 8;

struct LayerConfig {
  LayerMode mode = LayerMode::Approach2;
  float gamma = kDefaultGamma;
  int activation_bits = 8;
  int weight_bits = 8;
  int grad_bits = kGradientBits;

  bool operator==(const LayerConfig&) const = default;
};

void validate(const LayerConfig& config);

struct LinearLayerState {
  FloatTensor weights;  // in_features x out_features
  FloatTensor bias;     // out_features
  LayerConfig config;

  std::size_t in_features() const { return weights.rows(); }
  std::size_t out_features() const { return weights.cols(); }
};

LinearLayerState make_layer(FloatTensor weights, FloatTensor bias,
                            LayerConfig config);

struct ForwardCache {
  std::optional<FloatTensor> input;
};

struct ForwardResult {
  FloatTensor output;
  ForwardCache cache;
};

struct BackwardResult {
  FloatTensor grad_input;
  FloatTensor grad_weights;
  FloatTensor grad_bias;
};

ForwardResult forward(const LinearLayerState& layer, const FloatTensor& x,
                      const GemmContext& ctx = {});

BackwardResult backward(const LinearLayerState& layer,
                        const ForwardCache& cache, const FloatTensor& grad_out,
                        const GemmContext& ctx = {});

/// The integer gradient kernel used by backward(), exposed with an explicit
/// operand width so precision studies can sweep it. backward() always
/// calls it with kGradientBits.
BackwardResult integer_gradients(const FloatTensor& x, const FloatTensor& w,
                                 const FloatTensor& grad_out, int bits,
                                 const GemmContext& ctx = {});

/// Single-precision reference gradients (double accumulation).
BackwardResult reference_gradients(const FloatTensor& x, const FloatTensor& w,
                                   const FloatTensor& grad_out);

/// x W + b with double accumulation, rounded to float.
FloatTensor reference_linear(const FloatTensor& x, const FloatTensor& w,
                             const FloatTensor& bias);

void sgd_step(LinearLayerState& layer, const BackwardResult& grads, float lr);

/// Checkpoint container: header, weights record, bias record, then
///   mode u8 | gamma f32 | activation_bits u8 | weight_bits u8 | grad_bits u8
void write_checkpoint(std::ostream& os, const LinearLayerState& layer);
LinearLayerState read_checkpoint(std::istream& is);

}  // namespace olaq
