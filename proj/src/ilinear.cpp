// SPDX-License-Identifier: Apache-2.0
#include "olaq/ilinear.hpp"

#include <cmath>
#include <istream>
#include <ostream>

#include "olaq/error.hpp"
#include "olaq/serialize.hpp"

namespace olaq {

std::string_view to_string(LayerMode mode) noexcept {
  switch (mode) {
    case LayerMode::FullPrecision: return "full-precision";
    case LayerMode::Untreated: return "untreated";
    case LayerMode::Approach1: return "approach1";
    case LayerMode::Approach2: return "approach2";
  }
  return "unknown";
}

LayerMode parse_layer_mode(std::string_view text) {
  if (text == "full-precision" || text == "fp32") return LayerMode::FullPrecision;
  if (text == "untreated") return LayerMode::Untreated;
  if (text == "approach1" || text == "1") return LayerMode::Approach1;
  if (text == "approach2" || text == "2") return LayerMode::Approach2;
  throw ConfigError("unknown mode \"" + std::string(text) +
                    "\" (expected full-precision, untreated, approach1 or approach2)");
}

void validate(const LayerConfig& config) {
  if (!(config.gamma > 0.0f) || !std::isfinite(config.gamma)) {
    throw ConfigError("gamma must be positive and finite");
  }
  for (int bits : {config.activation_bits, config.weight_bits, config.grad_bits}) {
    if (!is_supported_bit_width(bits)) {
      throw ConfigError("unsupported bit width " + std::to_string(bits));
    }
  }
  if (config.mode == LayerMode::FullPrecision) return;
  if (config.grad_bits != kGradientBits) {
    throw ConfigError("integer modes keep gradients at 8 bits, got grad_bits=" +
                      std::to_string(config.grad_bits));
  }
  if ((config.mode == LayerMode::Approach1 || config.mode == LayerMode::Approach2) &&
      (config.activation_bits != 8 || config.weight_bits != 8)) {
    throw ConfigError("outlier-aware modes run their regular path at 8 bits");
  }
}

LinearLayerState make_layer(FloatTensor weights, FloatTensor bias,
                            LayerConfig config) {
  validate(config);
  validate(weights);
  validate(bias);
  if (!weights.is_matrix()) throw ShapeError("weights must be 2-D");
  if (bias.ndim() != 1 || bias.size() != weights.cols()) {
    throw ShapeError("bias length must equal the output feature count");
  }
  return {std::move(weights), std::move(bias), config};
}

namespace {

void add_bias(FloatTensor& y, const FloatTensor& bias) {
  for (std::size_t r = 0; r < y.rows(); ++r) {
    for (std::size_t c = 0; c < y.cols(); ++c) y.at(r, c) += bias.values[c];
  }
}

FloatTensor column_sums(const FloatTensor& g) {
  std::vector<double> sums(g.cols(), 0.0);
  for (std::size_t r = 0; r < g.rows(); ++r) {
    for (std::size_t c = 0; c < g.cols(); ++c) sums[c] += g.at(r, c);
  }
  std::vector<float> out(sums.begin(), sums.end());
  return FloatTensor::vector(std::move(out));
}

void require_matrix_with(const FloatTensor& t, std::size_t rows, std::size_t cols,
                         const char* what) {
  if (!t.is_matrix() || (rows != 0 && t.rows() != rows) || t.cols() != cols) {
    throw ShapeError(std::string(what) + " has the wrong shape");
  }
}

}  // namespace

FloatTensor reference_linear(const FloatTensor& x, const FloatTensor& w,
                             const FloatTensor& bias) {
  require_matrix_with(x, 0, w.rows(), "input");
  const std::size_t n = x.rows(), d = x.cols(), k = w.cols();
  FloatTensor y = FloatTensor::zeros({n, k});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      double acc = 0.0;
      for (std::size_t t = 0; t < d; ++t) {
        acc += static_cast<double>(x.at(i, t)) * w.at(t, j);
      }
      y.at(i, j) = static_cast<float>(acc);
    }
  }
  add_bias(y, bias);
  return y;
}

ForwardResult forward(const LinearLayerState& layer, const FloatTensor& x,
                      const GemmContext& ctx) {
  validate(x);
  require_matrix_with(x, 0, layer.in_features(), "input");
  const LayerConfig& cfg = layer.config;

  ForwardResult result;
  switch (cfg.mode) {
    case LayerMode::FullPrecision:
      result.output = reference_linear(x, layer.weights, layer.bias);
      result.cache.input = x;
      return result;
    case LayerMode::Untreated: {
      const QuantizedBlock xq = quantize_block(x, cfg.activation_bits);
      const QuantizedBlock wq = quantize_block(layer.weights, cfg.weight_bits);
      result.output = dequantize(igemm(xq, wq, ctx));
      break;
    }
    case LayerMode::Approach1: {
      const Approach1Decomposition d = decompose_approach1(x, cfg.gamma);
      const auto [w_regular, w_outlier] = partition_weight_rows(layer.weights, d.mask);
      result.output = tiled_matmul_approach1(d, w_regular, w_outlier, ctx);
      break;
    }
    case LayerMode::Approach2: {
      const Approach2Decomposition d = decompose_approach2(x, cfg.gamma);
      const QuantizedBlock wq = quantize_block(layer.weights, kRegularBits);
      result.output = tiled_matmul_approach2(d, wq, ctx);
      break;
    }
  }
  add_bias(result.output, layer.bias);
  result.cache.input = x;
  return result;
}

BackwardResult reference_gradients(const FloatTensor& x, const FloatTensor& w,
                                   const FloatTensor& grad_out) {
  const std::size_t n = x.rows(), d = x.cols(), k = w.cols();
  BackwardResult g;
  g.grad_input = FloatTensor::zeros({n, d});
  g.grad_weights = FloatTensor::zeros({d, k});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t t = 0; t < d; ++t) {
      double acc = 0.0;
      for (std::size_t j = 0; j < k; ++j) {
        acc += static_cast<double>(grad_out.at(i, j)) * w.at(t, j);
      }
      g.grad_input.at(i, t) = static_cast<float>(acc);
    }
  }
  for (std::size_t t = 0; t < d; ++t) {
    for (std::size_t j = 0; j < k; ++j) {
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        acc += static_cast<double>(x.at(i, t)) * grad_out.at(i, j);
      }
      g.grad_weights.at(t, j) = static_cast<float>(acc);
    }
  }
  g.grad_bias = column_sums(grad_out);
  return g;
}

BackwardResult integer_gradients(const FloatTensor& x, const FloatTensor& w,
                                 const FloatTensor& grad_out, int bits,
                                 const GemmContext& ctx) {
  // Outliers are not treated here: each operand is one plain block.
  const QuantizedBlock gq = quantize_block(grad_out, bits);
  const QuantizedBlock wq = quantize_block(w, bits);
  const QuantizedBlock xq = quantize_block(x, bits);

  BackwardResult g;
  g.grad_input = dequantize(igemm(gq, transpose(wq), ctx));
  g.grad_weights = dequantize(igemm(transpose(xq), gq, ctx));
  g.grad_bias = column_sums(grad_out);
  return g;
}

BackwardResult backward(const LinearLayerState& layer,
                        const ForwardCache& cache, const FloatTensor& grad_out,
                        const GemmContext& ctx) {
  if (!cache.input) throw MissingCache("backward called without a forward cache");
  const FloatTensor& x = *cache.input;
  validate(grad_out);
  require_matrix_with(grad_out, x.rows(), layer.out_features(), "grad_out");

  if (layer.config.mode == LayerMode::FullPrecision) {
    return reference_gradients(x, layer.weights, grad_out);
  }
  return integer_gradients(x, layer.weights, grad_out, layer.config.grad_bits, ctx);
}

void sgd_step(LinearLayerState& layer, const BackwardResult& grads, float lr) {
  if (!(lr >= 0.0f) || !std::isfinite(lr)) {
    throw ConfigError("learning rate must be finite and non-negative");
  }
  if (grads.grad_weights.shape != layer.weights.shape ||
      grads.grad_bias.shape != layer.bias.shape) {
    throw ShapeError("gradient shapes do not match the layer");
  }
  for (std::size_t i = 0; i < layer.weights.size(); ++i) {
    layer.weights.values[i] -= lr * grads.grad_weights.values[i];
  }
  for (std::size_t i = 0; i < layer.bias.size(); ++i) {
    layer.bias.values[i] -= lr * grads.grad_bias.values[i];
  }
}

void write_checkpoint(std::ostream& os, const LinearLayerState& layer) {
  write_container_header(os, ContainerKind::LayerCheckpoint);
  write_tensor(os, layer.weights);
  write_tensor(os, layer.bias);
  io::write_u8(os, static_cast<std::uint8_t>(layer.config.mode));
  io::write_f32(os, layer.config.gamma);
  io::write_u8(os, static_cast<std::uint8_t>(layer.config.activation_bits));
  io::write_u8(os, static_cast<std::uint8_t>(layer.config.weight_bits));
  io::write_u8(os, static_cast<std::uint8_t>(layer.config.grad_bits));
}

LinearLayerState read_checkpoint(std::istream& is) {
  if (read_container_header(is) != ContainerKind::LayerCheckpoint) {
    throw FormatError("container is not a layer checkpoint");
  }
  FloatTensor weights = read_float_tensor(is);
  FloatTensor bias = read_float_tensor(is);
  LayerConfig cfg;
  const auto mode = io::read_u8(is);
  if (mode > 3) throw FormatError("unknown layer mode " + std::to_string(mode));
  cfg.mode = static_cast<LayerMode>(mode);
  cfg.gamma = io::read_f32(is);
  cfg.activation_bits = io::read_u8(is);
  cfg.weight_bits = io::read_u8(is);
  cfg.grad_bits = io::read_u8(is);
  try {
    return make_layer(std::move(weights), std::move(bias), cfg);
  } catch (const Error& e) {
    throw FormatError(std::string("invalid checkpoint: ") + e.what());
  }
}

}  // namespace olaq
