// SPDX-License-Identifier: Apache-2.0
#include "olaq/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include "olaq/error.hpp"

namespace olaq {

Mlp make_mlp(const std::vector<std::size_t>& dims, const LayerConfig& config,
             std::uint64_t seed) {
  if (dims.size() < 2) throw ConfigError("an MLP needs at least two dims");
  std::mt19937_64 rng(seed);
  Mlp model;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const std::size_t fan_in = dims[l], fan_out = dims[l + 1];
    const float limit = std::sqrt(6.0f / static_cast<float>(fan_in + fan_out));
    std::uniform_real_distribution<float> init(-limit, limit);
    std::vector<float> w(fan_in * fan_out);
    for (auto& v : w) v = init(rng);
    model.layers.push_back(make_layer(FloatTensor::matrix(fan_in, fan_out, std::move(w)),
                                      FloatTensor::zeros({fan_out}), config));
  }
  return model;
}

namespace {

void relu_inplace(FloatTensor& t) {
  for (auto& v : t.values) v = std::max(v, 0.0f);
}

std::size_t argmax_row(const FloatTensor& t, std::size_t r) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < t.cols(); ++c) {
    if (t.at(r, c) > t.at(r, best)) best = c;
  }
  return best;
}

std::size_t count_correct(const FloatTensor& logits, const std::vector<std::size_t>& labels) {
  std::size_t correct = 0;
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    if (argmax_row(logits, r) == labels[r]) ++correct;
  }
  return correct;
}

}  // namespace

FloatTensor predict(const Mlp& model, const FloatTensor& x, const GemmContext& ctx) {
  FloatTensor h = x;
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    h = forward(model.layers[l], h, ctx).output;
    if (l + 1 < model.layers.size()) relu_inplace(h);
  }
  return h;
}

double accuracy(const Mlp& model, const Dataset& data, const GemmContext& ctx) {
  if (data.size() == 0) return 0.0;
  const FloatTensor logits = predict(model, data.features, ctx);
  return static_cast<double>(count_correct(logits, data.labels)) /
         static_cast<double>(data.size());
}

std::pair<double, FloatTensor> softmax_cross_entropy(
    const FloatTensor& logits, const std::vector<std::size_t>& labels) {
  const std::size_t n = logits.rows(), k = logits.cols();
  FloatTensor grad = FloatTensor::zeros({n, k});
  double loss = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    double mx = logits.at(r, 0);
    for (std::size_t c = 1; c < k; ++c) mx = std::max<double>(mx, logits.at(r, c));
    double z = 0.0;
    for (std::size_t c = 0; c < k; ++c) z += std::exp(logits.at(r, c) - mx);
    for (std::size_t c = 0; c < k; ++c) {
      const double prob = std::exp(logits.at(r, c) - mx) / z;
      const double target = c == labels[r] ? 1.0 : 0.0;
      grad.at(r, c) = static_cast<float>((prob - target) / static_cast<double>(n));
    }
    loss -= (logits.at(r, labels[r]) - mx) - std::log(z);
  }
  return {loss / static_cast<double>(n), std::move(grad)};
}

Dataset load_dataset(const TrainConfig& config) {
  if (config.dataset == "synthetic") {
    SynthSpec spec = config.synth;
    spec.features = config.dims.front();
    spec.seed = config.seed;
    return synth_dataset(spec);
  }
  return load_csv_dataset(config.dataset);
}

namespace {

// One SGD step over a minibatch; returns the summed loss and correct count.
std::pair<double, std::size_t> train_batch(Mlp& model, const Dataset& batch, float lr,
                                           const GemmContext& ctx) {
  const std::size_t depth = model.layers.size();
  std::vector<ForwardCache> caches(depth);
  std::vector<FloatTensor> pre_activations(depth);

  FloatTensor h = batch.features;
  for (std::size_t l = 0; l < depth; ++l) {
    if (!all_finite(h.values)) throw Diverged("non-finite activations; lower learning_rate");
    ForwardResult fr = forward(model.layers[l], h, ctx);
    caches[l] = std::move(fr.cache);
    pre_activations[l] = fr.output;
    h = std::move(fr.output);
    if (l + 1 < depth) relu_inplace(h);
  }

  if (!all_finite(h.values)) throw Diverged("non-finite logits; lower learning_rate");
  auto [loss, grad] = softmax_cross_entropy(h, batch.labels);
  const std::size_t correct = count_correct(h, batch.labels);

  for (std::size_t l = depth; l-- > 0;) {
    if (l + 1 < depth) {
      const FloatTensor& z = pre_activations[l];
      for (std::size_t i = 0; i < grad.size(); ++i) {
        if (z.values[i] <= 0.0f) grad.values[i] = 0.0f;
      }
    }
    BackwardResult g = backward(model.layers[l], caches[l], grad, ctx);
    sgd_step(model.layers[l], g, lr);
    grad = std::move(g.grad_input);
  }
  return {loss * static_cast<double>(batch.size()), correct};
}

}  // namespace

RunMetrics train(const TrainConfig& config, const Dataset& data) {
  validate(config);
  if (data.features.cols() != config.dims.front()) {
    throw DataError("dataset has " + std::to_string(data.features.cols()) +
                    " features but dims starts with " + std::to_string(config.dims.front()));
  }
  for (std::size_t label : data.labels) {
    if (label >= config.dims.back()) {
      throw DataError("label " + std::to_string(label) + " exceeds the output width");
    }
  }
  const auto start = std::chrono::steady_clock::now();

  GemmAudit audit;
  const GemmContext ctx{config.workers, &audit};

  std::mt19937_64 rng(config.seed ^ 0x5DEECE66DULL);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_test = static_cast<std::size_t>(
      std::llround(config.test_fraction * static_cast<double>(data.size())));
  if (n_test == 0 || n_test >= data.size()) {
    throw DataError("test split leaves an empty train or test set");
  }
  const Dataset test = gather(data, order, 0, n_test);
  const Dataset train_set = gather(data, order, n_test, data.size());

  RunMetrics metrics;
  metrics.mode = config.mode;
  metrics.seed = config.seed;
  {
    std::size_t outliers = 0;
    for (float v : train_set.features.values) {
      if (std::fabs(v) > config.gamma) ++outliers;
    }
    metrics.input_outlier_fraction =
        static_cast<double>(outliers) / static_cast<double>(train_set.features.size());
  }

  Mlp model = make_mlp(config.dims, LayerConfig{config.mode, config.gamma}, config.seed);
  std::vector<std::size_t> train_order(train_set.size());
  std::iota(train_order.begin(), train_order.end(), 0);

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(train_order.begin(), train_order.end(), rng);
    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t b = 0; b < train_set.size(); b += config.batch_size) {
      const std::size_t e = std::min(train_set.size(), b + config.batch_size);
      const Dataset batch = gather(train_set, train_order, b, e);
      const auto [loss, ok] = train_batch(model, batch, config.learning_rate, ctx);
      loss_sum += loss;
      correct += ok;
    }
    EpochMetrics em;
    em.loss = loss_sum / static_cast<double>(train_set.size());
    em.train_accuracy = static_cast<double>(correct) / static_cast<double>(train_set.size());
    if (!std::isfinite(em.loss)) throw Diverged("non-finite loss; lower learning_rate");
    em.test_accuracy = accuracy(model, test, ctx);
    metrics.epochs.push_back(em);
  }
  metrics.final_accuracy =
      metrics.epochs.empty() ? accuracy(model, test, ctx) : metrics.epochs.back().test_accuracy;

  for (const auto& [key, count] : audit.snapshot()) {
    metrics.gemm_counts[std::to_string(key.first) + "x" + std::to_string(key.second)] = count;
  }
  metrics.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  if (!config.output.empty()) {
    std::ofstream os(config.output);
    if (!os) throw IoError("cannot write metrics to " + config.output);
    os << to_json(metrics).dump(2) << '\n';
  }
  return metrics;
}

RunMetrics train(const TrainConfig& config) {
  validate(config);
  return train(config, load_dataset(config));
}

nlohmann::json to_json(const RunMetrics& m, bool include_wall_clock) {
  nlohmann::json j;
  j["mode"] = std::string(to_string(m.mode));
  j["seed"] = m.seed;
  j["final_accuracy"] = m.final_accuracy;
  j["input_outlier_fraction"] = m.input_outlier_fraction;
  auto& epochs = j["epochs"] = nlohmann::json::array();
  for (const auto& e : m.epochs) {
    epochs.push_back({{"loss", e.loss},
                      {"train_accuracy", e.train_accuracy},
                      {"test_accuracy", e.test_accuracy}});
  }
  j["gemm_counts"] = m.gemm_counts;
  if (include_wall_clock) j["wall_clock_seconds"] = m.wall_clock_seconds;
  return j;
}

}  // namespace olaq
