// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "olaq/config.hpp"
#include "olaq/dataset.hpp"
#include "olaq/ilinear.hpp"

#include "json.hpp"

namespace olaq {

struct EpochMetrics {
  double loss = 0.0;
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;

  bool operator==(const EpochMetrics&) const = default;
};

struct RunMetrics {
  LayerMode mode = LayerMode::Approach2;
  std::uint64_t seed = 0;
  std::vector<EpochMetrics> epochs;
  double final_accuracy = 0.0;
  /// Fraction of first-layer input elements with |x| > gamma.
  double input_outlier_fraction = 0.0;
  double wall_clock_seconds = 0.0;
  /// Keyed "<lhs bits>x<rhs bits>".
  std::map<std::string, std::uint64_t> gemm_counts;
};

nlohmann::json to_json(const RunMetrics& metrics, bool include_wall_clock = true);

/// A stack of integer linear layers with ReLU between them.
struct Mlp {
  std::vector<LinearLayerState> layers;
};

Mlp make_mlp(const std::vector<std::size_t>& dims, const LayerConfig& config,
             std::uint64_t seed);

/// Logits for every row of x.
FloatTensor predict(const Mlp& model, const FloatTensor& x,
                    const GemmContext& ctx = {});

double accuracy(const Mlp& model, const Dataset& data,
                const GemmContext& ctx = {});

/// Mean softmax cross-entropy and its gradient w.r.t. the logits.
std::pair<double, FloatTensor> softmax_cross_entropy(
    const FloatTensor& logits, const std::vector<std::size_t>& labels);

Dataset load_dataset(const TrainConfig& config);

/// Trains on the configured dataset; writes metrics JSON to
/// config.output when it is set.
RunMetrics train(const TrainConfig& config);
RunMetrics train(const TrainConfig& config, const Dataset& data);

struct ModeSummary {
  LayerMode mode = LayerMode::Approach2;
  std::vector<double> accuracies;
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation
};

struct ComparisonTable {
  std::vector<std::uint64_t> seeds;
  std::vector<ModeSummary> rows;
};

inline const std::vector<LayerMode> kAllModes = {
    LayerMode::FullPrecision, LayerMode::Approach1, LayerMode::Approach2,
    LayerMode::Untreated};

/// Runs train() for every (mode, seed) pair. The seed overrides both the
/// training seed and the synthetic data seed. Runs execute concurrently
/// on up to `parallel_runs` threads; results do not depend on it.
ComparisonTable compare_modes(const TrainConfig& config,
                              const std::vector<std::uint64_t>& seeds,
                              const std::vector<LayerMode>& modes = kAllModes,
                              unsigned parallel_runs = 1);

/// `mode,mean,sd,n` rows, accuracies in percentage points.
std::string to_delimited(const ComparisonTable& table, char delimiter = ',');
nlohmann::json to_json(const ComparisonTable& table);

}  // namespace olaq
