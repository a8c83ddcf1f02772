// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "olaq/ilinear.hpp"

namespace olaq {

struct OutlierInjection {
  std::size_t columns = 0;
  /// Multiplier applied to the injected columns; 0 disables injection.
  float scale = 0.0f;
};

struct SynthSpec {
  std::size_t classes = 2;
  std::size_t samples = 2000;
  std::size_t features = 32;
  /// Class means have entries of +/- mean_shift.
  float mean_shift = 2.0f;
  float noise = 0.5f;
  OutlierInjection injection;
  std::uint64_t seed = 1;
};

struct TrainConfig {
  LayerMode mode = LayerMode::Approach2;
  float gamma = kDefaultGamma;
  std::vector<std::size_t> dims = {32, 64, 2};
  std::size_t epochs = 5;
  std::size_t batch_size = 32;
  float learning_rate = 2e-5f;
  std::uint64_t seed = 1;
  /// "synthetic" or the path of a CSV file with a "label" column.
  std::string dataset = "synthetic";
  SynthSpec synth;
  double test_fraction = 0.2;
  unsigned workers = 1;
  /// Optional metrics output path (JSON).
  std::string output;
};

/// Throws ConfigError on any broken invariant.
void validate(const TrainConfig& config);

/// Parses the plain-text config format: one `key = value` per line, `#`
/// starts a comment, lists are comma-separated. Unknown keys are rejected.
///
///   mode = approach2
///   gamma = 5
///   dims = 32, 64, 2
///   epochs = 5
///   batch_size = 32
///   learning_rate = 0.05
///   seed = 1
///   dataset = synthetic
///   classes = 2
///   samples = 2000
///   mean_shift = 2
///   noise = 0.5
///   outlier_columns = 3
///   outlier_scale = 20
TrainConfig parse_config(std::istream& is);
TrainConfig load_config(const std::filesystem::path& path);

std::string to_text(const TrainConfig& config);

}  // namespace olaq
