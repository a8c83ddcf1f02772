// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

#include "olaq/config.hpp"
#include "olaq/tensor.hpp"

namespace olaq {

struct Dataset {
  FloatTensor features;  // samples x features
  std::vector<std::size_t> labels;
  std::size_t classes = 0;

  std::size_t size() const noexcept { return labels.size(); }
};

/// Gaussian classes with means of +/- mean_shift per feature (random sign
/// pattern per class) and isotropic noise. The first `injection.columns`
/// feature columns are multiplied by `injection.scale` when it is nonzero.
Dataset synth_dataset(const SynthSpec& spec);

/// CSV with a header row; the column named "label" holds non-negative
/// integer class ids, every other column is a feature.
Dataset load_csv_dataset(const std::filesystem::path& path);

/// Rows [begin, end) of `order` gathered into a new dataset.
Dataset gather(const Dataset& data, const std::vector<std::size_t>& order,
               std::size_t begin, std::size_t end);

}  // namespace olaq
