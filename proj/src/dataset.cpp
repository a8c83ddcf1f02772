// SPDX-License-Identifier: Apache-2.0
#include "olaq/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "olaq/error.hpp"

namespace olaq {

Dataset synth_dataset(const SynthSpec& spec) {
  if (spec.classes < 2) throw ConfigError("synthetic data needs at least two classes");
  if (spec.features == 0) throw ConfigError("synthetic data needs at least one feature");
  if (spec.samples < spec.classes) throw ConfigError("fewer samples than classes");
  if (spec.injection.columns > spec.features) {
    throw ConfigError("cannot inject outliers into more columns than features");
  }
  if (!(spec.noise >= 0.0f)) throw ConfigError("noise must be non-negative");

  std::mt19937_64 rng(spec.seed);
  std::bernoulli_distribution coin(0.5);
  std::normal_distribution<float> gauss(0.0f, 1.0f);

  // Class means: +/- mean_shift per feature. Two classes mirror each other.
  std::vector<std::vector<float>> means(spec.classes, std::vector<float>(spec.features));
  for (std::size_t c = 0; c < spec.classes; ++c) {
    for (std::size_t f = 0; f < spec.features; ++f) {
      if (spec.classes == 2 && c == 1) {
        means[c][f] = -means[0][f];
      } else {
        means[c][f] = coin(rng) ? spec.mean_shift : -spec.mean_shift;
      }
    }
  }

  Dataset data;
  data.classes = spec.classes;
  data.features = FloatTensor::zeros({spec.samples, spec.features});
  data.labels.resize(spec.samples);
  for (std::size_t i = 0; i < spec.samples; ++i) {
    const std::size_t label = i % spec.classes;
    data.labels[i] = label;
    for (std::size_t f = 0; f < spec.features; ++f) {
      data.features.at(i, f) = means[label][f] + spec.noise * gauss(rng);
    }
  }

  if (spec.injection.scale != 0.0f) {
    for (std::size_t i = 0; i < spec.samples; ++i) {
      for (std::size_t f = 0; f < spec.injection.columns; ++f) {
        data.features.at(i, f) *= spec.injection.scale;
      }
    }
  }
  return data;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    cells.push_back(b == std::string::npos ? std::string{} : cell.substr(b, e - b + 1));
  }
  return cells;
}

}  // namespace

Dataset load_csv_dataset(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open dataset " + path.string());
  std::string line;
  if (!std::getline(is, line)) throw DataError("dataset " + path.string() + " is empty");
  const auto header = split_csv_line(line);
  const auto label_it = std::ranges::find(header, "label");
  if (label_it == header.end()) throw DataError("dataset has no \"label\" column");
  const std::size_t label_col = static_cast<std::size_t>(label_it - header.begin());
  const std::size_t n_features = header.size() - 1;
  if (n_features == 0) throw DataError("dataset has no feature columns");

  std::vector<float> values;
  Dataset data;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw DataError("line " + std::to_string(line_no) + ": expected " +
                      std::to_string(header.size()) + " cells");
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const std::string& cell = cells[c];
      const char* end = cell.data() + cell.size();
      if (c == label_col) {
        std::size_t label = 0;
        auto [ptr, ec] = std::from_chars(cell.data(), end, label);
        if (ec != std::errc{} || ptr != end) {
          throw DataError("line " + std::to_string(line_no) + ": bad label \"" + cell + "\"");
        }
        data.labels.push_back(label);
        data.classes = std::max(data.classes, label + 1);
      } else {
        float v = 0;
        auto [ptr, ec] = std::from_chars(cell.data(), end, v);
        if (ec != std::errc{} || ptr != end || !std::isfinite(v)) {
          throw DataError("line " + std::to_string(line_no) + ": bad value \"" + cell + "\"");
        }
        values.push_back(v);
      }
    }
  }
  if (data.labels.empty()) throw DataError("dataset has no rows");
  data.features = FloatTensor::matrix(data.labels.size(), n_features, std::move(values));
  return data;
}

Dataset gather(const Dataset& data, const std::vector<std::size_t>& order,
               std::size_t begin, std::size_t end) {
  const std::size_t cols = data.features.cols();
  Dataset out;
  out.classes = data.classes;
  out.features = FloatTensor::zeros({end - begin, cols});
  out.labels.resize(end - begin);
  for (std::size_t i = begin; i < end; ++i) {
    const std::size_t src = order[i];
    std::copy_n(data.features.values.begin() + static_cast<std::ptrdiff_t>(src * cols), cols,
                out.features.values.begin() + static_cast<std::ptrdiff_t>((i - begin) * cols));
    out.labels[i - begin] = data.labels[src];
  }
  return out;
}

}  // namespace olaq
