// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <future>
#include <iomanip>
#include <sstream>

#include "olaq/error.hpp"
#include "olaq/train.hpp"

namespace olaq {

ComparisonTable compare_modes(const TrainConfig& config,
                              const std::vector<std::uint64_t>& seeds,
                              const std::vector<LayerMode>& modes,
                              unsigned parallel_runs) {
  if (seeds.size() < 2) throw ConfigError("a comparison needs at least two seeds");
  if (modes.empty()) throw ConfigError("a comparison needs at least one mode");
  validate(config);
  parallel_runs = std::max(1u, parallel_runs);

  struct Job {
    std::size_t mode_index;
    std::size_t seed_index;
  };
  std::vector<Job> jobs;
  for (std::size_t m = 0; m < modes.size(); ++m) {
    for (std::size_t s = 0; s < seeds.size(); ++s) jobs.push_back({m, s});
  }

  auto run = [&](const Job& job) {
    TrainConfig c = config;
    c.mode = modes[job.mode_index];
    c.seed = seeds[job.seed_index];
    c.synth.seed = c.seed;
    c.output.clear();
    return train(c).final_accuracy;
  };

  std::vector<double> results(jobs.size());
  for (std::size_t begin = 0; begin < jobs.size(); begin += parallel_runs) {
    const std::size_t end = std::min(jobs.size(), begin + parallel_runs);
    std::vector<std::future<double>> wave;
    for (std::size_t j = begin; j < end; ++j) {
      wave.push_back(std::async(std::launch::async, run, jobs[j]));
    }
    for (std::size_t j = begin; j < end; ++j) results[j] = wave[j - begin].get();
  }

  ComparisonTable table;
  table.seeds = seeds;
  for (std::size_t m = 0; m < modes.size(); ++m) {
    ModeSummary row;
    row.mode = modes[m];
    for (std::size_t s = 0; s < seeds.size(); ++s) {
      row.accuracies.push_back(results[m * seeds.size() + s]);
    }
    const double n = static_cast<double>(row.accuracies.size());
    double sum = 0.0;
    for (double a : row.accuracies) sum += a;
    row.mean = sum / n;
    double ss = 0.0;
    for (double a : row.accuracies) ss += (a - row.mean) * (a - row.mean);
    row.stddev = std::sqrt(ss / (n - 1.0));
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::string to_delimited(const ComparisonTable& table, char delimiter) {
  std::ostringstream os;
  os << "mode" << delimiter << "mean" << delimiter << "sd" << delimiter << "n\n";
  os << std::fixed << std::setprecision(2);
  for (const auto& row : table.rows) {
    os << to_string(row.mode) << delimiter << 100.0 * row.mean << delimiter
       << 100.0 * row.stddev << delimiter << row.accuracies.size() << '\n';
  }
  return os.str();
}

nlohmann::json to_json(const ComparisonTable& table) {
  nlohmann::json j;
  j["seeds"] = table.seeds;
  auto& rows = j["modes"] = nlohmann::json::array();
  for (const auto& row : table.rows) {
    rows.push_back({{"mode", std::string(to_string(row.mode))},
                    {"accuracies", row.accuracies},
                    {"mean", row.mean},
                    {"sd", row.stddev},
                    {"n", row.accuracies.size()}});
  }
  return j;
}

}  // namespace olaq
