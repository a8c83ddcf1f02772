// SPDX-License-Identifier: Apache-2.0
//
// olaq: command-line front end for quantization, decomposition, exact GEMM
// verification, informativeness analysis and the training harness.
//
// Exit codes: 0 success, 1 runtime failure (including a GEMM mismatch),
// 2 invalid input, configuration or command line.
#include <charconv>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "olaq/bfp.hpp"
#include "olaq/config.hpp"
#include "olaq/error.hpp"
#include "olaq/igemm.hpp"
#include "olaq/infostats.hpp"
#include "olaq/outlier.hpp"
#include "olaq/reference.hpp"
#include "olaq/serialize.hpp"
#include "olaq/train.hpp"

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitValidation = 2;

olaq::FloatTensor as_float(const olaq::AnyTensor& t) {
  if (const auto* f = std::get_if<olaq::FloatTensor>(&t)) return *f;
  return olaq::dequantize(std::get<olaq::QuantizedBlock>(t));
}

olaq::QuantizedBlock as_block(const olaq::AnyTensor& t, int bits) {
  if (const auto* q = std::get_if<olaq::QuantizedBlock>(&t)) return *q;
  return olaq::quantize_block(std::get<olaq::FloatTensor>(t), bits);
}

void write_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream os(path);
  if (!os) throw olaq::IoError("cannot write " + path);
  os << j.dump(2) << '\n';
}

std::ofstream open_binary(const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw olaq::IoError("cannot write " + path);
  return os;
}

// Accepts "1,2,5" and inclusive ranges such as "1..5" or "1..3,9".
std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> out;
  auto number = [&](std::string_view s) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
      throw olaq::ConfigError("invalid seed \"" + std::string(s) + "\"");
    }
    return v;
  };
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (const auto dots = item.find(".."); dots != std::string::npos) {
      const std::uint64_t lo = number(std::string_view(item).substr(0, dots));
      const std::uint64_t hi = number(std::string_view(item).substr(dots + 2));
      if (hi < lo || hi - lo > 10000) throw olaq::ConfigError("invalid seed range " + item);
      for (std::uint64_t s = lo; s <= hi; ++s) out.push_back(s);
    } else {
      out.push_back(number(item));
    }
  }
  return out;
}

nlohmann::json to_json(const olaq::AnalysisReport& r) {
  nlohmann::json j{{"n", r.n},
                   {"bits", r.bits},
                   {"quantization_step", r.quantization_step},
                   {"sensitivity_ratio", r.sensitivity_ratio},
                   {"sensitivity_ratio_se", r.sensitivity_ratio_se},
                   {"hcr_bound", r.hcr_bound},
                   {"chi2_estimate", r.chi2_estimate}};
  if (r.mixture) {
    j["mixture"] = {{"p", r.mixture->p},           {"total", r.mixture->total},
                    {"lower", r.mixture->lower},   {"upper", r.mixture->upper},
                    {"within", r.mixture->within}, {"between", r.mixture->between}};
  }
  if (r.mixture_tv_distance) j["mixture_tv_distance"] = *r.mixture_tv_distance;
  if (r.mixture_law_dithered) {
    j["mixture_law_dithered"] = {{"tv_distance", r.mixture_law_dithered->tv_distance},
                                 {"standard_error", r.mixture_law_dithered->standard_error}};
  }
  return j;
}

// Flattens nested objects into "a.b = value" lines.
void print_flat(std::ostream& os, const nlohmann::json& j, const std::string& prefix = "") {
  for (const auto& [key, value] : j.items()) {
    const std::string name = prefix.empty() ? key : prefix + "." + key;
    if (value.is_object()) {
      print_flat(os, value, name);
    } else {
      os << name << " = " << value.dump() << '\n';
    }
  }
}

int run_quantize(const std::string& in, int bits, const std::string& out) {
  const olaq::FloatTensor x = as_float(olaq::load_tensor(in));
  const olaq::QuantizedBlock qb = olaq::quantize_block(x, bits);
  olaq::save_tensor(out, qb);
  std::cout << "bits = " << qb.bit_width << "\nscale_exp = " << qb.scale_exp
            << "\nstep = " << olaq::quantization_step(qb) << '\n';
  return 0;
}

int run_decompose(const std::string& in, float gamma, int approach, const std::string& out) {
  const olaq::FloatTensor x = as_float(olaq::load_tensor(in));
  auto os = open_binary(out);
  const olaq::OutlierMask* mask = nullptr;
  olaq::Approach1Decomposition d1;
  olaq::Approach2Decomposition d2;
  if (approach == 1) {
    d1 = olaq::decompose_approach1(x, gamma);
    olaq::write_decomposition(os, d1);
    mask = &d1.mask;
  } else {
    d2 = olaq::decompose_approach2(x, gamma);
    olaq::write_decomposition(os, d2);
    mask = &d2.mask;
  }
  if (!os) throw olaq::IoError("failed writing " + out);
  std::cout << "approach = " << approach << "\noutliers = " << mask->indices.size()
            << "\noutlier_fraction = " << mask->fraction() << '\n';
  return 0;
}

int run_gemm_verify(const std::string& a_path, const std::string& b_path, int bits,
                    unsigned workers) {
  const olaq::QuantizedBlock a = as_block(olaq::load_tensor(a_path), bits);
  const olaq::QuantizedBlock b = as_block(olaq::load_tensor(b_path), bits);
  const olaq::AccumulatorMatrix acc = olaq::igemm(a, b, {workers, nullptr});
  const auto mismatch = olaq::reference::compare(acc, olaq::reference::bigint_gemm(a, b));
  if (mismatch) {
    std::cout << "mismatch at (" << mismatch->row << ", " << mismatch->col
              << "): expected " << mismatch->expected << ", got " << mismatch->actual << '\n';
    return kExitRuntime;
  }
  std::cout << "match " << acc.rows << "x" << acc.cols << " scale_exp " << acc.scale_exp
            << '\n';
  return 0;
}

int run_analyze(const std::string& in, float gamma, std::size_t bins, int bits,
                const std::string& out) {
  const olaq::FloatTensor x = as_float(olaq::load_tensor(in));
  const olaq::SampleSet sample(x.values);
  const nlohmann::json report = to_json(olaq::analyze_sample(sample, gamma, bins, bits));
  print_flat(std::cout, report);
  if (!out.empty()) write_json(out, report);
  return 0;
}

int run_train(const std::string& config_path, const std::string& out) {
  olaq::TrainConfig config = olaq::load_config(config_path);
  if (!out.empty()) config.output = out;
  const olaq::RunMetrics m = olaq::train(config);
  std::cout << "mode = " << olaq::to_string(m.mode) << "\nseed = " << m.seed
            << "\nfinal_accuracy = " << m.final_accuracy
            << "\ninput_outlier_fraction = " << m.input_outlier_fraction << '\n';
  for (const auto& [key, count] : m.gemm_counts) {
    std::cout << "gemm." << key << " = " << count << '\n';
  }
  return 0;
}

int run_compare(const std::string& config_path, const std::string& seeds_text,
                const std::vector<std::string>& mode_names, unsigned parallel,
                const std::string& out) {
  const olaq::TrainConfig config = olaq::load_config(config_path);
  std::vector<olaq::LayerMode> modes;
  for (const auto& name : mode_names) modes.push_back(olaq::parse_layer_mode(name));
  if (modes.empty()) modes = olaq::kAllModes;
  const olaq::ComparisonTable table =
      olaq::compare_modes(config, parse_seeds(seeds_text), modes, parallel);
  std::cout << olaq::to_delimited(table);
  if (!out.empty()) write_json(out, olaq::to_json(table));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Outlier-aware integer quantization and training toolkit"};
  app.require_subcommand(1);

  std::string in, out, a_path, b_path, config_path, seeds;
  int bits = 8, approach = 2;
  float gamma = olaq::kDefaultGamma;
  std::size_t bins = 64;
  unsigned workers = 1, parallel = 1;
  std::vector<std::string> modes;

  auto* quantize = app.add_subcommand("quantize", "Quantize a tensor to one block");
  quantize->add_option("--in", in, "Input tensor file")->required();
  quantize->add_option("--bits", bits, "Bit width (8, 12 or 16)")->required();
  quantize->add_option("--out", out, "Output tensor file")->required();

  auto* decompose = app.add_subcommand("decompose", "Outlier decomposition of a tensor");
  decompose->add_option("--in", in, "Input tensor file")->required();
  decompose->add_option("--gamma", gamma, "Outlier threshold")->required();
  decompose->add_option("--approach", approach, "1 (unified scale) or 2 (split)")
      ->required()
      ->check(CLI::IsMember({1, 2}));
  decompose->add_option("--out", out, "Output container file")->required();

  auto* verify = app.add_subcommand("gemm-verify", "Check igemm against a bignum oracle");
  verify->add_option("--a", a_path, "Left operand tensor file")->required();
  verify->add_option("--b", b_path, "Right operand tensor file")->required();
  verify->add_option("--bits", bits, "Bit width for float operands");
  verify->add_option("--workers", workers, "GEMM worker threads")->check(CLI::PositiveNumber);

  auto* analyze = app.add_subcommand("analyze", "Informativeness report for a sample");
  analyze->add_option("--in", in, "Input tensor file")->required();
  analyze->add_option("--gamma", gamma, "Mixture split threshold")->required();
  analyze->add_option("--bins", bins, "Histogram bins")->required();
  analyze->add_option("--bits", bits, "Quantization bit width");
  analyze->add_option("--out", out, "Structured report file");

  auto* train = app.add_subcommand("train", "Train one model from a config file");
  train->add_option("--config", config_path, "Config file")->required();
  train->add_option("--out", out, "Metrics file (overrides config output)");

  auto* compare = app.add_subcommand("compare", "Compare layer modes across seeds");
  compare->add_option("--config", config_path, "Config file")->required();
  compare->add_option("--seeds", seeds, "Seed list, e.g. 1,2,3 or 1..5")->required();
  compare->add_option("--modes", modes, "Subset of modes")->delimiter(',');
  compare->add_option("--parallel", parallel, "Concurrent runs")->check(CLI::PositiveNumber);
  compare->add_option("--out", out, "Structured table file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (*quantize) return run_quantize(in, bits, out);
    if (*decompose) return run_decompose(in, gamma, approach, out);
    if (*verify) return run_gemm_verify(a_path, b_path, bits, workers);
    if (*analyze) return run_analyze(in, gamma, bins, bits, out);
    if (*train) return run_train(config_path, out);
    if (*compare) return run_compare(config_path, seeds, modes, parallel, out);
  } catch (const olaq::Error& e) {
    std::cerr << "error (" << olaq::to_string(e.kind()) << "): " << e.what() << '\n';
    return e.is_validation() ? kExitValidation : kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitRuntime;
}
