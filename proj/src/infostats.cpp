// SPDX-License-Identifier: Apache-2.0
#include "olaq/infostats.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <string>

#include "olaq/bfp.hpp"
#include "olaq/error.hpp"

namespace olaq {

double population_mean(std::span<const float> values) noexcept {
  if (values.empty()) return 0.0;
  double s = 0.0;
  for (float v : values) s += v;
  return s / static_cast<double>(values.size());
}

double population_variance(std::span<const float> values) noexcept {
  if (values.empty()) return 0.0;
  const double m = population_mean(values);
  double ss = 0.0;
  for (float v : values) {
    const double d = v - m;
    ss += d * d;
  }
  return ss / static_cast<double>(values.size());
}

SampleSet::SampleSet(std::vector<float> values) : values_(std::move(values)) {
  if (values_.size() < 2) throw InvalidInput("a sample set needs at least two values");
  if (!all_finite(values_)) throw InvalidInput("sample set contains non-finite values");
  mean_ = population_mean(values_);
  variance_ = population_variance(values_);
}

namespace {

void require_paired(const SampleSet& x, const SampleSet& x_hat) {
  if (x.size() != x_hat.size()) {
    throw InvalidInput("paired samples differ in size (" + std::to_string(x.size()) +
                       " vs " + std::to_string(x_hat.size()) + ")");
  }
}

void require_spread(const SampleSet& s) {
  if (s.variance() == 0.0) throw DegenerateVariance("low-precision sample has zero variance");
}

}  // namespace

double sensitivity_ratio(const SampleSet& x, const SampleSet& x_hat) {
  require_paired(x, x_hat);
  require_spread(x_hat);
  return x.variance() / x_hat.variance();
}

double sensitivity_ratio_se(const SampleSet& x, const SampleSet& x_hat) {
  require_paired(x, x_hat);
  require_spread(x_hat);
  const double vx = x.variance(), vh = x_hat.variance();
  const double r = vx / vh;
  const auto xs = x.values();
  const auto hs = x_hat.values();
  // Influence function of V(x)/V(x_hat) evaluated per pair.
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - x.mean();
    const double dh = hs[i] - x_hat.mean();
    const double psi = ((dx * dx - vx) - r * (dh * dh - vh)) / vh;
    sum_sq += psi * psi;
  }
  const double n = static_cast<double>(xs.size());
  return std::sqrt(sum_sq / n) / std::sqrt(n);
}

double hcr_lower_bound(const SampleSet& x, const SampleSet& x_hat) {
  require_spread(x_hat);
  const double gap = x.mean() - x_hat.mean();
  return gap * gap / x_hat.variance();
}

double chi2_estimate(const SampleSet& p, const SampleSet& q, std::size_t bins,
                     Chi2Correction correction) {
  if (bins < 2) throw InvalidInput("chi2 estimate needs at least two bins");
  const auto [pmin, pmax] = std::ranges::minmax(p.values());
  const auto [qmin, qmax] = std::ranges::minmax(q.values());
  const double lo = std::min(pmin, qmin);
  const double hi = std::max(pmax, qmax);

  std::vector<double> cp(bins, 0.0), cq(bins, 0.0);
  const double width = (hi - lo) / static_cast<double>(bins);
  auto bin_of = [&](float v) -> std::size_t {
    if (width == 0.0) return 0;
    const double b = std::floor((v - lo) / width);
    return static_cast<std::size_t>(std::clamp(b, 0.0, static_cast<double>(bins - 1)));
  };
  for (float v : p.values()) cp[bin_of(v)] += 1.0;
  for (float v : q.values()) cq[bin_of(v)] += 1.0;

  const double np = static_cast<double>(p.size());
  const double nq = static_cast<double>(q.size());
  const double b = static_cast<double>(bins);
  double chi2 = 0.0;
  for (std::size_t i = 0; i < bins; ++i) {
    const double pi = (cp[i] + 1.0) / (np + b);
    const double qi = (cq[i] + 1.0) / (nq + b);
    double num = (pi - qi) * (pi - qi);
    if (correction == Chi2Correction::Debiased) {
      num -= pi * (1.0 - pi) / (np - 1.0) + qi * (1.0 - qi) / (nq - 1.0);
    }
    chi2 += num / qi;
  }
  return std::max(chi2, 0.0);
}

namespace {

struct Split {
  std::vector<float> lower;
  std::vector<float> upper;
};

Split split_at(const SampleSet& x, float gamma) {
  Split s;
  for (float v : x.values()) (v <= gamma ? s.lower : s.upper).push_back(v);
  if (s.lower.size() < 2 || s.upper.size() < 2) {
    throw EmptyComponent("split at gamma=" + std::to_string(gamma) + " leaves " +
                         std::to_string(s.lower.size()) + " values at or below and " +
                         std::to_string(s.upper.size()) +
                         " above; each side needs at least two");
  }
  return s;
}

}  // namespace

MixtureVariance mixture_variance_decomposition(const SampleSet& x, float gamma) {
  const Split s = split_at(x, gamma);
  const double n = static_cast<double>(x.size());
  const double m = x.mean();
  const double m1 = population_mean(s.lower);
  const double m2 = population_mean(s.upper);

  MixtureVariance out;
  out.p = static_cast<double>(s.lower.size()) / n;
  out.total = x.variance();
  out.lower = population_variance(s.lower);
  out.upper = population_variance(s.upper);
  out.within = out.p * out.lower + (1.0 - out.p) * out.upper;
  out.between = out.p * (m1 - m) * (m1 - m) + (1.0 - out.p) * (m2 - m) * (m2 - m);
  return out;
}

MixtureLawResult mixture_law_check(const SampleSet& x, float gamma,
                                   double grid_step, GridRounding rounding,
                                   std::uint64_t seed) {
  if (!(grid_step > 0.0) || !std::isfinite(grid_step)) {
    throw InvalidInput("grid step must be positive and finite");
  }
  const Split s = split_at(x, gamma);

  // Each population gets its own dither stream.
  std::mt19937_64 full_rng(seed);
  std::mt19937_64 lower_rng(seed ^ 0x9E3779B97F4A7C15ULL);
  std::mt19937_64 upper_rng(seed ^ 0xC2B2AE3D27D4EB4FULL);
  std::uniform_real_distribution<double> dither(-0.5, 0.5);

  auto cell = [&](float v, std::mt19937_64& rng) -> long long {
    double t = static_cast<double>(v) / grid_step;
    if (rounding == GridRounding::Dithered) t += dither(rng);
    return std::llround(std::nearbyint(t));
  };

  struct Counts {
    long long full = 0, lower = 0, upper = 0;
  };
  std::map<long long, Counts> cells;
  for (float v : x.values()) ++cells[cell(v, full_rng)].full;
  for (float v : s.lower) ++cells[cell(v, lower_rng)].lower;
  for (float v : s.upper) ++cells[cell(v, upper_rng)].upper;

  const double n = static_cast<double>(x.size());
  const double n1 = static_cast<double>(s.lower.size());
  const double n2 = static_cast<double>(s.upper.size());

  MixtureLawResult out;
  out.p = n1 / n;
  // With p = n1/n the mixture mass of a cell is (c_lower + c_upper)/n, so
  // the per-cell difference is an exact integer count over n.
  long long abs_diff = 0;
  double se_sum = 0.0;
  for (const auto& [key, c] : cells) {
    abs_diff += std::llabs(c.full - c.lower - c.upper);
    const double h = c.full / n, h1 = c.lower / n1, h2 = c.upper / n2;
    const double var = n * h * (1 - h) + n1 * h1 * (1 - h1) + n2 * h2 * (1 - h2);
    se_sum += std::sqrt(var);
  }
  out.tv_distance = 0.5 * static_cast<double>(abs_diff) / n;
  out.standard_error = 0.5 * se_sum / n;
  return out;
}

AnalysisReport analyze_sample(const SampleSet& x, float gamma, std::size_t bins,
                              int bits) {
  const FloatTensor source = FloatTensor::vector(
      std::vector<float>(x.values().begin(), x.values().end()));
  const QuantizedBlock qb = quantize_block(source, bits);
  const SampleSet x_hat(dequantize(qb).values);

  AnalysisReport r;
  r.n = x.size();
  r.bits = bits;
  r.quantization_step = quantization_step(qb);
  r.sensitivity_ratio = sensitivity_ratio(x, x_hat);
  r.sensitivity_ratio_se = sensitivity_ratio_se(x, x_hat);
  r.hcr_bound = hcr_lower_bound(x, x_hat);
  r.chi2_estimate = chi2_estimate(x, x_hat, bins);
  try {
    r.mixture = mixture_variance_decomposition(x, gamma);
    r.mixture_tv_distance =
        mixture_law_check(x, gamma, r.quantization_step).tv_distance;
    r.mixture_law_dithered =
        mixture_law_check(x, gamma, r.quantization_step, GridRounding::Dithered);
  } catch (const EmptyComponent&) {
    // One-sided split is degenerate for this sample; leave mixture fields empty.
  }
  return r;
}

}  // namespace olaq
