// SPDX-License-Identifier: Apache-2.0
//
// Informativeness statistics for low-precision samples.
//
// With x_hat = x + delta, the sensitivity of a location family is the
// reciprocal variance, so the informativeness retained by a low-precision
// copy is V(x) / V(x_hat). The Hammersley-Chapman-Robbins quantity
// (E x - E x_hat)^2 / V(x_hat) lower-bounds chi^2(x || x_hat).
//
// Splitting a sample at a threshold turns it into a two-component mixture.
// The law of total variance gives
//
//   V = p V1 + (1 - p) V2 + p (m1 - m)^2 + (1 - p) (m2 - m)^2
//       \______ within ____/ \___________ between ___________/
//
// so the within-component variance never exceeds the total.
//
// All moments use the population convention (divide by n).
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace olaq {

class SampleSet {
 public:
  /// Throws InvalidInput if fewer than two values or any non-finite value.
  explicit SampleSet(std::vector<float> values);

  std::span<const float> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  double mean() const noexcept { return mean_; }
  double variance() const noexcept { return variance_; }

 private:
  std::vector<float> values_;
  double mean_ = 0.0;
  double variance_ = 0.0;
};

double population_mean(std::span<const float> values) noexcept;
double population_variance(std::span<const float> values) noexcept;

/// V(x) / V(x_hat) for paired samples.
double sensitivity_ratio(const SampleSet& x, const SampleSet& x_hat);

/// Delta-method standard error of sensitivity_ratio for paired samples.
double sensitivity_ratio_se(const SampleSet& x, const SampleSet& x_hat);

double hcr_lower_bound(const SampleSet& x, const SampleSet& x_hat);

enum class Chi2Correction {
  None,
  /// Subtracts the expected multinomial sampling noise of each bin from
  /// the squared difference; clamps the total at zero.
  Debiased,
};

/// Histogram estimate of chi^2(p || q) over `bins` equal-width bins on the
/// shared range of both samples, with add-one smoothing on every bin.
double chi2_estimate(const SampleSet& p, const SampleSet& q, std::size_t bins,
                     Chi2Correction correction = Chi2Correction::None);

struct MixtureVariance {
  double p = 0.0;  // fraction with x <= gamma
  double total = 0.0;
  double lower = 0.0;  // variance of x <= gamma
  double upper = 0.0;  // variance of x > gamma
  double within = 0.0;
  double between = 0.0;
};

/// Throws EmptyComponent if either side of the split has fewer than two
/// samples.
MixtureVariance mixture_variance_decomposition(const SampleSet& x,
                                               float gamma);

enum class GridRounding {
  /// Round-to-nearest on the grid; same element, same result.
  Deterministic,
  /// Uniform dither in [-step/2, step/2) drawn independently for the full
  /// sample and for each component before rounding.
  Dithered,
};

struct MixtureLawResult {
  double p = 0.0;
  /// Total-variation distance between the histogram of the quantized full
  /// sample and the p-weighted mixture of quantized component histograms.
  double tv_distance = 0.0;
  /// Noise scale of tv_distance under exact mixture equality: half the sum
  /// over grid cells of the standard error of the per-cell difference.
  double standard_error = 0.0;
};

MixtureLawResult mixture_law_check(const SampleSet& x, float gamma,
                                   double grid_step,
                                   GridRounding rounding = GridRounding::Deterministic,
                                   std::uint64_t seed = 0);

struct AnalysisReport {
  std::size_t n = 0;
  int bits = 8;
  double quantization_step = 0.0;
  double sensitivity_ratio = 0.0;
  double sensitivity_ratio_se = 0.0;
  double hcr_bound = 0.0;
  double chi2_estimate = 0.0;
  /// Absent when one side of the gamma split has fewer than two samples.
  std::optional<MixtureVariance> mixture;
  /// Shared-grid mixture check on the quantization grid, deterministic
  /// rounding and the dithered model.
  std::optional<double> mixture_tv_distance;
  std::optional<MixtureLawResult> mixture_law_dithered;
};

/// Quantizes the sample to one `bits`-wide block and reports how much
/// informativeness the quantized copy keeps, plus the mixture terms at gamma.
AnalysisReport analyze_sample(const SampleSet& x, float gamma,
                              std::size_t bins, int bits = 8);

}  // namespace olaq
