// Copyright 2026 The cwlm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "cwlm/detector.hpp"
#include "cwlm/trajectory.hpp"

namespace cwlm {

// ---------------------------------------------------------------------------
// Post-selected averages

/// Averages folded with the sign of the final state: final_sign * Sz(t) and
/// final_sign * v(t). Sz lives on the stored grid, v on the window grid.
struct ConditionedAverage {
  std::vector<double> times;
  std::vector<double> mean_sigma_z_c;
  std::vector<double> stderr_sigma_z_c;

  std::vector<double> window_times;
  std::vector<double> mean_v_c;
  std::vector<double> stderr_v_c;

  /// Unconditional and per-bucket means of Sz, for consistency checks.
  std::vector<double> mean_sigma_z;
  std::vector<double> mean_sigma_z_plus;
  std::vector<double> mean_sigma_z_minus;

  std::size_t n_plus = 0;
  std::size_t n_minus = 0;
  /// Trajectories whose |Sz(T)| never settled above the threshold.
  std::size_t n_excluded = 0;
};

enum class BucketPolicy {
  require_both,  // throw StatisticsError if either final sign is missing
  allow_empty,
};

ConditionedAverage conditioned_averages(std::span<const Trajectory> ensemble,
                                        double settle_threshold = 0.999,
                                        BucketPolicy policy = BucketPolicy::require_both);

/// Reference curve tanh(t (1.15 + 2.8 / (1 + 4.2 t))) for the conditioned Sz.
double conditioned_sigma_z_reference(double t);

// ---------------------------------------------------------------------------
// Decision times

struct DecisionTimeSample {
  double h = 0.0;
  double decision_time = 0.0;
  int decided_sign = 1;
  bool was_wrong = false;
};

struct DecisionSet {
  double h = 0.0;
  std::vector<DecisionTimeSample> samples;
  /// Trajectories that never reached |Sz| >= 1 - h.
  std::size_t n_undecided = 0;

  std::size_t n_wrong() const;
  double error_rate() const;
  /// (wrong - n h/2) / sqrt(n p (1 - p)) with p = h/2.
  double error_rate_z_score() const;
  std::vector<double> times() const;
};

/// Watches Sz along one trajectory and records the first crossing of
/// |Sz| >= 1 - h for every threshold.
class DecisionTracker {
 public:
  explicit DecisionTracker(std::vector<double> thresholds);

  void reset();
  void observe(double t, double sigma_z);
  bool all_decided() const { return pending_ == 0; }

  const std::vector<double>& thresholds() const { return thresholds_; }
  /// Samples for the finished trajectory, nullopt where it never decided.
  std::vector<std::optional<DecisionTimeSample>> finish(int final_sign) const;

 private:
  std::vector<double> thresholds_;
  std::vector<double> levels_;
  std::vector<double> times_;
  std::vector<int> signs_;
  std::size_t pending_ = 0;
};

void validate_threshold(double h);

/// Decision times from stored trajectories. Requires the full detector grid
/// (record_stride == 1) so crossings are not quantized by the sampling window.
DecisionSet decision_times(std::span<const Trajectory> ensemble, double h);

struct DecisionRunConfig {
  DetectorParams detector = DetectorParams::from_theta(0.03);
  std::vector<double> thresholds{1e-3};
  std::uint64_t seed = 1;
  std::size_t n_trajectories = 1000;
  /// Trajectories stop early once |Sz| >= 1 - settle_threshold.
  double max_time = 30.0;
  double settle_threshold = 1e-12;
  QubitState initial = QubitState::superposition();

  void validate() const;
};

struct DecisionRun {
  std::vector<DecisionSet> sets;  // one per threshold, same order
  std::size_t n_trajectories = 0;
  /// Trajectories with |Sz| <= 0.999 at max_time; no final sign, excluded.
  std::size_t n_unsettled = 0;
};

/// Streams trajectories on the full detector grid without storing them.
/// Trajectory i uses the same random stream as run_trajectory(..., i).
DecisionRun sample_decisions(const DecisionRunConfig& cfg, unsigned workers = 0);

// ---------------------------------------------------------------------------
// Histograms and the c exp(-a/t - b t) fit

struct Histogram {
  double lo = 0.0;
  double width = 0.0;
  std::vector<std::size_t> counts;
  std::size_t total = 0;

  std::size_t bins() const { return counts.size(); }
  double edge(std::size_t i) const { return lo + width * static_cast<double>(i); }
  double center(std::size_t i) const { return lo + width * (static_cast<double>(i) + 0.5); }
  double density(std::size_t i) const;
};

/// 2 IQR n^(-1/3) bin width over [0, max], at least `min_bins` bins.
std::size_t freedman_diaconis_bins(std::span<const double> values, std::size_t min_bins = 50);

/// Uniform bins over [0, max(values)]; bins == 0 selects the rule above.
Histogram make_histogram(std::span<const double> values, std::size_t bins = 0);

struct FitResult {
  double a = 0.0;
  double b = 0.0;
  /// Normalization of c exp(-a/t - b t) over (0, inf).
  double c = 0.0;
  /// Intercept ln c of the least-squares fit, before renormalization.
  double fitted_log_c = 0.0;
  /// Count-weighted RMS of the log-density residuals.
  double residual = 0.0;
  double t_p = 0.0;
  std::size_t bins_used = 0;
  std::size_t n_samples = 0;
  Histogram histogram;

  double density(double t) const;
  double model_mean() const;
  double model_variance() const;
};

/// 1 / Int_0^inf exp(-a/t - b t) dt = 1 / (2 sqrt(a/b) K_1(2 sqrt(ab))).
double decision_density_normalization(double a, double b);

/// Weighted least squares of ln(density) = ln c - a/t - b t over bins with at
/// least `min_count` entries, weights proportional to the bin count.
FitResult fit_decision_density(std::span<const double> times, std::size_t bins = 0,
                               std::size_t min_count = 20);
FitResult fit_decision_density(std::span<const DecisionTimeSample> samples, std::size_t bins = 0,
                               std::size_t min_count = 20);

struct DistributionMoments {
  double mean = 0.0;
  double variance = 0.0;
  /// Center of the most populated histogram bin.
  double mode = 0.0;
  /// Only with a fit: 0.25 sqrt(a / b^3) and the exact variance of the fitted density.
  std::optional<double> variance_estimate;
  std::optional<double> model_variance;
};

DistributionMoments distribution_moments(std::span<const double> times,
                                         const FitResult* fit = nullptr);

}  // namespace cwlm
