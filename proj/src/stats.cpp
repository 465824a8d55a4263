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

#include "cwlm/stats.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cwlm/error.hpp"
#include "cwlm/parallel.hpp"

namespace cwlm {

namespace {

// Running mean and sum of squared deviations per grid point.
struct ColumnStats {
  explicit ColumnStats(std::size_t n) : mean(n, 0.0), m2(n, 0.0) {}

  void add(std::size_t i, double value, std::size_t count) {
    const double delta = value - mean[i];
    mean[i] += delta / static_cast<double>(count);
    m2[i] += delta * (value - mean[i]);
  }

  std::vector<double> standard_errors(std::size_t count) const {
    std::vector<double> se(mean.size(), std::numeric_limits<double>::quiet_NaN());
    if (count < 2) return se;
    const double n = static_cast<double>(count);
    for (std::size_t i = 0; i < se.size(); ++i) se[i] = std::sqrt(m2[i] / (n - 1.0) / n);
    return se;
  }

  std::vector<double> mean;
  std::vector<double> m2;
};

double quantile(std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

ConditionedAverage conditioned_averages(std::span<const Trajectory> ensemble,
                                        double settle_threshold, BucketPolicy policy) {
  if (ensemble.empty()) throw StatisticsError("empty ensemble");
  const std::size_t points = ensemble.front().times.size();
  const std::size_t windows = ensemble.front().sampled_v.size();
  for (const Trajectory& t : ensemble) {
    if (t.times.size() != points || t.sampled_v.size() != windows) {
      throw ConfigError("trajectories do not share a time grid");
    }
  }

  ConditionedAverage out;
  out.times = ensemble.front().times;
  out.window_times = ensemble.front().window_times;

  ColumnStats zc(points), vc(windows), z_all(points), z_plus(points), z_minus(points);
  std::size_t n = 0;
  for (const Trajectory& t : ensemble) {
    const double final_z = t.sigma_z.back();
    if (std::abs(final_z) <= settle_threshold) {
      ++out.n_excluded;
      continue;
    }
    const double sign = final_z > 0.0 ? 1.0 : -1.0;
    ++n;
    std::size_t& bucket = sign > 0.0 ? out.n_plus : out.n_minus;
    ColumnStats& bucket_stats = sign > 0.0 ? z_plus : z_minus;
    ++bucket;
    for (std::size_t i = 0; i < points; ++i) {
      zc.add(i, sign * t.sigma_z[i], n);
      z_all.add(i, t.sigma_z[i], n);
      bucket_stats.add(i, t.sigma_z[i], bucket);
    }
    for (std::size_t i = 0; i < windows; ++i) vc.add(i, sign * t.sampled_v[i], n);
  }

  if (n == 0) throw StatisticsError("no trajectory settled into a final state");
  if (policy == BucketPolicy::require_both && (out.n_plus == 0 || out.n_minus == 0)) {
    throw StatisticsError("empty post-selection bucket (n_plus=" + std::to_string(out.n_plus) +
                          ", n_minus=" + std::to_string(out.n_minus) + ")");
  }

  out.mean_sigma_z_c = zc.mean;
  out.stderr_sigma_z_c = zc.standard_errors(n);
  out.mean_v_c = vc.mean;
  out.stderr_v_c = vc.standard_errors(n);
  out.mean_sigma_z = z_all.mean;
  out.mean_sigma_z_plus = z_plus.mean;
  out.mean_sigma_z_minus = z_minus.mean;
  return out;
}

double conditioned_sigma_z_reference(double t) {
  return std::tanh(t * (1.15 + 2.8 / (1.0 + 4.2 * t)));
}

// ---------------------------------------------------------------------------

std::size_t DecisionSet::n_wrong() const {
  return static_cast<std::size_t>(
      std::count_if(samples.begin(), samples.end(), [](const auto& s) { return s.was_wrong; }));
}

double DecisionSet::error_rate() const {
  if (samples.empty()) return std::numeric_limits<double>::quiet_NaN();
  return static_cast<double>(n_wrong()) / static_cast<double>(samples.size());
}

double DecisionSet::error_rate_z_score() const {
  const double n = static_cast<double>(samples.size());
  const double p = 0.5 * h;
  return (static_cast<double>(n_wrong()) - n * p) / std::sqrt(n * p * (1.0 - p));
}

std::vector<double> DecisionSet::times() const {
  std::vector<double> t;
  t.reserve(samples.size());
  for (const auto& s : samples) t.push_back(s.decision_time);
  return t;
}

void validate_threshold(double h) {
  if (!(h > 0.0 && h < 1.0)) throw ConfigError("decision threshold h must lie in (0, 1)");
}

DecisionTracker::DecisionTracker(std::vector<double> thresholds)
    : thresholds_(std::move(thresholds)) {
  if (thresholds_.empty()) throw ConfigError("no decision thresholds given");
  for (double h : thresholds_) validate_threshold(h);
  levels_.reserve(thresholds_.size());
  for (double h : thresholds_) levels_.push_back(1.0 - h);
  reset();
}

void DecisionTracker::reset() {
  times_.assign(thresholds_.size(), -1.0);
  signs_.assign(thresholds_.size(), 0);
  pending_ = thresholds_.size();
}

void DecisionTracker::observe(double t, double sigma_z) {
  if (pending_ == 0) return;
  const double magnitude = std::abs(sigma_z);
  for (std::size_t j = 0; j < levels_.size(); ++j) {
    if (times_[j] < 0.0 && magnitude >= levels_[j]) {
      times_[j] = t;
      signs_[j] = sigma_z > 0.0 ? 1 : -1;
      --pending_;
    }
  }
}

std::vector<std::optional<DecisionTimeSample>> DecisionTracker::finish(int final_sign) const {
  std::vector<std::optional<DecisionTimeSample>> out(thresholds_.size());
  for (std::size_t j = 0; j < thresholds_.size(); ++j) {
    if (times_[j] < 0.0) continue;
    out[j] = DecisionTimeSample{thresholds_[j], times_[j], signs_[j], signs_[j] != final_sign};
  }
  return out;
}

DecisionSet decision_times(std::span<const Trajectory> ensemble, double h) {
  validate_threshold(h);
  DecisionSet set;
  set.h = h;
  DecisionTracker tracker({h});
  for (const Trajectory& t : ensemble) {
    if (t.record_stride != 1) {
      throw ConfigError("decision times need trajectories stored on the full detector grid");
    }
    tracker.reset();
    for (std::size_t i = 0; i < t.sigma_z.size() && !tracker.all_decided(); ++i) {
      tracker.observe(t.times[i], t.sigma_z[i]);
    }
    if (auto s = tracker.finish(t.final_sign).front()) {
      set.samples.push_back(*s);
    } else {
      ++set.n_undecided;
    }
  }
  return set;
}

void DecisionRunConfig::validate() const {
  detector.validate();
  if (thresholds.empty()) throw ConfigError("no decision thresholds given");
  for (double h : thresholds) {
    validate_threshold(h);
    if (h <= settle_threshold) {
      throw ConfigError("decision threshold must exceed the settle threshold");
    }
  }
  if (n_trajectories < 1) throw ConfigError("need at least one trajectory");
  if (!(max_time > detector.dt)) throw ConfigError("max time must exceed one detector step");
  if (!(settle_threshold > 0.0 && settle_threshold < 1e-3)) {
    throw ConfigError("settle threshold must lie in (0, 1e-3)");
  }
  if (!initial.valid()) throw ConfigError("initial state outside the Bloch ball");
}

DecisionRun sample_decisions(const DecisionRunConfig& cfg, unsigned workers) {
  cfg.validate();
  const std::size_t n_h = cfg.thresholds.size();
  const double sin2 = cfg.detector.deflection();
  const double cos2 = cfg.detector.coherence_factor();
  const double dt = cfg.detector.dt;
  const auto max_steps = static_cast<std::size_t>(std::ceil(cfg.max_time / dt));
  const double settle_level = 1.0 - cfg.settle_threshold;

  // Slot per (trajectory, threshold) keeps the result independent of scheduling.
  std::vector<std::optional<DecisionTimeSample>> slots(cfg.n_trajectories * n_h);
  std::vector<char> settled(cfg.n_trajectories, 0);

  parallel_for(cfg.n_trajectories, workers, [&](std::size_t i) {
    RandomStream rng(cfg.seed, i);
    DecisionTracker tracker(cfg.thresholds);
    QubitState s = cfg.initial;
    tracker.observe(0.0, s.z);
    std::size_t step = 0;
    while (step < max_steps && std::abs(s.z) < settle_level) {
      s = detail::measure(s, sin2, cos2, rng.uniform()).post_state;
      ++step;
      tracker.observe(static_cast<double>(step) * dt, s.z);
    }
    if (std::abs(s.z) <= 0.999) return;
    settled[i] = 1;
    auto results = tracker.finish(s.z > 0.0 ? 1 : -1);
    std::copy(results.begin(), results.end(), slots.begin() + static_cast<std::ptrdiff_t>(i * n_h));
  });

  DecisionRun run;
  run.n_trajectories = cfg.n_trajectories;
  run.sets.resize(n_h);
  for (std::size_t j = 0; j < n_h; ++j) {
    run.sets[j].h = cfg.thresholds[j];
    run.sets[j].samples.reserve(cfg.n_trajectories);
  }
  for (std::size_t i = 0; i < cfg.n_trajectories; ++i) {
    if (!settled[i]) {
      ++run.n_unsettled;
      continue;
    }
    for (std::size_t j = 0; j < n_h; ++j) {
      if (const auto& s = slots[i * n_h + j]) {
        run.sets[j].samples.push_back(*s);
      } else {
        ++run.sets[j].n_undecided;
      }
    }
  }
  return run;
}

// ---------------------------------------------------------------------------

double Histogram::density(std::size_t i) const {
  return static_cast<double>(counts[i]) / (static_cast<double>(total) * width);
}

std::size_t freedman_diaconis_bins(std::span<const double> values, std::size_t min_bins) {
  if (values.size() < 2) return min_bins;
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double iqr = quantile(sorted, 0.75) - quantile(sorted, 0.25);
  const double width = 2.0 * iqr * std::pow(static_cast<double>(sorted.size()), -1.0 / 3.0);
  if (!(width > 0.0)) return min_bins;
  constexpr double kMaxBins = 100000.0;
  const double bins = std::min(kMaxBins, std::ceil(sorted.back() / width));
  return std::max(min_bins, static_cast<std::size_t>(bins));
}

Histogram make_histogram(std::span<const double> values, std::size_t bins) {
  if (values.empty()) throw StatisticsError("cannot histogram an empty sample");
  if (bins == 0) bins = freedman_diaconis_bins(values);
  const double hi = *std::max_element(values.begin(), values.end());
  if (!(hi > 0.0)) throw StatisticsError("histogram range is empty");
  Histogram hist;
  hist.lo = 0.0;
  hist.width = hi / static_cast<double>(bins);
  hist.counts.assign(bins, 0);
  hist.total = values.size();
  for (double v : values) {
    if (v < 0.0) throw StatisticsError("negative value in decision-time histogram");
    const auto i = std::min(bins - 1, static_cast<std::size_t>(v / hist.width));
    ++hist.counts[i];
  }
  return hist;
}

double decision_density_normalization(double a, double b) {
  const double x = 2.0 * std::sqrt(a * b);
  return 1.0 / (2.0 * std::sqrt(a / b) * std::cyl_bessel_k(1.0, x));
}

double FitResult::density(double t) const {
  if (!(t > 0.0)) return 0.0;
  return c * std::exp(-a / t - b * t);
}

double FitResult::model_mean() const {
  const double x = 2.0 * std::sqrt(a * b);
  return std::sqrt(a / b) * std::cyl_bessel_k(2.0, x) / std::cyl_bessel_k(1.0, x);
}

double FitResult::model_variance() const {
  const double x = 2.0 * std::sqrt(a * b);
  const double second = (a / b) * std::cyl_bessel_k(3.0, x) / std::cyl_bessel_k(1.0, x);
  const double mean = model_mean();
  return second - mean * mean;
}

FitResult fit_decision_density(std::span<const double> times, std::size_t bins,
                               std::size_t min_count) {
  constexpr std::size_t kMinSamples = 1000;
  if (times.size() < kMinSamples) {
    throw StatisticsError("decision-time fit needs at least 1000 samples, got " +
                          std::to_string(times.size()));
  }
  FitResult fit;
  fit.n_samples = times.size();
  fit.histogram = make_histogram(times, bins);
  const Histogram& hist = fit.histogram;

  std::vector<std::size_t> used;
  for (std::size_t i = 0; i < hist.bins(); ++i) {
    if (hist.counts[i] >= min_count && hist.center(i) > 0.0) used.push_back(i);
  }
  if (used.size() < 3) throw StatisticsError("degenerate histogram: fewer than 3 usable bins");

  const auto rows = static_cast<Eigen::Index>(used.size());
  Eigen::MatrixXd design(rows, 3);
  Eigen::VectorXd target(rows);
  Eigen::VectorXd weight(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const std::size_t i = used[static_cast<std::size_t>(r)];
    const double t = hist.center(i);
    const double w = std::sqrt(static_cast<double>(hist.counts[i]));
    weight(r) = w;
    design.row(r) << w, -w / t, -w * t;
    target(r) = w * std::log(hist.density(i));
  }
  const Eigen::Vector3d p = design.colPivHouseholderQr().solve(target);
  fit.fitted_log_c = p(0);
  fit.a = p(1);
  fit.b = p(2);
  fit.bins_used = used.size();
  if (!(fit.a > 0.0 && fit.b > 0.0)) {
    throw StatisticsError("fit produced non-positive coefficients");
  }
  const Eigen::VectorXd resid = design * p - target;
  fit.residual = std::sqrt(resid.squaredNorm() / weight.squaredNorm());
  fit.c = decision_density_normalization(fit.a, fit.b);
  fit.t_p = std::sqrt(fit.a / fit.b);
  return fit;
}

FitResult fit_decision_density(std::span<const DecisionTimeSample> samples, std::size_t bins,
                               std::size_t min_count) {
  std::vector<double> times;
  times.reserve(samples.size());
  for (const auto& s : samples) times.push_back(s.decision_time);
  return fit_decision_density(times, bins, min_count);
}

DistributionMoments distribution_moments(std::span<const double> times, const FitResult* fit) {
  if (times.empty()) throw StatisticsError("moments of an empty sample");
  DistributionMoments m;
  double mean = 0.0;
  double m2 = 0.0;
  std::size_t n = 0;
  for (double t : times) {
    ++n;
    const double delta = t - mean;
    mean += delta / static_cast<double>(n);
    m2 += delta * (t - mean);
  }
  m.mean = mean;
  m.variance = n > 1 ? m2 / static_cast<double>(n - 1) : 0.0;
  if (times.size() > 1 && *std::max_element(times.begin(), times.end()) > 0.0) {
    const Histogram hist = make_histogram(times);
    const auto peak = std::max_element(hist.counts.begin(), hist.counts.end());
    m.mode = hist.center(static_cast<std::size_t>(peak - hist.counts.begin()));
  } else {
    m.mode = times.front();
  }
  if (fit != nullptr) {
    m.variance_estimate = 0.25 * std::sqrt(fit->a / (fit->b * fit->b * fit->b));
    m.model_variance = fit->model_variance();
  }
  return m;
}

}  // namespace cwlm
