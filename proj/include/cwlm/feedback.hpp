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
#include <functional>
#include <numbers>
#include <vector>

#include "cwlm/oracle.hpp"
#include "cwlm/trajectory.hpp"

namespace cwlm {

/// Threshold feedback: collect the normalized reading v over each window of
/// length T_f, then rotate about y by sgn(v) * rotation_magnitude if |v| > I.
/// The rotation is instantaneous. Cycles before `burn_in_cycles` are run but
/// excluded from every average.
struct FeedbackConfig {
  double threshold = 0.9;
  double collection_time = 0.2;
  std::size_t n_cycles = 100;
  std::size_t burn_in_cycles = 10;
  double rotation_magnitude = std::numbers::pi / 4.0;
  /// Detector, seed and trajectory count; sampling interval and total time
  /// are derived from the cycle settings.
  SimulationConfig base;
  /// Keep the ensemble-mean Sx at every detector step.
  bool record_trace = false;

  void validate() const;
  SimulationConfig simulation() const;
  double effective_collection_time() const { return simulation().effective_sampling_interval(); }
};

/// The rotation rule alpha(v) = sgn(v) * magnitude * Theta(|v| > I).
std::optional<Rotation> threshold_rule(double v, double threshold, double magnitude);

struct FeedbackResult {
  double sigma_bar_x = 0.0;
  double stderr_sigma_bar_x = 0.0;
  /// <Sx> right after the (possibly empty) correction at each cycle boundary.
  double sigma_x_after_correction = 0.0;
  double stderr_after_correction = 0.0;
  double correction_rate = 0.0;
  /// Time-averaged <Sz>; zero by symmetry.
  double mean_sigma_z = 0.0;
  double stderr_sigma_z = 0.0;

  /// Ensemble mean of the cycle-averaged Sx, one entry per cycle (burn-in included).
  std::vector<double> cycle_means;
  /// Paired drift between the first and second half of the measured cycles, in sigmas.
  double drift_sigma = 0.0;
  bool steady_state = true;

  std::vector<double> trace_times;
  std::vector<double> trace_sigma_x;

  std::size_t n_trajectories = 0;
  double effective_collection_time = 0.0;
};

FeedbackResult run_feedback(const FeedbackConfig& cfg, unsigned workers = 0);

/// Single feedback trajectory on the full detector grid (for trace plots).
Trajectory feedback_trajectory(const FeedbackConfig& cfg, std::uint64_t stream_id);

struct SweepPoint {
  double threshold = 0.0;
  double collection_time = 0.0;
  FeedbackResult result;
  oracle::FeedbackEfficiency analytic;
};

std::vector<SweepPoint> sweep(const std::vector<double>& thresholds,
                              const std::vector<double>& collection_times,
                              const FeedbackConfig& prototype, unsigned workers = 0);

using Objective = std::function<double(double threshold, double collection_time)>;

struct OptimizerOptions {
  double initial_step_threshold = 0.2;
  double initial_step_time = 0.05;
  /// Stop once both steps fall below this.
  double min_step = 0.02;
  std::size_t max_iterations = 500;
  double threshold_min = 0.0;
  double threshold_max = 4.0;
  double time_min = 0.02;
  double time_max = 5.0;
};

struct OptimizerStep {
  std::size_t iteration = 0;
  double threshold = 0.0;
  double collection_time = 0.0;
  double value = 0.0;
  double step_threshold = 0.0;
  double step_time = 0.0;
  bool moved = false;
};

struct OptimizationResult {
  double threshold = 0.0;
  double collection_time = 0.0;
  double value = 0.0;
  std::size_t evaluations = 0;
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<OptimizerStep> trace;
};

/// Compass search with shrinking steps: probe +-step along each parameter,
/// move to the best improvement, halve both steps when nothing improves.
OptimizationResult optimize(const Objective& objective, double threshold0, double time0,
                            const OptimizerOptions& options = {});

Objective oracle_objective();

/// Monte Carlo objective. Every evaluation reuses the prototype seed, so two
/// nearby settings see the same random numbers.
Objective monte_carlo_objective(const FeedbackConfig& prototype, unsigned workers = 0);

}  // namespace cwlm
