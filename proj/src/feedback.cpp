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

#include "cwlm/feedback.hpp"

#include <cmath>
#include <limits>
#include <algorithm>
#include <map>
#include <memory>
#include <random>
#include <tuple>

#include "cwlm/error.hpp"
#include "cwlm/parallel.hpp"

namespace cwlm {

void FeedbackConfig::validate() const {
  base.detector.validate();
  if (!(threshold >= 0.0)) throw ConfigError("reaction threshold I must be >= 0");
  if (!(collection_time >= 10.0 * base.detector.dt)) {
    throw ConfigError("collection time must span at least 10 detector steps");
  }
  if (burn_in_cycles < 7) throw ConfigError("burn-in must be at least 7 cycles");
  if (n_cycles < 2) throw ConfigError("need at least 2 measured cycles");
  if (!std::isfinite(rotation_magnitude)) throw ConfigError("rotation magnitude must be finite");
  if (base.n_trajectories < 1) throw ConfigError("need at least one trajectory");
  if (!(base.output_noise >= 0.0)) throw ConfigError("output noise power must be >= 0");
  simulation().validate();
}

SimulationConfig FeedbackConfig::simulation() const {
  SimulationConfig sim = base;
  sim.sampling_interval = collection_time;
  sim.hamiltonian.reset();
  sim.full_grid = false;
  sim.total_time = static_cast<double>(burn_in_cycles + n_cycles) * sim.effective_sampling_interval();
  return sim;
}

std::optional<Rotation> threshold_rule(double v, double threshold, double magnitude) {
  if (!(std::abs(v) > threshold)) return std::nullopt;
  return Rotation{v > 0.0 ? magnitude : -magnitude, Axis::y};
}

namespace {

Controller make_controller(const FeedbackConfig& cfg, std::uint64_t stream_id) {
  const double threshold = cfg.threshold;
  const double magnitude = cfg.rotation_magnitude;
  if (cfg.base.output_noise <= 0.0) {
    return [=](const WindowReading& r) { return threshold_rule(r.v, threshold, magnitude); };
  }
  // Non-ideal detector: the controller only sees the noisy reading.
  const double sd = std::sqrt(cfg.base.output_noise / cfg.effective_collection_time());
  auto rng = std::make_shared<RandomStream>(cfg.base.seed, stream_id, StreamDomain::output_noise);
  auto gauss = std::make_shared<std::normal_distribution<double>>(0.0, sd);
  return [=](const WindowReading& r) {
    return threshold_rule(r.v + (*gauss)(*rng), threshold, magnitude);
  };
}

struct TrajectoryTally {
  std::vector<double> cycle_x;
  double after_sum = 0.0;
  double z_sum = 0.0;
  std::size_t corrections = 0;
  std::vector<double> trace;
};

class FeedbackObserver {
 public:
  FeedbackObserver(const FeedbackConfig& cfg, std::size_t steps_per_cycle, std::size_t trace_stride)
      : burn_in_(cfg.burn_in_cycles),
        inv_steps_(1.0 / static_cast<double>(steps_per_cycle)),
        trace_stride_(trace_stride) {
    tally_.cycle_x.reserve(cfg.burn_in_cycles + cfg.n_cycles);
  }

  void on_start(const QubitState& s) {
    prev_x_ = s.x;
    prev_z_ = s.z;
    if (trace_stride_ > 0) tally_.trace.push_back(s.x);
  }

  void on_step(std::size_t step, const QubitState& s, int) {
    // Trapezoid rule over the step.
    x_acc_ += 0.5 * (prev_x_ + s.x);
    z_acc_ += 0.5 * (prev_z_ + s.z);
    prev_x_ = s.x;
    prev_z_ = s.z;
    if (trace_stride_ > 0 && step % trace_stride_ == 0) {
      tally_.trace.push_back(s.x);
      traced_step_ = step;
    }
    step_ = step;
  }

  void on_window(std::size_t w, double, const QubitState& s, bool corrected) {
    tally_.cycle_x.push_back(x_acc_ * inv_steps_);
    if (w >= burn_in_) {
      tally_.z_sum += z_acc_ * inv_steps_;
      tally_.after_sum += s.x;
      if (corrected) ++tally_.corrections;
    }
    x_acc_ = 0.0;
    z_acc_ = 0.0;
    prev_x_ = s.x;
    prev_z_ = s.z;
    if (corrected && trace_stride_ > 0 && traced_step_ == step_) tally_.trace.back() = s.x;
  }

  TrajectoryTally take() { return std::move(tally_); }

 private:
  std::size_t burn_in_;
  double inv_steps_;
  std::size_t trace_stride_;
  double prev_x_ = 0.0;
  double prev_z_ = 0.0;
  double x_acc_ = 0.0;
  double z_acc_ = 0.0;
  std::size_t step_ = 0;
  std::size_t traced_step_ = 0;
  TrajectoryTally tally_;
};

std::pair<double, double> mean_and_stderr(const std::vector<double>& values) {
  const double n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  if (values.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

}  // namespace

FeedbackResult run_feedback(const FeedbackConfig& cfg, unsigned workers) {
  cfg.validate();
  const SimulationConfig sim = cfg.simulation();
  const std::size_t k_steps = sim.steps_per_window();
  const std::size_t total_cycles = cfg.burn_in_cycles + cfg.n_cycles;
  const std::size_t n = sim.n_trajectories;
  // Roughly 4000 trace points whatever the run length.
  const std::size_t trace_stride =
      cfg.record_trace ? std::max<std::size_t>(1, sim.total_steps() / 4000) : 0;

  std::vector<TrajectoryTally> tallies(n);
  parallel_for(n, workers, [&](std::size_t i) {
    const Controller controller = make_controller(cfg, i);
    FeedbackObserver observer(cfg, k_steps, trace_stride);
    simulate(sim, QubitState::superposition(), i, &controller, observer);
    tallies[i] = observer.take();
  });

  FeedbackResult out;
  out.n_trajectories = n;
  out.effective_collection_time = sim.effective_sampling_interval();
  const double measured = static_cast<double>(cfg.n_cycles);

  std::vector<double> per_traj_x(n), per_traj_after(n), per_traj_z(n), drift(n);
  std::size_t corrections = 0;
  const std::size_t half = cfg.n_cycles / 2;
  for (std::size_t i = 0; i < n; ++i) {
    const TrajectoryTally& t = tallies[i];
    double sum = 0.0, first = 0.0, second = 0.0;
    for (std::size_t c = cfg.burn_in_cycles; c < total_cycles; ++c) {
      sum += t.cycle_x[c];
      (c < cfg.burn_in_cycles + half ? first : second) += t.cycle_x[c];
    }
    per_traj_x[i] = sum / measured;
    per_traj_after[i] = t.after_sum / measured;
    per_traj_z[i] = t.z_sum / measured;
    drift[i] = first / static_cast<double>(half) - second / static_cast<double>(cfg.n_cycles - half);
    corrections += t.corrections;
  }
  std::tie(out.sigma_bar_x, out.stderr_sigma_bar_x) = mean_and_stderr(per_traj_x);
  std::tie(out.sigma_x_after_correction, out.stderr_after_correction) = mean_and_stderr(per_traj_after);
  std::tie(out.mean_sigma_z, out.stderr_sigma_z) = mean_and_stderr(per_traj_z);
  out.correction_rate = static_cast<double>(corrections) / (static_cast<double>(n) * measured);

  out.cycle_means.assign(total_cycles, 0.0);
  for (const auto& t : tallies) {
    for (std::size_t c = 0; c < total_cycles; ++c) out.cycle_means[c] += t.cycle_x[c];
  }
  for (double& m : out.cycle_means) m /= static_cast<double>(n);

  const auto [drift_mean, drift_se] = mean_and_stderr(drift);
  out.drift_sigma = drift_se > 0.0 ? drift_mean / drift_se : 0.0;
  out.steady_state = std::abs(out.drift_sigma) <= 3.0;

  if (trace_stride > 0) {
    const std::size_t points = tallies.front().trace.size();
    out.trace_sigma_x.assign(points, 0.0);
    for (const auto& t : tallies) {
      for (std::size_t p = 0; p < points; ++p) out.trace_sigma_x[p] += t.trace[p];
    }
    out.trace_times.resize(points);
    for (std::size_t p = 0; p < points; ++p) {
      out.trace_sigma_x[p] /= static_cast<double>(n);
      out.trace_times[p] = static_cast<double>(p * trace_stride) * sim.detector.dt;
    }
  }
  return out;
}

Trajectory feedback_trajectory(const FeedbackConfig& cfg, std::uint64_t stream_id) {
  cfg.validate();
  SimulationConfig sim = cfg.simulation();
  sim.full_grid = true;
  sim.output_noise = 0.0;  // the controller draws its own reading noise
  return run_trajectory(sim, QubitState::superposition(), stream_id, make_controller(cfg, stream_id));
}

std::vector<SweepPoint> sweep(const std::vector<double>& thresholds,
                              const std::vector<double>& collection_times,
                              const FeedbackConfig& prototype, unsigned workers) {
  if (thresholds.empty() || collection_times.empty()) throw ConfigError("empty sweep grid");
  std::vector<SweepPoint> points;
  points.reserve(thresholds.size() * collection_times.size());
  for (double tf : collection_times) {
    for (double i : thresholds) {
      FeedbackConfig cfg = prototype;
      cfg.threshold = i;
      cfg.collection_time = tf;
      SweepPoint p{i, tf, run_feedback(cfg, workers), {}};
      p.analytic = oracle::feedback_efficiency(i, p.result.effective_collection_time);
      points.push_back(std::move(p));
    }
  }
  return points;
}

OptimizationResult optimize(const Objective& objective, double threshold0, double time0,
                            const OptimizerOptions& opt) {
  const auto inside = [&](double i, double t) {
    return i >= opt.threshold_min && i <= opt.threshold_max && t >= opt.time_min && t <= opt.time_max;
  };
  if (!inside(threshold0, time0)) throw ConfigError("initial guess outside the search domain");
  if (!(opt.min_step > 0.0) || !(opt.initial_step_threshold > 0.0) || !(opt.initial_step_time > 0.0)) {
    throw ConfigError("optimizer steps must be positive");
  }

  OptimizationResult res;
  std::map<std::pair<double, double>, double> cache;
  const auto eval = [&](double i, double t) {
    if (!inside(i, t)) return -std::numeric_limits<double>::infinity();
    const auto key = std::make_pair(i, t);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
    ++res.evaluations;
    const double v = objective(i, t);
    cache.emplace(key, v);
    return v;
  };

  double i = threshold0, t = time0;
  double value = eval(i, t);
  double step_i = opt.initial_step_threshold, step_t = opt.initial_step_time;
  while (!(step_i < opt.min_step && step_t < opt.min_step)) {
    if (res.iterations >= opt.max_iterations) break;
    ++res.iterations;
    const std::pair<double, double> probes[] = {
        {i + step_i, t}, {i - step_i, t}, {i, t + step_t}, {i, t - step_t}};
    double best = value;
    std::pair<double, double> best_at{i, t};
    for (const auto& [pi, pt] : probes) {
      const double v = eval(pi, pt);
      if (v > best) {
        best = v;
        best_at = {pi, pt};
      }
    }
    const bool moved = best > value;
    if (moved) {
      std::tie(i, t) = best_at;
      value = best;
    } else {
      step_i *= 0.5;
      step_t *= 0.5;
    }
    res.trace.push_back({res.iterations, i, t, value, step_i, step_t, moved});
  }
  res.threshold = i;
  res.collection_time = t;
  res.value = value;
  res.converged = step_i < opt.min_step && step_t < opt.min_step;
  return res;
}

Objective oracle_objective() {
  return [](double i, double t) { return oracle::feedback_efficiency(i, t).sigma_bar_x; };
}

Objective monte_carlo_objective(const FeedbackConfig& prototype, unsigned workers) {
  return [prototype, workers](double i, double t) {
    FeedbackConfig cfg = prototype;
    cfg.threshold = i;
    cfg.collection_time = t;
    return run_feedback(cfg, workers).sigma_bar_x;
  };
}

}  // namespace cwlm
