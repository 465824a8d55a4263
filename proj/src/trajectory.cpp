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

#include "cwlm/trajectory.hpp"

#include <cmath>
#include <random>

#include "cwlm/error.hpp"
#include "cwlm/parallel.hpp"

namespace cwlm {

void SimulationConfig::validate() const {
  detector.validate();
  if (!(sampling_interval > 0.0) || steps_per_window() < 10) {
    throw ConfigError("sampling interval must span at least 10 detector steps");
  }
  if (!(total_time >= 2.0 * effective_sampling_interval()) || window_count() < 2) {
    throw ConfigError("total time must cover at least two sampling intervals");
  }
  if (n_trajectories < 1) throw ConfigError("need at least one trajectory");
  if (!(output_noise >= 0.0)) throw ConfigError("output noise power must be >= 0");
  if (hamiltonian && !std::isfinite(hamiltonian->omega)) {
    throw ConfigError("Hamiltonian strength must be finite");
  }
}

std::size_t SimulationConfig::steps_per_window() const {
  if (!(sampling_interval > 0.0) || !(detector.dt > 0.0)) return 0;
  return static_cast<std::size_t>(std::llround(sampling_interval / detector.dt));
}

double SimulationConfig::effective_sampling_interval() const {
  return static_cast<double>(steps_per_window()) * detector.dt;
}

std::size_t SimulationConfig::window_count() const {
  const double window = effective_sampling_interval();
  if (!(window > 0.0) || !(total_time > 0.0)) return 0;
  return static_cast<std::size_t>(std::llround(total_time / window));
}

double SimulationConfig::effective_total_time() const {
  return static_cast<double>(total_steps()) * detector.dt;
}

namespace {

class Recorder {
 public:
  Recorder(const SimulationConfig& cfg, std::uint64_t id) : dt_(cfg.detector.dt) {
    traj_.id = id;
    traj_.dt = dt_;
    traj_.sampling_interval = cfg.effective_sampling_interval();
    traj_.record_stride = cfg.full_grid ? 1 : cfg.steps_per_window();
    full_ = cfg.full_grid;
    const std::size_t points = cfg.total_steps() / traj_.record_stride + 1;
    traj_.times.reserve(points);
    traj_.sigma_x.reserve(points);
    traj_.sigma_y.reserve(points);
    traj_.sigma_z.reserve(points);
    if (full_) traj_.raw_outcomes.reserve(cfg.total_steps());
    traj_.window_times.reserve(cfg.window_count());
    traj_.sampled_v.reserve(cfg.window_count());
    window_start_ = 0.0;
  }

  void on_start(const QubitState& s) { record(0, s); }

  void on_step(std::size_t step, const QubitState& s, int reading) {
    if (full_) traj_.raw_outcomes.push_back(static_cast<std::int8_t>(reading));
    if (step % traj_.record_stride == 0) record(step, s);
    last_step_ = step;
  }

  void on_window(std::size_t, double v, const QubitState& s, bool corrected) {
    traj_.window_times.push_back(window_start_);
    traj_.sampled_v.push_back(v);
    window_start_ = static_cast<double>(last_step_) * dt_;
    if (corrected) {
      // The stored boundary sample is the state the next window starts from.
      traj_.sigma_x.back() = s.x;
      traj_.sigma_y.back() = s.y;
      traj_.sigma_z.back() = s.z;
    }
  }

  Trajectory finish() {
    traj_.final_sign = traj_.sigma_z.back() >= 0.0 ? 1 : -1;
    return std::move(traj_);
  }

 private:
  void record(std::size_t step, const QubitState& s) {
    traj_.times.push_back(static_cast<double>(step) * dt_);
    traj_.sigma_x.push_back(s.x);
    traj_.sigma_y.push_back(s.y);
    traj_.sigma_z.push_back(s.z);
  }

  Trajectory traj_;
  double dt_;
  bool full_ = false;
  std::size_t last_step_ = 0;
  double window_start_ = 0.0;
};

}  // namespace

Trajectory run_trajectory(const SimulationConfig& cfg, const QubitState& initial,
                          std::uint64_t stream_id, const Controller& controller) {
  cfg.validate();
  if (!initial.valid()) throw ConfigError("initial state outside the Bloch ball");
  Recorder recorder(cfg, stream_id);
  simulate(cfg, initial, stream_id, controller ? &controller : nullptr, recorder);
  Trajectory traj = recorder.finish();
  if (cfg.output_noise > 0.0) {
    RandomStream noise(cfg.seed, stream_id, StreamDomain::output_noise);
    traj = add_output_noise(traj, cfg.output_noise, noise);
  }
  return traj;
}

std::vector<Trajectory> run_ensemble(const SimulationConfig& cfg, const QubitState& initial,
                                     unsigned workers) {
  cfg.validate();
  if (!initial.valid()) throw ConfigError("initial state outside the Bloch ball");
  std::vector<Trajectory> out(cfg.n_trajectories);
  parallel_for(cfg.n_trajectories, workers,
               [&](std::size_t i) { out[i] = run_trajectory(cfg, initial, i); });
  return out;
}

Trajectory add_output_noise(const Trajectory& trajectory, double extra_power, RandomStream& rng) {
  if (!(extra_power >= 0.0)) throw ConfigError("extra output noise power must be >= 0");
  Trajectory noisy = trajectory;
  if (extra_power == 0.0) return noisy;
  if (!(trajectory.sampling_interval > 0.0)) throw ConfigError("trajectory has no sampling interval");
  std::normal_distribution<double> gauss(0.0, std::sqrt(extra_power / trajectory.sampling_interval));
  for (double& v : noisy.sampled_v) v += gauss(rng);
  return noisy;
}

std::vector<double> ensemble_mean(std::span<const Trajectory> trajectories, Axis axis) {
  if (trajectories.empty()) return {};
  const std::size_t points = trajectories.front().times.size();
  std::vector<double> mean(points, 0.0);
  for (const Trajectory& t : trajectories) {
    if (t.times.size() != points) throw ConfigError("trajectories do not share a time grid");
    const std::vector<double>& comp =
        axis == Axis::x ? t.sigma_x : (axis == Axis::y ? t.sigma_y : t.sigma_z);
    for (std::size_t i = 0; i < points; ++i) mean[i] += comp[i];
  }
  for (double& m : mean) m /= static_cast<double>(trajectories.size());
  return mean;
}

}  // namespace cwlm
