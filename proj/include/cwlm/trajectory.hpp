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
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "cwlm/detector.hpp"
#include "cwlm/qstate.hpp"
#include "cwlm/random.hpp"

namespace cwlm {

struct HamiltonianTerm {
  Axis axis = Axis::y;
  double omega = 0.0;  // in units of 1/T_c
};

/// Everything needed to regenerate a set of trajectories bit for bit.
///
/// The sampling interval is rounded to K = round(interval / dt) detector steps
/// and the total time to a whole number of sampling windows, so every reading
/// averages exactly K raw outcomes.
struct SimulationConfig {
  DetectorParams detector = DetectorParams::from_theta(0.03);
  double total_time = 5.0;
  double sampling_interval = 0.1;
  std::optional<HamiltonianTerm> hamiltonian;
  /// White-noise power added to each normalized reading (0 = ideal detector).
  double output_noise = 0.0;
  std::uint64_t seed = 1;
  std::size_t n_trajectories = 1;
  /// Record every detector step instead of only the sampling grid.
  bool full_grid = false;

  void validate() const;

  std::size_t steps_per_window() const;
  std::size_t window_count() const;
  std::size_t total_steps() const { return steps_per_window() * window_count(); }
  double effective_sampling_interval() const;
  double effective_total_time() const;
};

struct Trajectory {
  std::uint64_t id = 0;
  double dt = 0.0;
  double sampling_interval = 0.0;
  /// Steps between stored samples: 1 on the full grid, K otherwise.
  std::size_t record_stride = 1;

  std::vector<double> times;
  std::vector<double> sigma_x;
  std::vector<double> sigma_y;
  std::vector<double> sigma_z;
  /// Raw +-1 detector outcomes; only kept on the full grid.
  std::vector<std::int8_t> raw_outcomes;

  /// Reading k averages the window [window_times[k], window_times[k] + T).
  std::vector<double> window_times;
  std::vector<double> sampled_v;

  int final_sign = 1;

  QubitState state_at(std::size_t i) const { return {sigma_x[i], sigma_y[i], sigma_z[i]}; }
  QubitState final_state() const { return state_at(sigma_z.size() - 1); }
};

/// What a feedback controller sees at the end of each sampling window.
struct WindowReading {
  std::size_t window = 0;
  double time = 0.0;  // end of the window
  double v = 0.0;     // normalized reading over the window
  QubitState state;
};

/// Returns a rotation to apply instantaneously, or nothing.
using Controller = std::function<std::optional<Rotation>(const WindowReading&)>;

namespace detail {

struct PrecomputedRotation {
  Axis axis = Axis::y;
  double c = 1.0;
  double s = 0.0;

  QubitState apply(const QubitState& st) const {
    switch (axis) {
      case Axis::x:
        return {st.x, st.y * c - st.z * s, st.y * s + st.z * c};
      case Axis::y:
        return {st.x * c + st.z * s, st.y, st.z * c - st.x * s};
      case Axis::z:
        return {st.x * c - st.y * s, st.x * s + st.y * c, st.z};
    }
    return st;
  }
};

}  // namespace detail

/// Core stepping loop. Each step applies the Hamiltonian sub-step (if any) and
/// then one detector measurement; at the end of every window the controller
/// may rotate the state. The observer receives
///   on_start(state)
///   on_step(step, state, reading)            step = 1..N
///   on_window(window, v, state, corrected)   state after any correction
/// Deterministic in (cfg.seed, stream_id).
template <class Observer>
QubitState simulate(const SimulationConfig& cfg, QubitState state, std::uint64_t stream_id,
                    const Controller* controller, Observer& observer) {
  RandomStream rng(cfg.seed, stream_id);
  const std::size_t k_steps = cfg.steps_per_window();
  const std::size_t windows = cfg.window_count();
  const double dt = cfg.detector.dt;
  const double sin2 = cfg.detector.deflection();
  const double cos2 = cfg.detector.coherence_factor();
  const double norm = 1.0 / (static_cast<double>(k_steps) * sin2);

  std::optional<detail::PrecomputedRotation> free_rotation;
  if (cfg.hamiltonian && cfg.hamiltonian->omega != 0.0) {
    const double phi = 2.0 * cfg.hamiltonian->omega * dt;
    free_rotation = detail::PrecomputedRotation{cfg.hamiltonian->axis, std::cos(phi), std::sin(phi)};
  }

  observer.on_start(state);
  std::size_t step = 0;
  for (std::size_t w = 0; w < windows; ++w) {
    long sum = 0;
    for (std::size_t k = 0; k < k_steps; ++k) {
      if (free_rotation) state = free_rotation->apply(state);
      const StepOutcome out = detail::measure(state, sin2, cos2, rng.uniform());
      state = out.post_state;
      sum += out.reading;
      observer.on_step(++step, state, out.reading);
    }
    const double v = static_cast<double>(sum) * norm;
    bool corrected = false;
    if (controller != nullptr && *controller) {
      const WindowReading reading{w, static_cast<double>(step) * dt, v, state};
      if (const auto rotation = (*controller)(reading)) {
        state = apply_rotation(state, *rotation);
        corrected = true;
      }
    }
    observer.on_window(w, v, state, corrected);
  }
  return state;
}

Trajectory run_trajectory(const SimulationConfig& cfg, const QubitState& initial,
                          std::uint64_t stream_id, const Controller& controller = {});

/// Trajectory i uses stream id i. Results are identical for any worker count.
std::vector<Trajectory> run_ensemble(const SimulationConfig& cfg, const QubitState& initial,
                                     unsigned workers = 0);

/// Adds independent N(0, extra_power / T) noise to every sampled reading.
Trajectory add_output_noise(const Trajectory& trajectory, double extra_power, RandomStream& rng);

/// Ensemble mean of one Bloch component at each stored grid point.
std::vector<double> ensemble_mean(std::span<const Trajectory> trajectories, Axis axis);

}  // namespace cwlm
