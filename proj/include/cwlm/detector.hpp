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

#include <cmath>
#include <optional>
#include <string>

#include "cwlm/qstate.hpp"
#include "cwlm/random.hpp"

namespace cwlm {

/// Detector qubit coupled through H_c = M Sz (x) sy for one step of length dt.
/// theta = M dt is the per-step measurement strength. All public times are in
/// units of T_c = (M^2 dt)^-1, which forces dt = theta^2.
struct DetectorParams {
  static constexpr double kMaxTheta = 0.1;
  static constexpr double kWarnTheta = 0.05;

  double theta = 0.03;
  double dt = 0.03 * 0.03;

  static DetectorParams from_theta(double theta) { return {theta, theta * theta}; }

  /// Throws ConfigError on theta outside (0, 0.1] or dt inconsistent with T_c = 1.
  void validate() const;
  /// Non-empty when theta is large enough for nonlinearity to show.
  std::optional<std::string> linearity_warning() const;

  double coupling() const { return theta / dt; }
  /// Exact single-step mean reading of an Sz eigenstate, sin(2 theta).
  double deflection() const { return std::sin(2.0 * theta); }
  /// Per-step coherence factor cos(2 theta).
  double coherence_factor() const { return std::cos(2.0 * theta); }
};

struct StepOutcome {
  int reading = 1;
  QubitState post_state;
  double probability = 0.0;
};

namespace detail {

// Measurement update with precomputed sin/cos(2 theta); `u` is uniform in [0, 1).
inline StepOutcome measure(const QubitState& s, double sin2, double cos2, double u) {
  const double p_plus = 0.5 * (1.0 + s.z * sin2);
  const int r = u < p_plus ? 1 : -1;
  const double denom = 1.0 + r * s.z * sin2;
  const double shrink = cos2 / denom;
  return {r, {s.x * shrink, s.y * shrink, (s.z + r * sin2) / denom}, 0.5 * denom};
}

}  // namespace detail

/// Probability of reading +1, (1 + z sin 2theta)/2.
double reading_probability(const QubitState& state, const DetectorParams& params, int reading);

/// One elementary step given an explicit uniform draw u in [0, 1).
StepOutcome measure_step(const QubitState& state, const DetectorParams& params, double u);

inline StepOutcome measure_step(const QubitState& state, const DetectorParams& params,
                                RandomStream& rng) {
  return measure_step(state, params, rng.uniform());
}

/// Post-measurement state for a given reading, independent of sampling.
QubitState conditional_update(const QubitState& state, const DetectorParams& params, int reading);

/// sin(2 theta) z: the exact mean of one raw reading.
double mean_deflection(const DetectorParams& params, const QubitState& state);

/// Noise budget of the detector in the S_out S_in >= a^2/4 sense.
struct Ideality {
  double s_out = 0.0;
  double s_in = 0.0;
  double a = 0.0;

  double product() const { return s_out * s_in; }
  double bound() const { return 0.25 * a * a; }
  /// Equality up to floating-point rounding of the defining expressions.
  bool ideal() const;
};

/// `extra_output_power` is white noise added to the normalized reading v
/// (power in v units); zero reproduces the bare detector.
Ideality ideality_check(const DetectorParams& params, double extra_output_power = 0.0);

}  // namespace cwlm
