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

#include "cwlm/detector.hpp"

#include <cmath>
#include <limits>

#include "cwlm/error.hpp"

namespace cwlm {

void DetectorParams::validate() const {
  if (!(theta > 0.0) || theta > kMaxTheta) {
    throw ConfigError("measurement strength theta must lie in (0, 0.1]");
  }
  if (!(dt > 0.0) || std::abs(dt / (theta * theta) - 1.0) > 1e-9) {
    throw ConfigError("step dt must equal theta^2 in T_c units");
  }
}

std::optional<std::string> DetectorParams::linearity_warning() const {
  if (theta > kWarnTheta) {
    return "theta > 0.05: single steps are no longer weak, results deviate from linear measurement";
  }
  return std::nullopt;
}

double reading_probability(const QubitState& state, const DetectorParams& params, int reading) {
  return 0.5 * (1.0 + reading * state.z * params.deflection());
}

StepOutcome measure_step(const QubitState& state, const DetectorParams& params, double u) {
  params.validate();
  return detail::measure(state, params.deflection(), params.coherence_factor(), u);
}

QubitState conditional_update(const QubitState& state, const DetectorParams& params, int reading) {
  params.validate();
  if (reading != 1 && reading != -1) throw ConfigError("reading must be +1 or -1");
  const double sin2 = params.deflection();
  const double denom = 1.0 + reading * state.z * sin2;
  if (denom <= 0.0) throw ConfigError("reading has zero probability for this state");
  const double shrink = params.coherence_factor() / denom;
  return {state.x * shrink, state.y * shrink, (state.z + reading * sin2) / denom};
}

double mean_deflection(const DetectorParams& params, const QubitState& state) {
  return params.deflection() * state.z;
}

bool Ideality::ideal() const {
  return std::abs(product() - bound()) <= 4.0 * std::numeric_limits<double>::epsilon() * bound();
}

Ideality ideality_check(const DetectorParams& params, double extra_output_power) {
  params.validate();
  if (!(extra_output_power >= 0.0)) throw ConfigError("extra output noise power must be >= 0");
  const double m = params.coupling();
  const double a = 2.0 * m * params.dt;
  // Noise of power p on v = V/a is p a^2 on the raw output V.
  return {params.dt + extra_output_power * a * a, m * m * params.dt, a};
}

}  // namespace cwlm
