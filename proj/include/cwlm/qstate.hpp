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

#include <string_view>

namespace cwlm {

enum class Axis { x, y, z };

Axis parse_axis(std::string_view name);
std::string_view axis_name(Axis axis);

/// Two-level density matrix rho = (1 + x Sx + y Sy + z Sz) / 2 stored as its
/// Bloch vector. Trace one by construction; positivity means |r| <= 1.
struct QubitState {
  static constexpr double kTolerance = 1e-12;

  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  /// Throws ConfigError when the vector lies outside the Bloch ball.
  static QubitState from_bloch(double x, double y, double z);

  static constexpr QubitState up() { return {0.0, 0.0, 1.0}; }
  static constexpr QubitState down() { return {0.0, 0.0, -1.0}; }
  /// Equal-weight superposition (|+> + |->)/sqrt(2).
  static constexpr QubitState superposition() { return {1.0, 0.0, 0.0}; }
  static constexpr QubitState mixed() { return {0.0, 0.0, 0.0}; }

  double norm() const;
  double norm_squared() const { return x * x + y * y + z * z; }
  bool valid() const { return norm_squared() <= 1.0 + kTolerance; }
  /// Probability of the +1 eigenstate of Sz.
  double p_plus() const { return 0.5 * (1.0 + z); }

  double component(Axis axis) const;

  friend bool operator==(const QubitState&, const QubitState&) = default;
};

/// U(angle) = exp(-i angle S_axis). Rotates the Bloch vector by 2*angle
/// (right-handed) about the axis, so a y-rotation by +pi/4 maps z=+1 onto x=+1.
struct Rotation {
  double angle = 0.0;
  Axis axis = Axis::y;

  Rotation inverse() const { return {-angle, axis}; }
};

QubitState apply_rotation(const QubitState& state, const Rotation& rotation);

/// Free evolution exp(-i H dt) with H = omega * S_axis (time in T_c units).
QubitState evolve_hamiltonian(const QubitState& state, Axis axis, double omega, double dt);

}  // namespace cwlm
