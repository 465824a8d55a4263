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

#include "cwlm/qstate.hpp"

#include <cmath>
#include <string>

#include "cwlm/error.hpp"

namespace cwlm {

Axis parse_axis(std::string_view name) {
  if (name == "x") return Axis::x;
  if (name == "y") return Axis::y;
  if (name == "z") return Axis::z;
  throw ConfigError("unknown axis '" + std::string(name) + "' (expected x, y or z)");
}

std::string_view axis_name(Axis axis) {
  switch (axis) {
    case Axis::x:
      return "x";
    case Axis::y:
      return "y";
    case Axis::z:
      return "z";
  }
  return "?";
}

QubitState QubitState::from_bloch(double x, double y, double z) {
  QubitState s{x, y, z};
  if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z) || !s.valid()) {
    throw ConfigError("Bloch vector outside the unit ball");
  }
  return s;
}

double QubitState::norm() const { return std::sqrt(norm_squared()); }

double QubitState::component(Axis axis) const {
  switch (axis) {
    case Axis::x:
      return x;
    case Axis::y:
      return y;
    case Axis::z:
      return z;
  }
  return 0.0;
}

namespace {

// Right-handed rotation of the Bloch vector by phi about the axis.
QubitState rotate_bloch(const QubitState& s, Axis axis, double phi) {
  const double c = std::cos(phi);
  const double sn = std::sin(phi);
  switch (axis) {
    case Axis::x:
      return {s.x, s.y * c - s.z * sn, s.y * sn + s.z * c};
    case Axis::y:
      return {s.x * c + s.z * sn, s.y, s.z * c - s.x * sn};
    case Axis::z:
      return {s.x * c - s.y * sn, s.x * sn + s.y * c, s.z};
  }
  return s;
}

}  // namespace

QubitState apply_rotation(const QubitState& state, const Rotation& rotation) {
  if (rotation.angle == 0.0) return state;
  return rotate_bloch(state, rotation.axis, 2.0 * rotation.angle);
}

QubitState evolve_hamiltonian(const QubitState& state, Axis axis, double omega, double dt) {
  if (omega == 0.0 || dt == 0.0) return state;
  return rotate_bloch(state, axis, 2.0 * omega * dt);
}

}  // namespace cwlm
