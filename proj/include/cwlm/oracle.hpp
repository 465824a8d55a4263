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

#include <complex>
#include <cstddef>
#include <vector>

#include "cwlm/qstate.hpp"

namespace cwlm::oracle {

/// Ensemble-averaged state under measurement alone, starting from the
/// equal-weight superposition: (e^{-2t}, 0, 0).
QubitState bloch_decay(double t);

/// Ensemble-averaged state under measurement plus H = omega Sy, starting
/// from (1, 0, 0). Solves x' = 2 omega z - 2x, z' = -2 omega x.
QubitState damped_precession(double t, double omega);

/// Density matrix augmented with a counting field chi (two-level, Sz basis).
/// At chi != 0 the matrix is not Hermitian, so both off-diagonals are kept.
struct AugmentedState {
  std::complex<double> pp;
  std::complex<double> mm;
  std::complex<double> pm;
  std::complex<double> mp;

  static AugmentedState from_state(const QubitState& s);
  std::complex<double> trace() const { return pp + mm; }
};

/// Closed-form solution of
///   d rho/dt = -chi^2/8 rho + i chi/2 (Sz rho + rho Sz) - (rho - Sz rho Sz).
AugmentedState evolve_augmented(const AugmentedState& initial, double chi, double duration);

/// Same equation integrated numerically with classical RK4 in 2x2 matrix form.
AugmentedState integrate_augmented(const AugmentedState& initial, double chi, double duration,
                                   std::size_t steps);

/// G(v) = sqrt(2T/pi) exp(-2 T v^2): reading noise of a window of length T.
double reading_kernel(double duration, double v);

/// Joint density of the readings of two consecutive windows of lengths t1, t2,
/// starting from the superposition.
double joint_output_density(double t1, double t2, double v1, double v2);

/// Limit t2 -> inf of the joint density conditioned on v2 = +1.
double conditional_output_density(double t1, double v1);

/// Chi grid for numerical Fourier inversion of the augmented trace.
struct FourierGrid {
  /// Width of the alias-free window in v.
  double v_span = 40.0;
  /// Envelope exp(-chi^2 T / 8) at the cutoff.
  double envelope_floor = 1e-12;
};

/// rho(v) = (T / 2 pi) Int dchi e^{-i chi v T} Tr rho(chi, T), trapezoid rule.
double fourier_output_density(const AugmentedState& initial, double duration, double v,
                              const FourierGrid& grid = {});

/// Two-window version: chi1 during t1, then chi2 during t2.
double fourier_joint_density(const AugmentedState& initial, double t1, double t2, double v1,
                             double v2, const FourierGrid& grid = {});

struct FeedbackEfficiency {
  double a = 0.0;
  double b = 0.0;
  double rho_x = 0.0;
  double sigma_bar_x = 0.0;
};

/// Steady state of the threshold feedback loop: rho_x = A / (1 - B) right after
/// correction and the cycle average rho_x (1 - e^{-2T_f}) / (2 T_f).
FeedbackEfficiency feedback_efficiency(double threshold, double collection_time);

struct EfficiencyLandscape {
  std::vector<double> thresholds;
  std::vector<double> collection_times;
  /// Row-major: cells[j * thresholds.size() + i] for (thresholds[i], collection_times[j]).
  std::vector<FeedbackEfficiency> cells;

  const FeedbackEfficiency& at(std::size_t i_threshold, std::size_t j_time) const {
    return cells[j_time * thresholds.size() + i_threshold];
  }
  /// Indices (i, j) of the largest sigma_bar_x.
  std::pair<std::size_t, std::size_t> argmax() const;
};

EfficiencyLandscape efficiency_landscape(const std::vector<double>& thresholds,
                                         const std::vector<double>& collection_times);

}  // namespace cwlm::oracle
