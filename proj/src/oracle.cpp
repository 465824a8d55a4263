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

#include "cwlm/oracle.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numbers>

#include "cwlm/error.hpp"

namespace cwlm::oracle {

using cplx = std::complex<double>;

QubitState bloch_decay(double t) {
  if (!(t >= 0.0)) throw ConfigError("time must be non-negative");
  return {std::exp(-2.0 * t), 0.0, 0.0};
}

QubitState damped_precession(double t, double omega) {
  if (!(t >= 0.0)) throw ConfigError("time must be non-negative");
  // Characteristic roots -1 +- i W with W = sqrt(4 omega^2 - 1) (imaginary
  // when overdamped); sin(W t)/W and cos(W t) stay real either way.
  const cplx w = std::sqrt(cplx(4.0 * omega * omega - 1.0, 0.0));
  const double decay = std::exp(-t);
  const cplx sinc = std::abs(w) < 1e-8 ? cplx(t, 0.0) : std::sin(w * t) / w;
  const double cosine = std::cos(w * t).real();
  return {decay * (cosine - sinc.real()), 0.0, -2.0 * omega * decay * sinc.real()};
}

AugmentedState AugmentedState::from_state(const QubitState& s) {
  return {cplx(0.5 * (1.0 + s.z), 0.0), cplx(0.5 * (1.0 - s.z), 0.0), cplx(0.5 * s.x, -0.5 * s.y),
          cplx(0.5 * s.x, 0.5 * s.y)};
}

AugmentedState evolve_augmented(const AugmentedState& initial, double chi, double duration) {
  if (!(duration >= 0.0)) throw ConfigError("duration must be non-negative");
  const double gauss = -chi * chi / 8.0;
  const cplx up = std::exp(cplx(gauss, chi) * duration);
  const cplx down = std::exp(cplx(gauss, -chi) * duration);
  const double off = std::exp((gauss - 2.0) * duration);
  return {initial.pp * up, initial.mm * down, initial.pm * off, initial.mp * off};
}

AugmentedState integrate_augmented(const AugmentedState& initial, double chi, double duration,
                                   std::size_t steps) {
  if (!(duration >= 0.0)) throw ConfigError("duration must be non-negative");
  if (steps == 0) throw ConfigError("need at least one integration step");
  using Mat = Eigen::Matrix2cd;
  Mat sz;
  sz << 1.0, 0.0, 0.0, -1.0;
  const cplx i_chi_half(0.0, 0.5 * chi);
  const auto rhs = [&](const Mat& r) -> Mat {
    return -(chi * chi / 8.0) * r + i_chi_half * (sz * r + r * sz) - (r - sz * r * sz);
  };
  Mat rho;
  rho << initial.pp, initial.pm, initial.mp, initial.mm;
  const double h = duration / static_cast<double>(steps);
  for (std::size_t k = 0; k < steps; ++k) {
    const Mat k1 = rhs(rho);
    const Mat k2 = rhs(rho + 0.5 * h * k1);
    const Mat k3 = rhs(rho + 0.5 * h * k2);
    const Mat k4 = rhs(rho + h * k3);
    rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return {rho(0, 0), rho(1, 1), rho(0, 1), rho(1, 0)};
}

double reading_kernel(double duration, double v) {
  return std::sqrt(2.0 * duration / std::numbers::pi) * std::exp(-2.0 * duration * v * v);
}

double joint_output_density(double t1, double t2, double v1, double v2) {
  if (!(t1 > 0.0 && t2 > 0.0)) throw ConfigError("window durations must be positive");
  const double pref = std::sqrt(t1 * t2) / std::numbers::pi;
  const auto branch = [&](double level) {
    return std::exp(-2.0 * (v1 - level) * (v1 - level) * t1 - 2.0 * (v2 - level) * (v2 - level) * t2);
  };
  return pref * (branch(1.0) + branch(-1.0));
}

double conditional_output_density(double t1, double v1) {
  if (!(t1 > 0.0)) throw ConfigError("window duration must be positive");
  return std::sqrt(2.0 * t1 / std::numbers::pi) * std::exp(-2.0 * (v1 - 1.0) * (v1 - 1.0) * t1);
}

namespace {

struct ChiAxis {
  double step = 0.0;
  long half_count = 0;
};

ChiAxis make_axis(double duration, const FourierGrid& grid) {
  if (!(duration > 0.0)) throw ConfigError("window duration must be positive");
  if (!(grid.v_span > 0.0) || !(grid.envelope_floor > 0.0 && grid.envelope_floor < 1.0)) {
    throw ConfigError("invalid Fourier grid");
  }
  const double cutoff = std::sqrt(-8.0 * std::log(grid.envelope_floor) / duration);
  const double step = 2.0 * std::numbers::pi / (duration * grid.v_span);
  return {step, static_cast<long>(std::ceil(cutoff / step))};
}

}  // namespace

double fourier_output_density(const AugmentedState& initial, double duration, double v,
                              const FourierGrid& grid) {
  const ChiAxis ax = make_axis(duration, grid);
  cplx sum = 0.0;
  for (long k = -ax.half_count; k <= ax.half_count; ++k) {
    const double chi = ax.step * static_cast<double>(k);
    const cplx tr = evolve_augmented(initial, chi, duration).trace();
    sum += std::exp(cplx(0.0, -chi * v * duration)) * tr;
  }
  return (duration / (2.0 * std::numbers::pi) * ax.step * sum).real();
}

double fourier_joint_density(const AugmentedState& initial, double t1, double t2, double v1,
                             double v2, const FourierGrid& grid) {
  const ChiAxis ax1 = make_axis(t1, grid);
  const ChiAxis ax2 = make_axis(t2, grid);
  cplx sum = 0.0;
  for (long k1 = -ax1.half_count; k1 <= ax1.half_count; ++k1) {
    const double chi1 = ax1.step * static_cast<double>(k1);
    const AugmentedState mid = evolve_augmented(initial, chi1, t1);
    const cplx phase1 = std::exp(cplx(0.0, -chi1 * v1 * t1));
    for (long k2 = -ax2.half_count; k2 <= ax2.half_count; ++k2) {
      const double chi2 = ax2.step * static_cast<double>(k2);
      const cplx tr = evolve_augmented(mid, chi2, t2).trace();
      sum += phase1 * std::exp(cplx(0.0, -chi2 * v2 * t2)) * tr;
    }
  }
  const double norm = (t1 / (2.0 * std::numbers::pi) * ax1.step) * (t2 / (2.0 * std::numbers::pi) * ax2.step);
  return (norm * sum).real();
}

FeedbackEfficiency feedback_efficiency(double threshold, double collection_time) {
  if (!(threshold >= 0.0)) throw ConfigError("reaction threshold must be >= 0");
  if (!(collection_time > 0.0)) throw ConfigError("collection time must be positive");
  const double root = std::sqrt(2.0 * collection_time);
  FeedbackEfficiency e;
  e.a = 0.5 * (std::erf((threshold + 1.0) * root) - std::erf((threshold - 1.0) * root));
  e.b = std::exp(-2.0 * collection_time) * std::erf(threshold * root);
  if (!(e.b < 1.0)) throw std::logic_error("feedback self-consistency: B >= 1");
  e.rho_x = e.a / (1.0 - e.b);
  // (1 - e^{-2T})/(2T) via expm1 so small T_f keeps full precision.
  e.sigma_bar_x = e.rho_x * (-std::expm1(-2.0 * collection_time)) / (2.0 * collection_time);
  return e;
}

std::pair<std::size_t, std::size_t> EfficiencyLandscape::argmax() const {
  std::size_t best = 0;
  for (std::size_t k = 1; k < cells.size(); ++k) {
    if (cells[k].sigma_bar_x > cells[best].sigma_bar_x) best = k;
  }
  return {best % thresholds.size(), best / thresholds.size()};
}

EfficiencyLandscape efficiency_landscape(const std::vector<double>& thresholds,
                                         const std::vector<double>& collection_times) {
  if (thresholds.empty() || collection_times.empty()) throw ConfigError("empty landscape grid");
  EfficiencyLandscape out{thresholds, collection_times, {}};
  out.cells.reserve(thresholds.size() * collection_times.size());
  for (double tf : collection_times) {
    for (double i : thresholds) out.cells.push_back(feedback_efficiency(i, tf));
  }
  return out;
}

}  // namespace cwlm::oracle
