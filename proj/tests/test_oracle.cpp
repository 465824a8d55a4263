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

#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <functional>
#include <complex>
#include <numbers>

#include "cwlm/error.hpp"
#include "cwlm/oracle.hpp"
#include "cwlm/stats.hpp"
#include "cwlm/trajectory.hpp"

using namespace cwlm;
using namespace cwlm::oracle;

namespace {

double quad(const std::function<double(double)>& f, double lo, double hi) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, lo, hi, 15, 1e-12);
}

double max_diff(const AugmentedState& a, const AugmentedState& b) {
  return std::max({std::abs(a.pp - b.pp), std::abs(a.mm - b.mm), std::abs(a.pm - b.pm),
                   std::abs(a.mp - b.mp)});
}

}  // namespace

TEST_CASE("Bloch decay") {
  CHECK(bloch_decay(0.0).x == 1.0);
  CHECK(bloch_decay(1.0).x == doctest::Approx(0.1353352832));
  CHECK(bloch_decay(0.5).x == doctest::Approx(std::exp(-1.0)));
  CHECK_THROWS_AS(bloch_decay(-1.0), ConfigError);
}

TEST_CASE("damped precession solves the driven Bloch equations") {
  for (double omega : {0.2, 0.5, 1.0, 3.0}) {
    // RK4 on x' = 2 w z - 2x, z' = -2 w x.
    double x = 1.0, z = 0.0;
    const double h = 1e-4;
    for (int k = 1; k <= 30000; ++k) {
      const auto fx = [&](double xx, double zz) { return 2 * omega * zz - 2 * xx; };
      const auto fz = [&](double xx, double) { return -2 * omega * xx; };
      const double k1x = fx(x, z), k1z = fz(x, z);
      const double k2x = fx(x + h / 2 * k1x, z + h / 2 * k1z), k2z = fz(x + h / 2 * k1x, z + h / 2 * k1z);
      const double k3x = fx(x + h / 2 * k2x, z + h / 2 * k2z), k3z = fz(x + h / 2 * k2x, z + h / 2 * k2z);
      const double k4x = fx(x + h * k3x, z + h * k3z), k4z = fz(x + h * k3x, z + h * k3z);
      x += h / 6 * (k1x + 2 * k2x + 2 * k3x + k4x);
      z += h / 6 * (k1z + 2 * k2z + 2 * k3z + k4z);
      if (k % 5000 == 0) {
        const QubitState ref = damped_precession(k * h, omega);
        CHECK(std::abs(ref.x - x) < 1e-10);
        CHECK(std::abs(ref.z - z) < 1e-10);
      }
    }
  }
  const QubitState s = damped_precession(1.0, 1.0);
  const double w = std::sqrt(3.0);
  CHECK(s.z == doctest::Approx(-2.0 / w * std::exp(-1.0) * std::sin(w)));
}

TEST_CASE("augmented evolution: closed form against RK4") {
  const AugmentedState init = AugmentedState::from_state(QubitState{0.6, -0.3, 0.5});
  double worst = 0.0;
  for (double chi = -20.0; chi <= 20.0; chi += 0.5) {
    for (double t : {0.0, 0.1, 0.5, 1.0, 2.5, 5.0}) {
      const auto steps = static_cast<std::size_t>(std::max(1.0, t / 2.5e-4));
      worst = std::max(worst, max_diff(evolve_augmented(init, chi, t), integrate_augmented(init, chi, t, steps)));
    }
  }
  CHECK(worst < 1e-8);

  AugmentedState up{1.0, 0.0, 0.0, 0.0};
  CHECK(std::abs(evolve_augmented(up, 1.0, 1.0).pp) == doctest::Approx(std::exp(-0.125)));
  const AugmentedState s = AugmentedState::from_state(QubitState{0.8, 0.0, 0.2});
  for (double t : {0.3, 1.0, 7.0}) {
    const AugmentedState e = evolve_augmented(s, 0.0, t);
    CHECK(std::abs(e.trace() - 1.0) < 1e-15);
    CHECK(e.pp == s.pp);
    CHECK(std::abs(e.pm - s.pm * std::exp(-2.0 * t)) < 1e-15);
  }
}

TEST_CASE("Fourier inversion reproduces the window densities") {
  const AugmentedState init = AugmentedState::from_state(QubitState::superposition());
  for (double t : {0.1, 0.25, 1.0}) {
    for (double v = -3.0; v <= 3.0; v += 0.25) {
      const double expect = 0.5 * (reading_kernel(t, v - 1.0) + reading_kernel(t, v + 1.0));
      CHECK(std::abs(fourier_output_density(init, t, v) - expect) < 1e-8);
    }
  }
  for (auto [t1, t2] : {std::pair{0.25, 0.25}, {0.1, 0.5}, {0.5, 1.0}}) {
    for (double v1 : {-1.5, -0.2, 0.4, 1.0}) {
      for (double v2 : {-1.0, 0.3, 1.2}) {
        CHECK(std::abs(fourier_joint_density(init, t1, t2, v1, v2) - joint_output_density(t1, t2, v1, v2)) < 1e-4);
      }
    }
  }
}

TEST_CASE("output densities are normalized and consistent") {
  for (double t : {0.1, 0.25, 1.0, 3.0}) {
    CHECK(quad([t](double v) { return reading_kernel(t, v); }, -30, 30) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(quad([t](double v) { return conditional_output_density(t, v); }, -30, 30) ==
          doctest::Approx(1.0).epsilon(1e-6));
    const double mean = quad([t](double v) { return v * conditional_output_density(t, v); }, -30, 30);
    CHECK(mean == doctest::Approx(1.0).epsilon(1e-9));
    const double var = quad([t](double v) { return (v - 1) * (v - 1) * conditional_output_density(t, v); }, -30, 30);
    CHECK(var == doctest::Approx(0.25 / t).epsilon(1e-9));
  }
  CHECK(conditional_output_density(1.0, 1.0) == doctest::Approx(std::sqrt(2.0 / std::numbers::pi)));

  const double t1 = 0.3, t2 = 0.7;
  const double total = quad([&](double v1) {
    return quad([&](double v2) { return joint_output_density(t1, t2, v1, v2); }, -15, 15);
  }, -15, 15);
  CHECK(total == doctest::Approx(1.0).epsilon(1e-6));
  for (double v1 : {-1.0, 0.0, 0.7}) {
    const double marginal = quad([&](double v2) { return joint_output_density(t1, t2, v1, v2); }, -15, 15);
    CHECK(marginal == doctest::Approx(0.5 * (reading_kernel(t1, v1 - 1) + reading_kernel(t1, v1 + 1))).epsilon(1e-9));
    CHECK(joint_output_density(t1, t2, v1, 0.4) == doctest::Approx(joint_output_density(t1, t2, -v1, -0.4)));
  }
  // Conditioning on a long second window recovers the conditional density.
  const double tl = 40.0;
  const double cond = joint_output_density(t1, tl, 0.5, 1.0) /
                      quad([&](double v) { return joint_output_density(t1, tl, v, 1.0); }, -15, 15);
  CHECK(cond == doctest::Approx(conditional_output_density(t1, 0.5)).epsilon(1e-9));
  CHECK_THROWS_AS(joint_output_density(0.0, 1.0, 0, 0), ConfigError);
}

TEST_CASE("conditioned first-window readings have variance 1/(4 t1)") {
  SimulationConfig cfg;
  cfg.total_time = 6.0;
  cfg.sampling_interval = 0.25;
  cfg.n_trajectories = 4000;
  cfg.seed = 31;
  const auto ens = run_ensemble(cfg, QubitState::superposition());
  double s = 0.0, s2 = 0.0;
  std::size_t n = 0;
  for (const auto& t : ens) {
    if (std::abs(t.sigma_z.back()) <= 0.999) continue;
    const double v = t.final_sign * t.sampled_v.front();
    s += v;
    s2 += v * v;
    ++n;
  }
  const double mean = s / static_cast<double>(n);
  const double var = s2 / static_cast<double>(n) - mean * mean;
  const double window = cfg.effective_sampling_interval();
  CHECK(std::abs(var * 4.0 * window - 1.0) < 0.05);
  CHECK(std::abs(mean - 1.0) < 4.0 * std::sqrt(var / static_cast<double>(n)));
}

TEST_CASE("feedback efficiency closed forms") {
  const FeedbackEfficiency opt = feedback_efficiency(0.88, 0.21);
  CHECK(opt.rho_x == doctest::Approx(0.810).epsilon(0.002 / 0.810));
  CHECK(opt.sigma_bar_x == doctest::Approx(0.661).epsilon(1e-3 / 0.661));

  for (double tf : {0.05, 0.2, 1.0, 4.0}) {
    const FeedbackEfficiency e = feedback_efficiency(0.0, tf);
    CHECK(e.b == 0.0);
    const double r = std::sqrt(2 * tf);
    CHECK(e.sigma_bar_x == doctest::Approx(std::erf(r) * (1 - std::exp(-2 * tf)) / (2 * tf)));
  }
  CHECK(feedback_efficiency(0.5, 200.0).sigma_bar_x < 3e-3);

  // Series in r = sqrt(2 T_f) to second order.
  const double tf = 1e-4, r = std::sqrt(2 * tf), sp = std::sqrt(std::numbers::pi);
  for (double i : {0.0, 0.5, 0.9}) {
    const double series = 2 * r / sp *
        (1 + 2 * i * r / sp + (4 * i * i / std::numbers::pi - (3 * i * i + 1) / 3 - 0.5) * r * r);
    CHECK(std::abs(feedback_efficiency(i, tf).sigma_bar_x / series - 1.0) < 1e-3);
  }
  CHECK_THROWS_AS(feedback_efficiency(-0.1, 1.0), ConfigError);
  CHECK_THROWS_AS(feedback_efficiency(0.5, 0.0), ConfigError);
}

TEST_CASE("efficiency landscape shape") {
  const std::vector<double> tfs{1.0 / 3, 1.0 / 4, 1.0 / 5, 1.0 / 6, 1.0 / 7, 1.0 / 8};
  std::vector<double> is;
  for (int k = 0; k <= 200; ++k) is.push_back(0.01 * k);
  const EfficiencyLandscape land = efficiency_landscape(is, tfs);
  const std::size_t i0 = 0, i2 = 200;
  for (std::size_t j = 1; j < tfs.size(); ++j) {
    // Shorter windows lose at I = 2 and win at I = 0.
    CHECK(land.at(i2, j).sigma_bar_x > land.at(i2, j - 1).sigma_bar_x);
    CHECK(land.at(i0, j).sigma_bar_x < land.at(i0, j - 1).sigma_bar_x);
  }
  double best = 0.0;
  for (std::size_t i = 0; i < is.size(); ++i) best = std::max(best, land.at(i, 1).sigma_bar_x);
  CHECK(best > land.at(i0, 1).sigma_bar_x + 0.05);
  for (const auto& c : land.cells) {
    CHECK(c.sigma_bar_x >= 0.0);
    CHECK(c.sigma_bar_x <= 1.0);
  }
  const auto [bi, bj] = land.argmax();
  for (const auto& c : land.cells) CHECK(c.sigma_bar_x <= land.at(bi, bj).sigma_bar_x);
  CHECK_THROWS_AS(efficiency_landscape({}, tfs), ConfigError);
}
