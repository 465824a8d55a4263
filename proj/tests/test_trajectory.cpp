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

#include <algorithm>
#include <cmath>
#include <vector>

#include "cwlm/error.hpp"
#include "cwlm/oracle.hpp"
#include "cwlm/trajectory.hpp"

using namespace cwlm;

namespace {

SimulationConfig small_config(std::size_t n, double total = 2.0, double sampling = 0.1) {
  SimulationConfig cfg;
  cfg.total_time = total;
  cfg.sampling_interval = sampling;
  cfg.n_trajectories = n;
  cfg.seed = 99;
  return cfg;
}

struct MeanSe {
  double mean;
  double se;
};

MeanSe column(const std::vector<Trajectory>& ens, std::size_t i, Axis axis) {
  double s = 0.0, s2 = 0.0;
  for (const auto& t : ens) {
    const double v = t.state_at(i).component(axis);
    s += v;
    s2 += v * v;
  }
  const double n = static_cast<double>(ens.size());
  const double m = s / n;
  return {m, std::sqrt(std::max(0.0, s2 / n - m * m) / (n - 1.0))};
}

// Kolmogorov-Smirnov distance between lattice-valued readings and N(mu, sd^2),
// with the normal CDF taken at the half-way points between lattice values.
double ks_normal(std::vector<double> xs, double mu, double sd, double spacing) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  const auto cdf = [&](double x) { return 0.5 * std::erfc(-(x - mu) / (sd * std::sqrt(2.0))); };
  double d = 0.0;
  std::size_t i = 0;
  while (i < xs.size()) {
    std::size_t j = i;
    while (j < xs.size() && xs[j] - xs[i] < 0.5 * spacing) ++j;
    d = std::max({d, std::abs(static_cast<double>(i) / n - cdf(xs[i] - 0.5 * spacing)),
                  std::abs(static_cast<double>(j) / n - cdf(xs[i] + 0.5 * spacing))});
    i = j;
  }
  return d;
}

}  // namespace

TEST_CASE("window length is rounded to whole detector steps") {
  SimulationConfig cfg = small_config(1, 5.0, 0.1);
  CHECK(cfg.steps_per_window() == 111);
  CHECK(cfg.effective_sampling_interval() == doctest::Approx(0.0999));
  CHECK(cfg.window_count() == 50);
  CHECK(cfg.total_steps() == 5550);
  const Trajectory t = run_trajectory(cfg, QubitState::superposition(), 0);
  CHECK(t.times.size() == 51);
  CHECK(t.sampled_v.size() == 50);
  CHECK(t.window_times[1] == doctest::Approx(0.0999));
  CHECK(t.record_stride == 111);
}

TEST_CASE("configuration errors are raised before stepping") {
  SimulationConfig cfg = small_config(1);
  cfg.sampling_interval = 5e-3;  // 5.6 steps
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = small_config(1, 0.15, 0.1);
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = small_config(0);
  CHECK_THROWS_AS(run_ensemble(cfg, QubitState::up()), ConfigError);
  cfg = small_config(1);
  CHECK_THROWS_AS(run_trajectory(cfg, QubitState{1.0, 1.0, 0.0}, 0), ConfigError);
  cfg.output_noise = -1.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("eigenstate stays frozen and reads +1 on average") {
  SimulationConfig cfg = small_config(1, 20.0, 0.1);
  const Trajectory t = run_trajectory(cfg, QubitState::up(), 3);
  for (double z : t.sigma_z) REQUIRE(z == 1.0);
  double mean = 0.0;
  for (double v : t.sampled_v) mean += v;
  mean /= static_cast<double>(t.sampled_v.size());
  const double se = std::sqrt(0.25 / cfg.effective_sampling_interval() / t.sampled_v.size());
  CHECK(std::abs(mean - 1.0) < 4.0 * se);
  CHECK(t.final_sign == 1);
}

TEST_CASE("frozen-state readings are normal with variance 1/(4T)") {
  // K = 200 steps per window, many windows.
  SimulationConfig cfg = small_config(1, 400.0, 0.18);
  const Trajectory t = run_trajectory(cfg, QubitState::down(), 1);
  const double window = cfg.effective_sampling_interval();
  REQUIRE(cfg.steps_per_window() == 200);
  double m = 0.0, m2 = 0.0;
  for (double v : t.sampled_v) {
    m += v;
    m2 += v * v;
  }
  const double n = static_cast<double>(t.sampled_v.size());
  m /= n;
  const double var = (m2 / n - m * m) * n / (n - 1.0);
  CHECK(std::abs(m + 1.0) < 4.0 * std::sqrt(0.25 / window / n));
  CHECK(std::abs(var * 4.0 * window - 1.0) < 0.05);
  // 1.63 / sqrt(n) is the 1% critical value of the KS distance.
  const double spacing = 2.0 / (200.0 * cfg.detector.deflection());
  CHECK(ks_normal(t.sampled_v, -1.0, std::sqrt(0.25 / window), spacing) < 1.63 / std::sqrt(n));
}

TEST_CASE("readings are the normalized sum of raw outcomes and replay the state") {
  SimulationConfig cfg = small_config(1, 1.0, 0.05);
  cfg.full_grid = true;
  cfg.hamiltonian = HamiltonianTerm{Axis::y, 0.7};
  const Trajectory t = run_trajectory(cfg, QubitState::superposition(), 4);
  const std::size_t k = cfg.steps_per_window();
  REQUIRE(t.raw_outcomes.size() == cfg.total_steps());
  for (std::size_t w = 0; w < t.sampled_v.size(); ++w) {
    long sum = 0;
    for (std::size_t i = 0; i < k; ++i) sum += t.raw_outcomes[w * k + i];
    CHECK(t.sampled_v[w] == static_cast<double>(sum) / (static_cast<double>(k) * cfg.detector.deflection()));
  }
  QubitState s = QubitState::superposition();
  for (std::size_t i = 0; i < t.raw_outcomes.size(); ++i) {
    s = evolve_hamiltonian(s, Axis::y, 0.7, cfg.detector.dt);
    s = conditional_update(s, cfg.detector, t.raw_outcomes[i]);
    REQUIRE(std::abs(s.z - t.sigma_z[i + 1]) < 1e-9);
    REQUIRE(std::abs(s.x - t.sigma_x[i + 1]) < 1e-9);
    REQUIRE(std::abs(t.sigma_z[i + 1]) <= 1.0);
  }
}

TEST_CASE("ensemble coherence follows e^-2t") {
  SimulationConfig cfg = small_config(2000, 2.0, 0.25);
  const auto ens = run_ensemble(cfg, QubitState::superposition());
  const auto& times = ens.front().times;
  for (std::size_t i = 1; i < times.size(); ++i) {
    const MeanSe x = column(ens, i, Axis::x);
    CHECK(std::abs(x.mean - oracle::bloch_decay(times[i]).x) < 4.0 * x.se);
    const MeanSe z = column(ens, i, Axis::z);
    CHECK(std::abs(z.mean) < 4.0 * z.se);
  }
  const auto mean_x = ensemble_mean(ens, Axis::x);
  CHECK(mean_x[0] == 1.0);
  CHECK(mean_x.size() == times.size());
}

TEST_CASE("driven ensemble follows the damped precession") {
  SimulationConfig cfg = small_config(2000, 3.0, 0.1);
  cfg.hamiltonian = HamiltonianTerm{Axis::y, 1.0};
  const auto ens = run_ensemble(cfg, QubitState::superposition());
  const auto& times = ens.front().times;
  for (std::size_t i = 1; i < times.size(); i += 3) {
    const QubitState ref = oracle::damped_precession(times[i], 1.0);
    const MeanSe x = column(ens, i, Axis::x);
    const MeanSe z = column(ens, i, Axis::z);
    // Splitting the step into a rotation and a measurement costs O(dt).
    CHECK(std::abs(x.mean - ref.x) < 4.0 * x.se + 2e-3);
    CHECK(std::abs(z.mean - ref.z) < 4.0 * z.se + 2e-3);
  }
}

TEST_CASE("parallel and serial ensembles are bit-identical") {
  SimulationConfig cfg = small_config(24, 1.0, 0.1);
  cfg.output_noise = 0.3;
  const auto serial = run_ensemble(cfg, QubitState::superposition(), 1);
  const auto parallel = run_ensemble(cfg, QubitState::superposition(), 4);
  REQUIRE(serial.size() == parallel.size());
  for (std::size_t i = 0; i < serial.size(); ++i) {
    CHECK(serial[i].sigma_x == parallel[i].sigma_x);
    CHECK(serial[i].sigma_z == parallel[i].sigma_z);
    CHECK(serial[i].sampled_v == parallel[i].sampled_v);
    CHECK(serial[i].final_sign == parallel[i].final_sign);
  }
  const Trajectory again = run_trajectory(cfg, QubitState::superposition(), 5);
  CHECK(again.sigma_z == serial[5].sigma_z);
  CHECK(again.sampled_v == serial[5].sampled_v);
  CHECK(serial[5].sigma_z != serial[6].sigma_z);
}

TEST_CASE("output noise adds variance p/T to the readings only") {
  SimulationConfig cfg = small_config(1, 200.0, 0.1);
  const Trajectory clean = run_trajectory(cfg, QubitState::up(), 0);
  RandomStream rng(5, 0, StreamDomain::output_noise);
  CHECK(add_output_noise(clean, 0.0, rng).sampled_v == clean.sampled_v);
  const double p = 0.4;
  const Trajectory noisy = add_output_noise(clean, p, rng);
  CHECK(noisy.sigma_z == clean.sigma_z);
  double s = 0.0, s2 = 0.0;
  const double n = static_cast<double>(clean.sampled_v.size());
  for (std::size_t i = 0; i < clean.sampled_v.size(); ++i) {
    const double d = noisy.sampled_v[i] - clean.sampled_v[i];
    s += d;
    s2 += d * d;
  }
  const double expected = p / clean.sampling_interval;
  CHECK(std::abs(s / n) < 4.0 * std::sqrt(expected / n));
  // Sample variance of 2000 normals: relative sd sqrt(2/n) ~ 3%.
  CHECK(std::abs(s2 / n / expected - 1.0) < 0.15);
  CHECK_THROWS_AS(add_output_noise(clean, -0.1, rng), ConfigError);
}

TEST_CASE("symmetric ensemble averages to zero reading at late times") {
  SimulationConfig cfg = small_config(1000, 4.0, 0.5);
  const auto ens = run_ensemble(cfg, QubitState::superposition());
  double s = 0.0, s2 = 0.0;
  for (const auto& t : ens) {
    s += t.sampled_v.back();
    s2 += t.sampled_v.back() * t.sampled_v.back();
  }
  const double n = static_cast<double>(ens.size());
  const double se = std::sqrt((s2 / n - (s / n) * (s / n)) / (n - 1));
  CHECK(std::abs(s / n) < 4.0 * se);
}
