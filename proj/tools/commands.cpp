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

#include "commands.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "cwlm/error.hpp"
#include "cwlm/feedback.hpp"
#include "cwlm/io.hpp"
#include "cwlm/oracle.hpp"
#include "cwlm/stats.hpp"
#include "cwlm/trajectory.hpp"
#include "cwlm/version.hpp"

namespace cwlm::cli {

namespace {

json simulation_defaults(std::uint64_t n) {
  return {{"detector.theta", 0.03},     {"seed", std::uint64_t{1}},
          {"n", n},                     {"time.total", 5.0},
          {"time.sampling", 0.1},       {"hamiltonian.y", 0.0},
          {"noise.output", 0.0},        {"initial.state", "superposition"},
          {"output.full_grid", false},  {"output.binary", false}};
}

QubitState initial_state(const std::string& name) {
  if (name == "superposition") return QubitState::superposition();
  if (name == "up") return QubitState::up();
  if (name == "down") return QubitState::down();
  if (name == "mixed") return QubitState::mixed();
  throw ConfigError("initial.state must be superposition, up, down or mixed, got '" + name + "'");
}

DetectorParams detector(const Settings& s) {
  const auto p = DetectorParams::from_theta(s.number("detector.theta"));
  p.validate();
  return p;
}

void note_linearity(const DetectorParams& p, RunOutput& out) {
  if (auto w = p.linearity_warning()) out.warnings.push_back(*w);
}

SimulationConfig simulation(const Settings& s) {
  SimulationConfig cfg;
  cfg.detector = detector(s);
  cfg.total_time = s.number("time.total");
  cfg.sampling_interval = s.number("time.sampling");
  if (const double w = s.number("hamiltonian.y"); w != 0.0) cfg.hamiltonian = HamiltonianTerm{Axis::y, w};
  cfg.output_noise = s.number("noise.output");
  cfg.seed = s.count("seed");
  cfg.n_trajectories = s.count("n");
  cfg.full_grid = s.flag("output.full_grid");
  cfg.validate();
  return cfg;
}

json derived(const SimulationConfig& cfg) {
  return {{"dt", cfg.detector.dt},
          {"steps_per_window", cfg.steps_per_window()},
          {"window_count", cfg.window_count()},
          {"effective_sampling_interval", cfg.effective_sampling_interval()},
          {"effective_total_time", cfg.effective_total_time()}};
}

std::string h_tag(double h) { return fmt::format("{:.0e}", h); }

}  // namespace

// ---------------------------------------------------------------------------

json trajectory_defaults() { return simulation_defaults(1); }

json conditioned_defaults() {
  json d = simulation_defaults(100);
  d["conditioned.settle"] = 0.999;
  d["output.trajectories"] = false;
  return d;
}

json decision_defaults() {
  return {{"detector.theta", 0.03}, {"seed", std::uint64_t{1}}, {"n", std::uint64_t{1000}},
          {"decision.h", "1e-3"},   {"decision.max_time", 30.0}, {"decision.settle", 1e-12},
          {"decision.bins", std::uint64_t{0}}, {"decision.min_count", std::uint64_t{20}}};
}

json feedback_defaults() {
  return {{"detector.theta", 0.03},
          {"seed", std::uint64_t{1}},
          {"n", std::uint64_t{500}},
          {"noise.output", 0.0},
          {"feedback.mode", "single"},
          {"feedback.I", 0.9},
          {"feedback.Tf", 0.2},
          {"feedback.cycles", std::uint64_t{100}},
          {"feedback.burn_in", std::uint64_t{10}},
          {"feedback.rotation", std::numbers::pi / 4.0},
          {"feedback.I_grid", "0:0.25:2"},
          {"feedback.Tf_grid", "0.1,0.15,0.2,0.25,0.3,0.5,1"},
          {"feedback.oracle", false},
          {"optimizer.step_I", 0.2},
          {"optimizer.step_Tf", 0.05},
          {"optimizer.min_step", 0.02}};
}

json oracle_defaults() {
  return {{"oracle.kind", "decay"},    {"oracle.t_max", 5.0},   {"oracle.points", std::uint64_t{101}},
          {"oracle.omega", 0.0},       {"oracle.t1", 0.25},     {"oracle.t2", 0.25},
          {"oracle.v_min", -3.0},      {"oracle.v_max", 3.0},   {"oracle.fourier", true},
          {"oracle.I_grid", "0:0.02:2"}, {"oracle.Tf_grid", "1/3,1/4,1/5,1/6,1/7,1/8"}};
}

// ---------------------------------------------------------------------------

RunOutput run_trajectory_command(const Settings& s, unsigned workers) {
  RunOutput out;
  const SimulationConfig cfg = simulation(s);
  const QubitState init = initial_state(s.text("initial.state"));
  note_linearity(cfg.detector, out);
  const auto ens = run_ensemble(cfg, init, workers);
  out.files.push_back({"trajectories.csv", io::trajectories_csv(ens)});
  if (s.flag("output.binary")) {
    const json meta = {{"simulation", io::to_json(cfg)}, {"seed", cfg.seed}, {"version", kVersion},
                       {"initial", io::to_json(init)}};
    out.files.push_back({"trajectories.bin", io::trajectory_binary(ens, meta)});
  }
  out.report["derived"] = derived(cfg);
  out.report["simulation"] = io::to_json(cfg);
  return out;
}

RunOutput run_conditioned_command(const Settings& s, unsigned workers) {
  RunOutput out;
  const SimulationConfig cfg = simulation(s);
  const QubitState init = initial_state(s.text("initial.state"));
  const double settle = s.number("conditioned.settle");
  if (!(settle > 0.0 && settle < 1.0)) throw ConfigError("conditioned.settle must lie in (0, 1)");
  note_linearity(cfg.detector, out);
  const auto ens = run_ensemble(cfg, init, workers);
  const ConditionedAverage avg = conditioned_averages(ens, settle, BucketPolicy::allow_empty);

  out.files.push_back({"conditioned_sigma_z.csv", io::conditioned_sigma_z_csv(avg)});
  out.files.push_back({"conditioned_v.csv", io::conditioned_v_csv(avg)});
  if (s.flag("output.trajectories")) out.files.push_back({"trajectories.csv", io::trajectories_csv(ens)});

  double ss = 0.0;
  std::size_t points = 0;
  for (std::size_t i = 0; i < avg.times.size(); ++i) {
    if (avg.times[i] > 3.0) break;
    const double d = avg.mean_sigma_z_c[i] - conditioned_sigma_z_reference(avg.times[i]);
    ss += d * d;
    ++points;
  }
  const bool insufficient = avg.n_plus < 2 || avg.n_minus < 2;
  if (insufficient) {
    out.warnings.push_back(fmt::format(
        "insufficient statistics: n_plus={}, n_minus={}; standard errors are undefined",
        avg.n_plus, avg.n_minus));
  }
  out.report = {{"n_plus", avg.n_plus},
                {"n_minus", avg.n_minus},
                {"n_excluded", avg.n_excluded},
                {"insufficient_statistics", insufficient},
                {"tanh_rms_t_le_3", points > 0 ? std::sqrt(ss / static_cast<double>(points)) : 0.0},
                {"derived", derived(cfg)},
                {"simulation", io::to_json(cfg)}};
  return out;
}

RunOutput run_decision_command(const Settings& s, unsigned workers) {
  RunOutput out;
  DecisionRunConfig cfg;
  cfg.detector = detector(s);
  cfg.thresholds = s.list("decision.h");
  cfg.seed = s.count("seed");
  cfg.n_trajectories = s.count("n");
  cfg.max_time = s.number("decision.max_time");
  cfg.settle_threshold = s.number("decision.settle");
  cfg.validate();
  const auto bins = static_cast<std::size_t>(s.count("decision.bins"));
  const auto min_count = static_cast<std::size_t>(s.count("decision.min_count"));
  note_linearity(cfg.detector, out);

  const DecisionRun run = sample_decisions(cfg, workers);
  if (run.n_unsettled > 0) {
    out.warnings.push_back(fmt::format("{} trajectories did not settle by max_time", run.n_unsettled));
  }

  io::CsvWriter summary{"h",        "n_decided",  "n_undecided", "n_wrong",     "error_rate",
                        "expected_error_rate", "error_rate_z", "a", "b", "c", "t_p",
                        "t_p_log_formula", "mean", "variance", "variance_estimate",
                        "model_variance"};
  json fits = json::array();
  for (const DecisionSet& set : run.sets) {
    const std::string tag = h_tag(set.h);
    const std::vector<double> times = set.times();
    json report = io::to_json(set);
    summary.cell(set.h).cell(set.samples.size()).cell(set.n_undecided).cell(set.n_wrong());
    summary.cell(set.error_rate()).cell(set.h / 2.0).cell(set.error_rate_z_score());
    try {
      const FitResult fit = fit_decision_density(times, bins, min_count);
      const DistributionMoments m = distribution_moments(times, &fit);
      report["fit"] = io::to_json(fit);
      report["moments"] = {{"mean", m.mean}, {"variance", m.variance}, {"mode", m.mode},
                           {"variance_estimate", *m.variance_estimate},
                           {"model_variance", *m.model_variance}};
      out.files.push_back({"decision_hist_h" + tag + ".csv", io::histogram_csv(fit.histogram, &fit)});
      summary.cell(fit.a).cell(fit.b).cell(fit.c).cell(fit.t_p).cell(-std::log(2.3 * set.h));
      summary.cell(m.mean).cell(m.variance).cell(*m.variance_estimate).cell(*m.model_variance);
    } catch (const StatisticsError& e) {
      report["fit"] = nullptr;
      report["fit_error"] = e.what();
      out.warnings.push_back(fmt::format("h={}: {}", set.h, e.what()));
      const std::string hist =
          times.empty() ? io::CsvWriter{"bin_lo", "bin_hi", "t_center", "count", "density", "fit_density"}.str()
                        : io::histogram_csv(make_histogram(times, bins));
      out.files.push_back({"decision_hist_h" + tag + ".csv", hist});
      summary.empty().empty().empty().empty().cell(-std::log(2.3 * set.h));
      if (times.empty()) {
        summary.empty().empty().empty().empty();
      } else {
        const DistributionMoments m = distribution_moments(times);
        summary.cell(m.mean).cell(m.variance).empty().empty();
      }
    }
    summary.end_row();
    out.files.push_back({"decision_fit_h" + tag + ".json", report.dump(2) + "\n"});
    fits.push_back(report);
  }
  out.files.push_back({"decision_summary.csv", summary.str()});
  out.report = {{"n_unsettled", run.n_unsettled}, {"sets", fits}, {"decision", io::to_json(cfg)}};
  return out;
}

namespace {

FeedbackConfig feedback_config(const Settings& s) {
  FeedbackConfig cfg;
  cfg.base.detector = detector(s);
  cfg.base.seed = s.count("seed");
  cfg.base.n_trajectories = s.count("n");
  cfg.base.output_noise = s.number("noise.output");
  cfg.threshold = s.number("feedback.I");
  cfg.collection_time = s.number("feedback.Tf");
  cfg.n_cycles = s.count("feedback.cycles");
  cfg.burn_in_cycles = s.count("feedback.burn_in");
  cfg.rotation_magnitude = s.number("feedback.rotation");
  cfg.validate();
  return cfg;
}

}  // namespace

RunOutput run_feedback_command(const Settings& s, unsigned workers) {
  RunOutput out;
  const std::string mode = s.text("feedback.mode");
  FeedbackConfig cfg = feedback_config(s);
  note_linearity(cfg.base.detector, out);

  if (mode == "single") {
    cfg.record_trace = true;
    const FeedbackResult r = run_feedback(cfg, workers);
    const auto e = oracle::feedback_efficiency(cfg.threshold, r.effective_collection_time);
    json result = io::to_json(r);
    result["analytic"] = {{"A", e.a}, {"B", e.b}, {"rho_x", e.rho_x}, {"sigma_bar_x", e.sigma_bar_x}};
    if (!r.steady_state) out.warnings.push_back("measured cycles drift: steady state not reached");
    out.files.push_back({"feedback_result.json", result.dump(2) + "\n"});
    out.files.push_back({"feedback_cycles.csv", io::cycle_means_csv(r, r.effective_collection_time)});
    out.files.push_back({"feedback_trace.csv", io::trace_csv(r)});
    const Trajectory one = feedback_trajectory(cfg, 0);
    out.files.push_back({"feedback_trajectory.csv", io::trajectories_csv(std::span(&one, 1))});
    out.report = result;
  } else if (mode == "sweep") {
    const auto is = s.list("feedback.I_grid");
    const auto tfs = s.list("feedback.Tf_grid");
    for (double tf : tfs) {
      FeedbackConfig probe = cfg;
      probe.collection_time = tf;
      probe.validate();
    }
    for (double i : is) {
      if (!(i >= 0.0)) throw ConfigError("thresholds in feedback.I_grid must be >= 0");
    }
    const auto pts = sweep(is, tfs, cfg, workers);
    out.files.push_back({"feedback_sweep.csv", io::sweep_csv(pts)});
    out.files.push_back({"feedback_landscape.csv", io::landscape_csv(oracle::efficiency_landscape(is, tfs))});
    std::size_t best = 0;
    for (std::size_t k = 1; k < pts.size(); ++k) {
      if (pts[k].result.sigma_bar_x > pts[best].result.sigma_bar_x) best = k;
    }
    out.report = {{"argmax_I", pts[best].threshold},
                  {"argmax_T_f", pts[best].collection_time},
                  {"max_sigma_bar_x", pts[best].result.sigma_bar_x}};
  } else if (mode == "optimize") {
    OptimizerOptions opt;
    opt.initial_step_threshold = s.number("optimizer.step_I");
    opt.initial_step_time = s.number("optimizer.step_Tf");
    opt.min_step = s.number("optimizer.min_step");
    opt.time_min = std::max(opt.time_min, 10.0 * cfg.base.detector.dt);
    const bool analytic = s.flag("feedback.oracle");
    const Objective objective = analytic ? oracle_objective() : monte_carlo_objective(cfg, workers);
    const OptimizationResult r = optimize(objective, cfg.threshold, cfg.collection_time, opt);
    json j = io::to_json(r);
    j["objective"] = analytic ? "oracle" : "monte_carlo";
    if (!r.converged) out.warnings.push_back("optimizer hit the iteration limit");
    out.files.push_back({"feedback_optimizer.json", j.dump(2) + "\n"});
    out.report = {{"I", r.threshold}, {"T_f", r.collection_time}, {"sigma_bar_x", r.value},
                  {"converged", r.converged}};
  } else {
    throw ConfigError("feedback mode must be single, sweep or optimize, got '" + mode + "'");
  }
  out.report["feedback"] = io::to_json(cfg);
  return out;
}

RunOutput run_oracle_command(const Settings& s, unsigned) {
  RunOutput out;
  const std::string kind = s.text("oracle.kind");
  const auto points = static_cast<std::size_t>(s.count("oracle.points"));
  if (points < 2) throw ConfigError("oracle.points must be at least 2");
  const bool fourier = s.flag("oracle.fourier");
  const double v_min = s.number("oracle.v_min");
  const double v_max = s.number("oracle.v_max");
  const auto grid = [&](double lo, double hi, std::size_t k) {
    return lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(points - 1);
  };

  if (kind == "decay") {
    const double t_max = s.number("oracle.t_max");
    const double omega = s.number("oracle.omega");
    if (!(t_max > 0.0)) throw ConfigError("oracle.t_max must be positive");
    io::CsvWriter csv{"t", "sigma_x", "sigma_z"};
    for (std::size_t k = 0; k < points; ++k) {
      const double t = grid(0.0, t_max, k);
      const QubitState st = omega == 0.0 ? oracle::bloch_decay(t) : oracle::damped_precession(t, omega);
      csv.cell(t).cell(st.x).cell(st.z);
      csv.end_row();
    }
    out.files.push_back({"oracle_decay.csv", csv.str()});
  } else if (kind == "conditional") {
    const double t1 = s.number("oracle.t1");
    if (!(t1 > 0.0) || !(v_max > v_min)) throw ConfigError("invalid conditional-density range");
    const auto init = oracle::AugmentedState::from_state(QubitState::superposition());
    io::CsvWriter csv{"v", "conditional_density", "window_density", "fourier_window_density"};
    for (std::size_t k = 0; k < points; ++k) {
      const double v = grid(v_min, v_max, k);
      csv.cell(v).cell(oracle::conditional_output_density(t1, v));
      csv.cell(0.5 * (oracle::reading_kernel(t1, v - 1.0) + oracle::reading_kernel(t1, v + 1.0)));
      if (fourier) {
        csv.cell(oracle::fourier_output_density(init, t1, v));
      } else {
        csv.empty();
      }
      csv.end_row();
    }
    out.files.push_back({"oracle_conditional.csv", csv.str()});
  } else if (kind == "joint") {
    const double t1 = s.number("oracle.t1");
    const double t2 = s.number("oracle.t2");
    if (!(t1 > 0.0 && t2 > 0.0) || !(v_max > v_min)) throw ConfigError("invalid joint-density range");
    const auto init = oracle::AugmentedState::from_state(QubitState::superposition());
    io::CsvWriter csv{"v1", "v2", "density", "fourier_density"};
    for (std::size_t a = 0; a < points; ++a) {
      for (std::size_t b = 0; b < points; ++b) {
        const double v1 = grid(v_min, v_max, a), v2 = grid(v_min, v_max, b);
        csv.cell(v1).cell(v2).cell(oracle::joint_output_density(t1, t2, v1, v2));
        if (fourier) {
          csv.cell(oracle::fourier_joint_density(init, t1, t2, v1, v2));
        } else {
          csv.empty();
        }
        csv.end_row();
      }
    }
    out.files.push_back({"oracle_joint.csv", csv.str()});
  } else if (kind == "landscape") {
    const auto is = s.list("oracle.I_grid");
    const auto tfs = s.list("oracle.Tf_grid");
    for (double i : is) {
      if (!(i >= 0.0)) throw ConfigError("thresholds in oracle.I_grid must be >= 0");
    }
    for (double tf : tfs) {
      if (!(tf > 0.0)) throw ConfigError("collection times in oracle.Tf_grid must be positive");
    }
    const auto land = oracle::efficiency_landscape(is, tfs);
    out.files.push_back({"oracle_landscape.csv", io::landscape_csv(land)});
    const auto [bi, bj] = land.argmax();
    out.report = {{"argmax_I", is[bi]}, {"argmax_T_f", tfs[bj]},
                  {"max_sigma_bar_x", land.at(bi, bj).sigma_bar_x},
                  {"rho_x_at_max", land.at(bi, bj).rho_x}};
  } else {
    throw ConfigError("oracle kind must be decay, conditional, joint or landscape, got '" + kind + "'");
  }
  return out;
}

}  // namespace cwlm::cli
