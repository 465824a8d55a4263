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

// Command-line front end: one subcommand per workflow, every run leaves a
// manifest that reproduces it.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "commands.hpp"
#include "cwlm/error.hpp"
#include "cwlm/io.hpp"
#include "cwlm/parallel.hpp"
#include "cwlm/version.hpp"

namespace {

using namespace cwlm;
using namespace cwlm::cli;

constexpr int kUsageError = 2;
constexpr int kStatisticsError = 3;

struct Invocation {
  std::string name;
  json (*defaults)() = nullptr;
  RunOutput (*run)(const Settings&, unsigned) = nullptr;
  std::vector<std::pair<std::string, std::string>> overrides;
  std::optional<std::string> positional;
  std::string positional_key;
};

struct Common {
  std::string config;
  std::string out;
  unsigned workers = 0;
};

CLI::App* add_command(CLI::App& app, Invocation& inv, Common& common, const std::string& help) {
  CLI::App* sub = app.add_subcommand(inv.name, help);
  sub->add_option("--config", common.config, "Config file (key = value lines) or a run manifest");
  sub->add_option("--out", common.out, "Output directory (default: $CWLM_OUTPUT_DIR or .)");
  sub->add_option("--workers", common.workers, "Concurrent trajectory workers (0 = all cores)");
  sub->add_option_function<std::vector<std::string>>(
      "--set",
      [&inv](const std::vector<std::string>& items) {
        for (const auto& item : items) {
          const auto eq = item.find('=');
          if (eq == std::string::npos) throw CLI::ValidationError("--set", "expected key=value");
          inv.overrides.emplace_back(item.substr(0, eq), item.substr(eq + 1));
        }
      },
      "Override any setting by its dotted key, e.g. --set time.total=10");
  return sub;
}

void bind(CLI::App* sub, Invocation& inv, const std::string& flag, const std::string& key,
          const std::string& help) {
  sub->add_option_function<std::string>(
      flag, [&inv, key](const std::string& v) { inv.overrides.emplace_back(key, v); },
      help + " [" + key + "]");
}

void bind_switch(CLI::App* sub, Invocation& inv, const std::string& flag, const std::string& key,
                 const std::string& value, const std::string& help) {
  sub->add_flag_callback(flag, [&inv, key, value] { inv.overrides.emplace_back(key, value); },
                         help + " [" + key + "]");
}

void bind_simulation(CLI::App* sub, Invocation& inv) {
  bind(sub, inv, "--n", "n", "Number of trajectories");
  bind(sub, inv, "--theta", "detector.theta", "Measurement strength per step");
  bind(sub, inv, "--T", "time.total", "Total time in T_c");
  bind(sub, inv, "--sampling", "time.sampling", "Sampling interval in T_c");
  bind(sub, inv, "--hamiltonian-y", "hamiltonian.y", "Strength of H = omega Sy (0 = none)");
  bind(sub, inv, "--seed", "seed", "Random seed");
  bind(sub, inv, "--noise", "noise.output", "Extra white-noise power on the readings");
  bind(sub, inv, "--initial", "initial.state", "superposition, up, down or mixed");
  bind_switch(sub, inv, "--full-grid", "output.full_grid", "true", "Store every detector step");
  bind_switch(sub, inv, "--binary", "output.binary", "true", "Also write the binary container");
}

std::filesystem::path output_dir(const Common& common) {
  if (!common.out.empty()) return common.out;
  if (const char* env = std::getenv("CWLM_OUTPUT_DIR"); env != nullptr && *env != '\0') return env;
  return ".";
}

int execute(Invocation& inv, const Common& common, const std::string& command_line) {
  const auto started = std::chrono::steady_clock::now();
  Settings settings(inv.name, inv.defaults());
  RunOutput result;
  try {
    if (!common.config.empty()) settings.merge_file(common.config);
    if (inv.positional) settings.set(inv.positional_key, *inv.positional);
    for (const auto& [key, value] : inv.overrides) settings.set(key, value);
    result = inv.run(settings, common.workers);
  } catch (const ConfigError& e) {
    std::cerr << "cwlm " << inv.name << ": invalid configuration: " << e.what() << "\n";
    return kUsageError;
  } catch (const StatisticsError& e) {
    std::cerr << "cwlm " << inv.name << ": " << e.what() << "\n";
    return kStatisticsError;
  }

  const std::filesystem::path dir = output_dir(common);
  json outputs = json::array();
  for (const Artifact& a : result.files) {
    io::write_atomic(dir / a.name, a.contents);
    outputs.push_back({{"file", a.name}, {"bytes", a.contents.size()}});
  }
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  json manifest = {{"subcommand", inv.name},
                   {"version", kVersion},
                   {"config", settings.resolved()},
                   {"outputs", outputs},
                   {"workers", resolve_workers(common.workers)},
                   {"wall_time_seconds", wall},
                   {"warnings", result.warnings},
                   {"report", result.report},
                   {"command_line", command_line}};
  if (settings.resolved().contains("seed")) manifest["seed"] = settings.resolved().at("seed");
  const std::string manifest_name = inv.name + "_manifest.json";
  io::write_atomic(dir / manifest_name, manifest.dump(2) + "\n");

  for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
  for (const Artifact& a : result.files) std::cout << (dir / a.name).string() << "\n";
  std::cout << (dir / manifest_name).string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo simulation of continuous weak linear measurement of a qubit", "cwlm"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1, 1);

  Common common;
  Invocation trajectory{"trajectory", trajectory_defaults, run_trajectory_command, {}, {}, {}};
  Invocation conditioned{"conditioned", conditioned_defaults, run_conditioned_command, {}, {}, {}};
  Invocation decision{"decision", decision_defaults, run_decision_command, {}, {}, {}};
  Invocation feedback{"feedback", feedback_defaults, run_feedback_command, {}, {}, "feedback.mode"};
  Invocation oracle{"oracle", oracle_defaults, run_oracle_command, {}, {}, "oracle.kind"};

  CLI::App* t = add_command(app, trajectory, common, "Single or ensemble quantum trajectories");
  bind_simulation(t, trajectory);

  CLI::App* c = add_command(app, conditioned, common, "Averages conditioned on the final state");
  bind_simulation(c, conditioned);
  bind(c, conditioned, "--settle", "conditioned.settle", "Minimum |Sz(T)| for a trajectory to count");
  bind_switch(c, conditioned, "--write-trajectories", "output.trajectories", "true",
              "Also write the trajectory CSV");

  CLI::App* d = add_command(app, decision, common, "Decision-time histograms and fits");
  // --h names the threshold here, so help is long-form only.
  d->set_help_flag("--help", "Print this help message and exit");
  bind(d, decision, "--n", "n", "Number of trajectories");
  bind(d, decision, "--theta", "detector.theta", "Measurement strength per step");
  bind(d, decision, "--seed", "seed", "Random seed");
  bind(d, decision, "--h", "decision.h", "Thresholds h, comma list or lo:step:hi");
  bind(d, decision, "--max-time", "decision.max_time", "Longest simulated time per trajectory");
  bind(d, decision, "--settle", "decision.settle", "Stop once |Sz| >= 1 - settle");
  bind(d, decision, "--bins", "decision.bins", "Histogram bins (0 = automatic)");

  CLI::App* f = add_command(app, feedback, common, "Threshold feedback loop");
  f->add_option("mode", feedback.positional, "single, sweep or optimize");
  bind(f, feedback, "--n", "n", "Number of trajectories");
  bind(f, feedback, "--theta", "detector.theta", "Measurement strength per step");
  bind(f, feedback, "--seed", "seed", "Random seed");
  bind(f, feedback, "--noise", "noise.output", "Extra white-noise power on the readings");
  bind(f, feedback, "--I", "feedback.I", "Reaction threshold (initial guess when optimizing)");
  bind(f, feedback, "--Tf", "feedback.Tf", "Collection time (initial guess when optimizing)");
  bind(f, feedback, "--cycles", "feedback.cycles", "Measured cycles per trajectory");
  bind(f, feedback, "--burn-in", "feedback.burn_in", "Discarded leading cycles");
  bind(f, feedback, "--I-grid", "feedback.I_grid", "Sweep thresholds");
  bind(f, feedback, "--Tf-grid", "feedback.Tf_grid", "Sweep collection times");
  bind_switch(f, feedback, "--oracle", "feedback.oracle", "true", "Optimize the analytic efficiency");

  CLI::App* o = add_command(app, oracle, common, "Tabulate analytic curves");
  o->add_option("kind", oracle.positional, "decay, conditional, joint or landscape");
  bind(o, oracle, "--t-max", "oracle.t_max", "End of the time axis");
  bind(o, oracle, "--points", "oracle.points", "Points per axis");
  bind(o, oracle, "--omega", "oracle.omega", "Hamiltonian strength for the decay curve");
  bind(o, oracle, "--t1", "oracle.t1", "First window length");
  bind(o, oracle, "--t2", "oracle.t2", "Second window length");
  bind(o, oracle, "--v-min", "oracle.v_min", "Lower reading");
  bind(o, oracle, "--v-max", "oracle.v_max", "Upper reading");
  bind(o, oracle, "--I-grid", "oracle.I_grid", "Landscape thresholds");
  bind(o, oracle, "--Tf-grid", "oracle.Tf_grid", "Landscape collection times");
  bind_switch(o, oracle, "--no-fourier", "oracle.fourier", "false", "Skip the Fourier-inverted columns");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  std::string command_line;
  for (int i = 0; i < argc; ++i) command_line += (i ? " " : "") + std::string(argv[i]);

  for (Invocation* inv : {&trajectory, &conditioned, &decision, &feedback, &oracle}) {
    if (!app.got_subcommand(inv->name)) continue;
    try {
      return execute(*inv, common, command_line);
    } catch (const std::exception& e) {
      std::cerr << "cwlm " << inv->name << ": " << e.what() << "\n";
      return 1;
    }
  }
  return kUsageError;
}
