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

#include "cwlm/io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <stdexcept>

#include <fmt/format.h>

#include "cwlm/error.hpp"

namespace cwlm::io {

static_assert(std::endian::native == std::endian::little, "binary container assumes little-endian");

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  return fmt::format("{:.17g}", value);
}

void write_atomic(const std::filesystem::path& path, std::string_view contents) {
  namespace fs = std::filesystem;
  const fs::path dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
  fs::create_directories(dir);
  std::random_device rd;
  const fs::path tmp = dir / fmt::format(".{}.{:08x}.tmp", path.filename().string(), rd());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw std::runtime_error("failed writing " + tmp.string());
    }
  }
  fs::rename(tmp, path);
}

CsvWriter::CsvWriter(std::initializer_list<std::string_view> columns) : columns_(columns.size()) {
  bool first = true;
  for (std::string_view c : columns) {
    if (!first) out_ += ',';
    out_ += c;
    first = false;
  }
  out_ += '\n';
}

void CsvWriter::separator() {
  if (filled_ == columns_) throw std::logic_error("CSV row has too many cells");
  if (filled_ > 0) out_ += ',';
  ++filled_;
}

CsvWriter& CsvWriter::cell(double value) {
  separator();
  out_ += format_double(value);
  return *this;
}

CsvWriter& CsvWriter::cell(std::size_t value) {
  separator();
  out_ += fmt::format("{}", value);
  return *this;
}

CsvWriter& CsvWriter::cell(long long value) {
  separator();
  out_ += fmt::format("{}", value);
  return *this;
}

CsvWriter& CsvWriter::empty() {
  separator();
  return *this;
}

void CsvWriter::end_row() {
  if (filled_ != columns_) throw std::logic_error("CSV row has too few cells");
  out_ += '\n';
  filled_ = 0;
}

// ---------------------------------------------------------------------------

json to_json(const DetectorParams& p) {
  return {{"theta", p.theta}, {"dt", p.dt}};
}

json to_json(const QubitState& s) { return {s.x, s.y, s.z}; }

json to_json(const SimulationConfig& cfg) {
  json j = {
      {"detector", to_json(cfg.detector)},
      {"total_time", cfg.total_time},
      {"sampling_interval", cfg.sampling_interval},
      {"hamiltonian", nullptr},
      {"output_noise", cfg.output_noise},
      {"seed", cfg.seed},
      {"n_trajectories", cfg.n_trajectories},
      {"full_grid", cfg.full_grid},
      {"steps_per_window", cfg.steps_per_window()},
      {"window_count", cfg.window_count()},
      {"effective_sampling_interval", cfg.effective_sampling_interval()},
      {"effective_total_time", cfg.effective_total_time()},
  };
  if (cfg.hamiltonian) {
    j["hamiltonian"] = {{"axis", std::string(axis_name(cfg.hamiltonian->axis))},
                        {"omega", cfg.hamiltonian->omega}};
  }
  return j;
}

SimulationConfig simulation_config_from_json(const json& j) {
  try {
    SimulationConfig cfg;
    cfg.detector = DetectorParams::from_theta(j.at("detector").at("theta").get<double>());
    cfg.total_time = j.at("total_time").get<double>();
    cfg.sampling_interval = j.at("sampling_interval").get<double>();
    if (const auto& h = j.at("hamiltonian"); !h.is_null()) {
      cfg.hamiltonian = HamiltonianTerm{parse_axis(h.at("axis").get<std::string>()),
                                        h.at("omega").get<double>()};
    }
    cfg.output_noise = j.at("output_noise").get<double>();
    cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.n_trajectories = j.at("n_trajectories").get<std::size_t>();
    cfg.full_grid = j.at("full_grid").get<bool>();
    return cfg;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed simulation config: ") + e.what());
  }
}

json to_json(const DecisionRunConfig& cfg) {
  return {{"detector", to_json(cfg.detector)},
          {"thresholds", cfg.thresholds},
          {"seed", cfg.seed},
          {"n_trajectories", cfg.n_trajectories},
          {"max_time", cfg.max_time},
          {"settle_threshold", cfg.settle_threshold},
          {"initial", to_json(cfg.initial)}};
}

json to_json(const FeedbackConfig& cfg) {
  return {{"threshold", cfg.threshold},
          {"collection_time", cfg.collection_time},
          {"effective_collection_time", cfg.effective_collection_time()},
          {"n_cycles", cfg.n_cycles},
          {"burn_in_cycles", cfg.burn_in_cycles},
          {"rotation_magnitude", cfg.rotation_magnitude},
          {"record_trace", cfg.record_trace},
          {"simulation", to_json(cfg.simulation())}};
}

// ---------------------------------------------------------------------------

std::string trajectories_csv(std::span<const Trajectory> trajectories) {
  CsvWriter csv{"trajectory_id", "t", "sigma_x", "sigma_y", "sigma_z", "v"};
  for (const Trajectory& tr : trajectories) {
    const std::size_t k_steps =
        tr.dt > 0.0 ? static_cast<std::size_t>(std::llround(tr.sampling_interval / tr.dt)) : 0;
    for (std::size_t i = 0; i < tr.times.size(); ++i) {
      csv.cell(static_cast<std::size_t>(tr.id)).cell(tr.times[i]);
      csv.cell(tr.sigma_x[i]).cell(tr.sigma_y[i]).cell(tr.sigma_z[i]);
      // Reading of the window that contains the point; the window closes at it
      // on the sampling grid. The initial point has none.
      const std::size_t step = i * tr.record_stride;
      if (step == 0 || k_steps == 0) {
        csv.empty();
      } else {
        const std::size_t w = (step - 1) / k_steps;
        if (w < tr.sampled_v.size()) {
          csv.cell(tr.sampled_v[w]);
        } else {
          csv.empty();
        }
      }
      csv.end_row();
    }
  }
  return csv.str();
}

namespace {

constexpr char kMagic[8] = {'C', 'W', 'L', 'M', 'T', 'R', 'J', '\0'};

template <class T>
void put(std::string& out, const T& value) {
  const char* p = reinterpret_cast<const char*>(&value);
  out.append(p, sizeof(T));
}

template <class T>
void put_array(std::string& out, const std::vector<T>& values) {
  out.append(reinterpret_cast<const char*>(values.data()), values.size() * sizeof(T));
}

class Reader {
 public:
  explicit Reader(std::string data) : data_(std::move(data)) {}

  template <class T>
  T get() {
    T value;
    need(sizeof(T));
    std::memcpy(&value, data_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }

  template <class T>
  std::vector<T> get_array(std::uint64_t n) {
    if (n > (data_.size() - pos_) / sizeof(T)) throw std::runtime_error("truncated trajectory file");
    std::vector<T> values(n);
    std::memcpy(values.data(), data_.data() + pos_, n * sizeof(T));
    pos_ += n * sizeof(T);
    return values;
  }

  std::string get_bytes(std::uint64_t n) {
    need(n);
    std::string s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  bool done() const { return pos_ == data_.size(); }

 private:
  void need(std::uint64_t n) const {
    if (n > data_.size() - pos_) throw std::runtime_error("truncated trajectory file");
  }

  std::string data_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string trajectory_binary(std::span<const Trajectory> trajectories, const json& metadata) {
  json meta = metadata;
  meta["n_trajectories_stored"] = trajectories.size();
  const std::string header = meta.dump();
  std::string out(kMagic, sizeof(kMagic));
  put(out, kBinaryVersion);
  put(out, std::uint32_t{0});
  put(out, static_cast<std::uint64_t>(header.size()));
  out += header;
  for (const Trajectory& tr : trajectories) {
    put(out, static_cast<std::uint64_t>(tr.id));
    put(out, tr.dt);
    put(out, tr.sampling_interval);
    put(out, static_cast<std::uint64_t>(tr.record_stride));
    put(out, static_cast<std::int32_t>(tr.final_sign));
    put(out, std::uint32_t{0});
    put(out, static_cast<std::uint64_t>(tr.times.size()));
    put(out, static_cast<std::uint64_t>(tr.sampled_v.size()));
    put(out, static_cast<std::uint64_t>(tr.raw_outcomes.size()));
    put_array(out, tr.times);
    put_array(out, tr.sigma_x);
    put_array(out, tr.sigma_y);
    put_array(out, tr.sigma_z);
    put_array(out, tr.window_times);
    put_array(out, tr.sampled_v);
    put_array(out, tr.raw_outcomes);
  }
  return out;
}

void write_trajectory_binary(const std::filesystem::path& path,
                             std::span<const Trajectory> trajectories, const json& metadata) {
  write_atomic(path, trajectory_binary(trajectories, metadata));
}

TrajectoryFile read_trajectory_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  Reader r(std::string(std::istreambuf_iterator<char>(in), {}));
  if (r.get_bytes(sizeof(kMagic)) != std::string(kMagic, sizeof(kMagic))) {
    throw std::runtime_error(path.string() + " is not a trajectory container");
  }
  if (const auto version = r.get<std::uint32_t>(); version != kBinaryVersion) {
    throw std::runtime_error(fmt::format("unsupported container version {}", version));
  }
  r.get<std::uint32_t>();
  TrajectoryFile file;
  file.metadata = json::parse(r.get_bytes(r.get<std::uint64_t>()));
  const auto count = file.metadata.at("n_trajectories_stored").get<std::size_t>();
  file.trajectories.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Trajectory tr;
    tr.id = r.get<std::uint64_t>();
    tr.dt = r.get<double>();
    tr.sampling_interval = r.get<double>();
    tr.record_stride = r.get<std::uint64_t>();
    tr.final_sign = r.get<std::int32_t>();
    r.get<std::uint32_t>();
    const auto points = r.get<std::uint64_t>();
    const auto windows = r.get<std::uint64_t>();
    const auto raw = r.get<std::uint64_t>();
    tr.times = r.get_array<double>(points);
    tr.sigma_x = r.get_array<double>(points);
    tr.sigma_y = r.get_array<double>(points);
    tr.sigma_z = r.get_array<double>(points);
    tr.window_times = r.get_array<double>(windows);
    tr.sampled_v = r.get_array<double>(windows);
    tr.raw_outcomes = r.get_array<std::int8_t>(raw);
    file.trajectories.push_back(std::move(tr));
  }
  if (!r.done()) throw std::runtime_error("trailing bytes in trajectory file");
  return file;
}

// ---------------------------------------------------------------------------

std::string conditioned_sigma_z_csv(const ConditionedAverage& avg) {
  CsvWriter csv{"t", "sigma_z_c", "stderr_sigma_z_c", "sigma_z", "sigma_z_plus", "sigma_z_minus",
                "tanh_reference"};
  for (std::size_t i = 0; i < avg.times.size(); ++i) {
    csv.cell(avg.times[i]).cell(avg.mean_sigma_z_c[i]).cell(avg.stderr_sigma_z_c[i]);
    csv.cell(avg.mean_sigma_z[i]);
    if (avg.mean_sigma_z_plus.empty()) {
      csv.empty();
    } else {
      csv.cell(avg.mean_sigma_z_plus[i]);
    }
    if (avg.mean_sigma_z_minus.empty()) {
      csv.empty();
    } else {
      csv.cell(avg.mean_sigma_z_minus[i]);
    }
    csv.cell(conditioned_sigma_z_reference(avg.times[i]));
    csv.end_row();
  }
  return csv.str();
}

std::string conditioned_v_csv(const ConditionedAverage& avg) {
  CsvWriter csv{"t_start", "v_c", "stderr_v_c"};
  for (std::size_t i = 0; i < avg.window_times.size(); ++i) {
    csv.cell(avg.window_times[i]).cell(avg.mean_v_c[i]).cell(avg.stderr_v_c[i]);
    csv.end_row();
  }
  return csv.str();
}

std::string histogram_csv(const Histogram& hist, const FitResult* fit) {
  CsvWriter csv{"bin_lo", "bin_hi", "t_center", "count", "density", "fit_density"};
  for (std::size_t i = 0; i < hist.bins(); ++i) {
    csv.cell(hist.edge(i)).cell(hist.edge(i + 1)).cell(hist.center(i));
    csv.cell(hist.counts[i]).cell(hist.density(i));
    if (fit != nullptr) {
      csv.cell(fit->density(hist.center(i)));
    } else {
      csv.empty();
    }
    csv.end_row();
  }
  return csv.str();
}

json to_json(const FitResult& fit) {
  return {{"a", fit.a},
          {"b", fit.b},
          {"c", fit.c},
          {"fitted_log_c", fit.fitted_log_c},
          {"residual_rms", fit.residual},
          {"t_p", fit.t_p},
          {"model_mean", fit.model_mean()},
          {"model_variance", fit.model_variance()},
          {"bins_used", fit.bins_used},
          {"n_samples", fit.n_samples},
          {"bins", {{"lo", fit.histogram.lo},
                    {"width", fit.histogram.width},
                    {"count", fit.histogram.bins()},
                    {"rule", "freedman-diaconis, min 50 bins, range [0, max]"}}}};
}

json to_json(const DecisionSet& set) {
  return {{"h", set.h},
          {"n_decided", set.samples.size()},
          {"n_undecided", set.n_undecided},
          {"n_wrong", set.n_wrong()},
          {"error_rate", set.error_rate()},
          {"expected_error_rate", set.h / 2.0},
          {"error_rate_z_score", set.error_rate_z_score()}};
}

// ---------------------------------------------------------------------------

std::string landscape_csv(const oracle::EfficiencyLandscape& land) {
  CsvWriter csv{"I", "T_f", "A", "B", "rho_x", "sigma_bar_x"};
  for (std::size_t j = 0; j < land.collection_times.size(); ++j) {
    for (std::size_t i = 0; i < land.thresholds.size(); ++i) {
      const auto& c = land.at(i, j);
      csv.cell(land.thresholds[i]).cell(land.collection_times[j]);
      csv.cell(c.a).cell(c.b).cell(c.rho_x).cell(c.sigma_bar_x);
      csv.end_row();
    }
  }
  return csv.str();
}

std::string sweep_csv(std::span<const SweepPoint> points) {
  CsvWriter csv{"I",      "T_f", "sigma_bar_x", "stderr", "correction_rate", "T_f_effective",
                "sigma_x_after_correction", "analytic_sigma_bar_x", "analytic_rho_x", "steady_state"};
  for (const SweepPoint& p : points) {
    csv.cell(p.threshold).cell(p.collection_time);
    csv.cell(p.result.sigma_bar_x).cell(p.result.stderr_sigma_bar_x).cell(p.result.correction_rate);
    csv.cell(p.result.effective_collection_time).cell(p.result.sigma_x_after_correction);
    csv.cell(p.analytic.sigma_bar_x).cell(p.analytic.rho_x);
    csv.cell(p.result.steady_state ? 1 : 0);
    csv.end_row();
  }
  return csv.str();
}

std::string cycle_means_csv(const FeedbackResult& result, double collection_time) {
  CsvWriter csv{"cycle", "t_start", "sigma_bar_x"};
  for (std::size_t c = 0; c < result.cycle_means.size(); ++c) {
    csv.cell(c).cell(static_cast<double>(c) * collection_time).cell(result.cycle_means[c]);
    csv.end_row();
  }
  return csv.str();
}

std::string trace_csv(const FeedbackResult& result) {
  CsvWriter csv{"t", "sigma_x"};
  for (std::size_t i = 0; i < result.trace_times.size(); ++i) {
    csv.cell(result.trace_times[i]).cell(result.trace_sigma_x[i]);
    csv.end_row();
  }
  return csv.str();
}

json to_json(const FeedbackResult& r) {
  return {{"sigma_bar_x", r.sigma_bar_x},
          {"stderr_sigma_bar_x", r.stderr_sigma_bar_x},
          {"sigma_x_after_correction", r.sigma_x_after_correction},
          {"stderr_after_correction", r.stderr_after_correction},
          {"correction_rate", r.correction_rate},
          {"mean_sigma_z", r.mean_sigma_z},
          {"stderr_sigma_z", r.stderr_sigma_z},
          {"drift_sigma", r.drift_sigma},
          {"steady_state", r.steady_state},
          {"n_trajectories", r.n_trajectories},
          {"effective_collection_time", r.effective_collection_time}};
}

json to_json(const OptimizationResult& r) {
  json trace = json::array();
  for (const OptimizerStep& s : r.trace) {
    trace.push_back({{"iteration", s.iteration},
                     {"I", s.threshold},
                     {"T_f", s.collection_time},
                     {"value", s.value},
                     {"step_I", s.step_threshold},
                     {"step_T_f", s.step_time},
                     {"moved", s.moved}});
  }
  return {{"I", r.threshold},         {"T_f", r.collection_time}, {"sigma_bar_x", r.value},
          {"evaluations", r.evaluations}, {"iterations", r.iterations},
          {"converged", r.converged}, {"trace", trace}};
}

}  // namespace cwlm::io
