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

#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "cwlm/feedback.hpp"
#include "cwlm/oracle.hpp"
#include "cwlm/stats.hpp"
#include "cwlm/trajectory.hpp"

namespace cwlm::io {

using nlohmann::json;

/// Shortest round-trip form is not used on purpose: always 17 significant
/// digits so files diff byte-for-byte across runs.
std::string format_double(double value);

/// Writes to a temporary file in the same directory, then renames over `path`.
void write_atomic(const std::filesystem::path& path, std::string_view contents);

class CsvWriter {
 public:
  explicit CsvWriter(std::initializer_list<std::string_view> columns);

  CsvWriter& cell(double value);
  CsvWriter& cell(std::size_t value);
  CsvWriter& cell(long long value);
  CsvWriter& cell(int value) { return cell(static_cast<long long>(value)); }
  /// Missing value, written as an empty field.
  CsvWriter& empty();
  void end_row();

  const std::string& str() const { return out_; }

 private:
  void separator();

  std::size_t columns_;
  std::size_t filled_ = 0;
  std::string out_;
};

// ---------------------------------------------------------------------------
// Configuration

json to_json(const DetectorParams& params);
json to_json(const SimulationConfig& cfg);
json to_json(const DecisionRunConfig& cfg);
json to_json(const FeedbackConfig& cfg);
json to_json(const QubitState& state);

SimulationConfig simulation_config_from_json(const json& j);

// ---------------------------------------------------------------------------
// Trajectories

/// One row per stored grid point: trajectory_id,t,sigma_x,sigma_y,sigma_z,v.
std::string trajectories_csv(std::span<const Trajectory> trajectories);

struct TrajectoryFile {
  json metadata;
  std::vector<Trajectory> trajectories;
};

/// Binary container: magic "CWLMTRJ\0", u32 format version, u32 zero, u64
/// metadata length, the metadata JSON, then one record per trajectory.
/// Little-endian IEEE doubles throughout.
std::string trajectory_binary(std::span<const Trajectory> trajectories, const json& metadata);
void write_trajectory_binary(const std::filesystem::path& path,
                             std::span<const Trajectory> trajectories, const json& metadata);
TrajectoryFile read_trajectory_binary(const std::filesystem::path& path);

inline constexpr std::uint32_t kBinaryVersion = 1;

// ---------------------------------------------------------------------------
// Statistics

std::string conditioned_sigma_z_csv(const ConditionedAverage& avg);
std::string conditioned_v_csv(const ConditionedAverage& avg);

/// Histogram rows with the fitted density alongside when `fit` is given.
std::string histogram_csv(const Histogram& hist, const FitResult* fit = nullptr);

json to_json(const FitResult& fit);
json to_json(const DecisionSet& set);

// ---------------------------------------------------------------------------
// Feedback

std::string landscape_csv(const oracle::EfficiencyLandscape& landscape);
std::string sweep_csv(std::span<const SweepPoint> points);
std::string cycle_means_csv(const FeedbackResult& result, double collection_time);
std::string trace_csv(const FeedbackResult& result);
json to_json(const FeedbackResult& result);
json to_json(const OptimizationResult& result);

}  // namespace cwlm::io
