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

#include <string>
#include <vector>

#include "settings.hpp"

namespace cwlm::cli {

struct Artifact {
  std::string name;
  std::string contents;
};

struct RunOutput {
  std::vector<Artifact> files;
  json report = json::object();
  std::vector<std::string> warnings;
};

json trajectory_defaults();
json conditioned_defaults();
json decision_defaults();
json feedback_defaults();
json oracle_defaults();

/// Each command validates everything before simulating and returns its files
/// in memory; nothing touches the disk here.
RunOutput run_trajectory_command(const Settings& s, unsigned workers);
RunOutput run_conditioned_command(const Settings& s, unsigned workers);
RunOutput run_decision_command(const Settings& s, unsigned workers);
RunOutput run_feedback_command(const Settings& s, unsigned workers);
RunOutput run_oracle_command(const Settings& s, unsigned workers);

}  // namespace cwlm::cli
