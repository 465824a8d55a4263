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

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace cwlm::cli {

using nlohmann::json;

/// Flat dotted-key configuration. The defaults fix the key set and the type of
/// every value; config files and flags may only override existing keys.
class Settings {
 public:
  Settings(std::string subcommand, json defaults);

  /// Plain text ("key = value" per line, '#' comments) or a run manifest.
  void merge_file(const std::filesystem::path& path);
  /// Flag value as typed on the command line.
  void set(const std::string& key, const std::string& raw);

  double number(const std::string& key) const;
  std::uint64_t count(const std::string& key) const;
  bool flag(const std::string& key) const;
  std::string text(const std::string& key) const;
  /// "a,b,c" or "lo:step:hi"; entries may be fractions such as 1/3.
  std::vector<double> list(const std::string& key) const;

  const json& resolved() const { return values_; }
  const std::string& subcommand() const { return subcommand_; }

 private:
  void assign(const std::string& key, const json& value, const std::string& origin);
  json parse_as(const std::string& key, const std::string& raw) const;

  std::string subcommand_;
  json values_;
};

double parse_number(const std::string& text);
std::vector<double> parse_list(const std::string& text);

}  // namespace cwlm::cli
