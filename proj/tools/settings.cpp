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

#include "settings.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "cwlm/error.hpp"

namespace cwlm::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string strip_quotes(const std::string& s) {
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) {
    return s.substr(1, s.size() - 2);
  }
  return s;
}

}  // namespace

double parse_number(const std::string& text) {
  const std::string t = trim(text);
  if (const auto slash = t.find('/'); slash != std::string::npos) {
    return parse_number(t.substr(0, slash)) / parse_number(t.substr(slash + 1));
  }
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &used);
  } catch (const std::exception&) {
    throw ConfigError("not a number: '" + text + "'");
  }
  if (used != t.size() || !std::isfinite(v)) throw ConfigError("not a number: '" + text + "'");
  return v;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  const std::string t = trim(text);
  if (t.empty()) throw ConfigError("empty list");
  if (t.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(t);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    if (parts.size() != 3) throw ConfigError("range must be lo:step:hi, got '" + text + "'");
    const double lo = parse_number(parts[0]);
    const double step = parse_number(parts[1]);
    const double hi = parse_number(parts[2]);
    if (!(step > 0.0) || hi < lo) throw ConfigError("invalid range '" + text + "'");
    const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
    if (n > 1000000) throw ConfigError("range '" + text + "' is too long");
    for (long k = 0; k <= n; ++k) out.push_back(lo + static_cast<double>(k) * step);
    return out;
  }
  std::stringstream ss(t);
  for (std::string p; std::getline(ss, p, ',');) out.push_back(parse_number(p));
  return out;
}

Settings::Settings(std::string subcommand, json defaults)
    : subcommand_(std::move(subcommand)), values_(std::move(defaults)) {
  for (auto& [key, value] : values_.items()) {
    if (value.is_number_integer()) value = value.get<std::uint64_t>();
  }
}

json Settings::parse_as(const std::string& key, const std::string& raw) const {
  const json& current = values_.at(key);
  const std::string v = strip_quotes(trim(raw));
  if (current.is_boolean()) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("'" + key + "' expects true or false, got '" + raw + "'");
  }
  if (current.is_number_integer()) {
    const bool digits = !v.empty() && v.find_first_not_of("0123456789") == std::string::npos;
    if (digits && v.size() <= 20) {
      try {
        return static_cast<std::uint64_t>(std::stoull(v));
      } catch (const std::exception&) {
      }
    }
    // Also accept forms like 4e5.
    const double d = digits ? -1.0 : parse_number(v);
    if (d < 0.0 || d != std::floor(d) || d >= 9007199254740992.0) {
      throw ConfigError("'" + key + "' expects a non-negative integer, got '" + raw + "'");
    }
    return static_cast<std::uint64_t>(d);
  }
  if (current.is_number()) return parse_number(v);
  if (key.ends_with("_grid") || key == "decision.h") parse_list(v);  // validate early
  return v;
}

void Settings::assign(const std::string& key, const json& value, const std::string& origin) {
  if (!values_.contains(key)) {
    throw ConfigError("unknown setting '" + key + "' in " + origin + " for '" + subcommand_ + "'");
  }
  const json& current = values_[key];
  const bool ok = (current.is_boolean() && value.is_boolean()) ||
                  (current.is_number_integer() && value.is_number_unsigned()) ||
                  (current.is_number_float() && value.is_number()) ||
                  (current.is_string() && value.is_string());
  if (!ok) throw ConfigError("setting '" + key + "' in " + origin + " has the wrong type");
  if (current.is_number_float()) {
    values_[key] = value.get<double>();
  } else if (current.is_number_integer()) {
    values_[key] = value.get<std::uint64_t>();
  } else {
    values_[key] = value;
  }
}

void Settings::set(const std::string& key, const std::string& raw) {
  if (!values_.contains(key)) throw ConfigError("unknown setting '" + key + "'");
  values_[key] = parse_as(key, raw);
}

void Settings::merge_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  const std::string origin = path.string();

  if (trim(text).starts_with("{")) {
    json doc;
    try {
      doc = json::parse(text);
    } catch (const json::exception& e) {
      throw ConfigError("malformed JSON in " + origin + ": " + e.what());
    }
    // A run manifest carries its settings under "config"; a bare object is the settings.
    if (doc.contains("subcommand") && doc.at("subcommand") != subcommand_) {
      throw ConfigError(origin + " is a manifest for '" + doc.at("subcommand").get<std::string>() +
                        "', not '" + subcommand_ + "'");
    }
    const json& cfg = doc.contains("config") ? doc.at("config") : doc;
    if (!cfg.is_object()) throw ConfigError(origin + ": config must be an object");
    for (const auto& [k, v] : cfg.items()) assign(k, v, origin);
    return;
  }

  std::stringstream lines(text);
  int number = 0;
  for (std::string line; std::getline(lines, line);) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(number) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    if (!values_.contains(key)) {
      throw ConfigError(origin + ":" + std::to_string(number) + ": unknown setting '" + key + "'");
    }
    values_[key] = parse_as(key, line.substr(eq + 1));
  }
}

double Settings::number(const std::string& key) const { return values_.at(key).get<double>(); }

std::uint64_t Settings::count(const std::string& key) const {
  return values_.at(key).get<std::uint64_t>();
}

bool Settings::flag(const std::string& key) const { return values_.at(key).get<bool>(); }

std::string Settings::text(const std::string& key) const {
  return values_.at(key).get<std::string>();
}

std::vector<double> Settings::list(const std::string& key) const { return parse_list(text(key)); }

}  // namespace cwlm::cli
