// Copyright 2026 The regperturb Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#ifndef REGPERTURB_SIDECAR_HPP_
#define REGPERTURB_SIDECAR_HPP_

#include <charconv>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "regperturb/error.hpp"
#include "regperturb/format.hpp"

namespace regperturb {

// Flat key=value text: one pair per line, '#' starts a comment line.
class KeyValueText {
 public:
  static KeyValueText Parse(std::string_view text) {
    KeyValueText kv;
    std::size_t line_number = 0;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
      ++line_number;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line[0] == '#') continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos || eq == 0) {
        throw Error(ErrorCode::kParseError,
                    "metadata line " + std::to_string(line_number) + " is not key=value");
      }
      kv.Set(line.substr(0, eq), line.substr(eq + 1));
    }
    return kv;
  }

  void Set(const std::string& key, std::string value) {
    if (!values_.count(key)) order_.push_back(key);
    values_[key] = std::move(value);
  }
  void Set(const std::string& key, double value) { Set(key, FormatDouble(value)); }
  void Set(const std::string& key, bool value) {
    Set(key, std::string(value ? "true" : "false"));
  }
  void Set(const std::string& key, std::int64_t value) { Set(key, std::to_string(value)); }
  void Set(const std::string& key, std::uint64_t value) { Set(key, std::to_string(value)); }
  void Set(const std::string& key, int value) { Set(key, std::to_string(value)); }
  void Set(const std::string& key, const char* value) { Set(key, std::string(value)); }

  bool Has(const std::string& key) const { return values_.count(key) > 0; }

  const std::string& Get(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) {
      throw Error(ErrorCode::kParseError, "metadata key '" + key + "' missing");
    }
    return it->second;
  }

  double GetDouble(const std::string& key) const {
    const std::string& s = Get(key);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      throw Error(ErrorCode::kParseError, "metadata key '" + key + "' is not a number");
    }
    return v;
  }

  std::uint64_t GetUnsigned(const std::string& key) const {
    const std::string& s = Get(key);
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      throw Error(ErrorCode::kParseError, "metadata key '" + key + "' is not an integer");
    }
    return v;
  }

  bool GetBool(const std::string& key) const {
    const std::string& s = Get(key);
    if (s == "true") return true;
    if (s == "false") return false;
    throw Error(ErrorCode::kParseError, "metadata key '" + key + "' is not a boolean");
  }

  // Comma-joined list; empty string is the empty list.
  std::vector<std::string> GetList(const std::string& key) const {
    std::vector<std::string> out;
    const std::string& s = Get(key);
    if (s.empty()) return out;
    std::size_t start = 0;
    while (true) {
      const auto comma = s.find(',', start);
      out.push_back(s.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    return out;
  }

  std::string ToString() const {
    std::string out;
    for (const auto& key : order_) {
      out += key;
      out += '=';
      out += values_.at(key);
      out += '\n';
    }
    return out;
  }

 private:
  std::vector<std::string> order_;
  std::map<std::string, std::string> values_;
};

inline std::string JoinList(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ',';
    out += items[i];
  }
  return out;
}

inline constexpr std::string_view kReleaseFormat = "regperturb-release/1";

// What a published release records about itself. Never the direction v;
// the seed only on explicit request, since seed plus parameters
// reconstruct the noise and hence the original response.
struct ReleaseMetadata {
  std::string response;
  std::vector<std::string> explanatory;
  std::vector<std::string> dummies;
  std::vector<std::string> ignored;
  std::int64_t rows = 0;
  double a = -2.0;
  double b = 1.0;
  bool positivity_required = false;
  int max_retries = 100;
  int retries_used = 0;
  bool seed_present = true;
  std::optional<std::uint64_t> seed;
  bool rounded = false;
  double original_r_squared = 0.0;
  double achieved_r_squared = 0.0;
  double achieved_mean = 0.0;
  double correlation_with_original = 0.0;
  double min_value = 0.0;
  std::vector<double> achieved_beta;
  std::vector<double> achieved_t_values;

  KeyValueText ToKeyValue() const {
    KeyValueText kv;
    kv.Set("format", std::string(kReleaseFormat));
    kv.Set("response", response);
    kv.Set("explanatory", JoinList(explanatory));
    kv.Set("dummies", JoinList(dummies));
    kv.Set("ignored", JoinList(ignored));
    kv.Set("rows", rows);
    kv.Set("a", a);
    kv.Set("b", b);
    kv.Set("positivity_required", positivity_required);
    kv.Set("max_retries", max_retries);
    kv.Set("retries_used", retries_used);
    kv.Set("seed_present", seed_present);
    kv.Set("seed_disclosed", seed.has_value());
    if (seed) kv.Set("seed", *seed);
    kv.Set("rounded", rounded);
    kv.Set("original_r_squared", original_r_squared);
    kv.Set("achieved_r_squared", achieved_r_squared);
    kv.Set("achieved_mean", achieved_mean);
    kv.Set("correlation_with_original", correlation_with_original);
    kv.Set("min_value", min_value);
    for (std::size_t j = 0; j < achieved_beta.size(); ++j) {
      kv.Set("achieved_beta." + std::to_string(j), achieved_beta[j]);
    }
    for (std::size_t j = 0; j < achieved_t_values.size(); ++j) {
      kv.Set("achieved_t." + std::to_string(j), achieved_t_values[j]);
    }
    return kv;
  }

  static ReleaseMetadata FromKeyValue(const KeyValueText& kv) {
    if (kv.Get("format") != kReleaseFormat) {
      throw Error(ErrorCode::kParseError, "unsupported metadata format '" +
                                              kv.Get("format") + "'");
    }
    ReleaseMetadata m;
    m.response = kv.Get("response");
    m.explanatory = kv.GetList("explanatory");
    m.dummies = kv.GetList("dummies");
    m.ignored = kv.GetList("ignored");
    m.rows = static_cast<std::int64_t>(kv.GetUnsigned("rows"));
    m.a = kv.GetDouble("a");
    m.b = kv.GetDouble("b");
    m.positivity_required = kv.GetBool("positivity_required");
    m.max_retries = static_cast<int>(kv.GetUnsigned("max_retries"));
    m.retries_used = static_cast<int>(kv.GetUnsigned("retries_used"));
    m.seed_present = kv.GetBool("seed_present");
    if (kv.GetBool("seed_disclosed")) m.seed = kv.GetUnsigned("seed");
    m.rounded = kv.GetBool("rounded");
    m.original_r_squared = kv.GetDouble("original_r_squared");
    m.achieved_r_squared = kv.GetDouble("achieved_r_squared");
    m.achieved_mean = kv.GetDouble("achieved_mean");
    m.correlation_with_original = kv.GetDouble("correlation_with_original");
    m.min_value = kv.GetDouble("min_value");
    for (std::size_t j = 0; kv.Has("achieved_beta." + std::to_string(j)); ++j) {
      m.achieved_beta.push_back(kv.GetDouble("achieved_beta." + std::to_string(j)));
    }
    for (std::size_t j = 0; kv.Has("achieved_t." + std::to_string(j)); ++j) {
      m.achieved_t_values.push_back(kv.GetDouble("achieved_t." + std::to_string(j)));
    }
    return m;
  }
};

}  // namespace regperturb

#endif  // REGPERTURB_SIDECAR_HPP_
