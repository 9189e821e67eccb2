// Copyright 2026 The gradflux Authors
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

// Run configuration: an INI-style `key = value` file with a fixed schema.
// Every key has a default; unknown sections or keys are rejected. Values
// are kept as text so that a resolved configuration echoes back verbatim.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gradflux/circuit.hpp"
#include "gradflux/dynamics.hpp"
#include "gradflux/spectrum.hpp"

namespace gradflux {

inline constexpr const char* kToolName = "gradflux";
inline constexpr const char* kToolVersion = "0.1.0";

class RunConfig {
 public:
  struct Entry {
    std::string section;
    std::string key;
    std::string value;
  };

  /// All schema keys at their defaults.
  RunConfig();

  /// Parses INI text on top of the defaults.
  static RunConfig from_ini(const std::string& text);

  /// Loads an INI file, or recovers the configuration embedded in a CSV or
  /// JSON output written by this tool.
  static RunConfig from_file(const std::string& path);

  /// Throws InputError naming "section.key" when the key is not in the schema.
  void set(const std::string& section, const std::string& key, const std::string& value);
  /// "section.key=value".
  void set_assignment(const std::string& assignment);

  const std::string& get(const std::string& section, const std::string& key) const;
  bool is_empty(const std::string& section, const std::string& key) const;
  double get_double(const std::string& section, const std::string& key) const;
  std::optional<double> get_optional_double(const std::string& section, const std::string& key) const;
  std::int64_t get_int(const std::string& section, const std::string& key) const;
  std::uint64_t get_seed(const std::string& section, const std::string& key) const;

  const std::vector<Entry>& entries() const noexcept { return entries_; }

  /// Canonical INI rendering in schema order.
  std::string to_ini(const std::vector<std::string>& sections = {}) const;

  // Typed views, validated by the owning module.
  BranchCircuit device_circuit() const;
  EffectiveFluxonium device() const;
  LoopGeometry geometry() const;
  FockBasis basis() const;
  double overlap_threshold() const;
  unsigned threads() const;
  JunctionArrayModel junction_array() const;

 private:
  Entry& find(const std::string& section, const std::string& key);
  const Entry& find(const std::string& section, const std::string& key) const;

  std::vector<Entry> entries_;
};

}  // namespace gradflux
