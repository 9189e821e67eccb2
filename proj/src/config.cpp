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

#include "gradflux/config.hpp"

#include <algorithm>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <fstream>
#include <sstream>

#include "gradflux/errors.hpp"
#include "json.hpp"

namespace gradflux {
namespace {

// Schema order is the rendering order.
const std::vector<RunConfig::Entry>& schema() {
  static const std::vector<RunConfig::Entry> entries = {
      {"device", "mode", "effective"},
      {"device", "Lq_eff_nH", "172"},
      {"device", "L1_nH", "0"},
      {"device", "L2_nH", "0"},
      {"device", "L3_nH", "0"},
      {"device", "Ls_nH", "2.8"},
      {"device", "Lr_nH", "21.6"},
      {"device", "Cr_fF", "20.2"},
      {"device", "CJ_fF", "3.4"},
      {"device", "EJ_GHz", "5.1"},
      {"geometry", "outer_area_m2", "7.5e-09"},
      {"geometry", "wire_length_m", "0.0003"},
      {"geometry", "grain_size_m", "4e-09"},
      {"geometry", "init_field_T", ""},
      {"basis", "m_qubit", "25"},
      {"basis", "n_res", "15"},
      {"tolerances", "overlap_threshold", "0.7"},
      {"run", "threads", "1"},
      {"sweep", "flux_start_phi0", "0"},
      {"sweep", "flux_stop_phi0", "1"},
      {"sweep", "points", "101"},
      {"sweep", "transitions", "f01,f02,fr"},
      {"chi", "flux_phi0", "0.5"},
      {"chi", "ladder", ""},
      {"chi", "measured_chi_MHz", ""},
      {"chi", "ls_min_nH", "0.0001"},
      {"chi", "ls_max_nH", "10"},
      {"fit", "forward_model", "qubit_only"},
      {"fit", "starts", "8"},
      {"fit", "seed", "1"},
      {"fit", "max_iterations", "3000"},
      {"fit", "coupled_n_res", "6"},
      {"fit", "Lq_min_nH", "40"},
      {"fit", "Lq_max_nH", "1000"},
      {"fit", "CJ_min_fF", "0.5"},
      {"fit", "CJ_max_fF", "20"},
      {"fit", "EJ_min_GHz", "0.2"},
      {"fit", "EJ_max_GHz", "50"},
      {"fit", "field_scale_min_phi0_per_T", "100000"},
      {"fit", "field_scale_max_phi0_per_T", "1000000000"},
      {"fit", "field_offset_min_phi0", "-0.5"},
      {"fit", "field_offset_max_phi0", "0.5"},
      {"fit", "pinned_field_scale_phi0_per_T", ""},
      {"fit", "pinned_field_offset_phi0", "0"},
      {"dynamics", "n_junctions", ""},
      {"dynamics", "ej_grain_GHz", "53000"},
      {"dynamics", "ec_grain_GHz", "48"},
      {"trace", "rate_even_to_odd_Hz", "0.0005555555555555556"},
      {"trace", "rate_odd_to_even_Hz", "0.0005555555555555556"},
      {"trace", "duration_s", "100000"},
      {"trace", "dt_s", "1"},
      {"trace", "noise_sigma", "0.1"},
      {"trace", "seed", "1"},
      {"trace", "initial_parity", "odd"},
      {"trace", "even_level", "0"},
      {"trace", "odd_level", "1"},
      {"trace", "label", "device"},
      {"detector", "threshold_mads", "6"},
      {"detector", "window", "15"},
      {"lifetime", "confidence", "0.95"},
      {"lifetime", "reference_rate_Hz", ""},
      {"coincidence", "window_s", "60"},
      {"coincidence", "span_s", ""},
      {"curve", "model", "exponential"},
  };
  return entries;
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace

RunConfig::RunConfig() : entries_(schema()) {}

RunConfig::Entry& RunConfig::find(const std::string& section, const std::string& key) {
  for (Entry& e : entries_) {
    if (e.section == section && e.key == key) return e;
  }
  throw InputError("unknown configuration key '" + section + "." + key + "'");
}

const RunConfig::Entry& RunConfig::find(const std::string& section, const std::string& key) const {
  return const_cast<RunConfig*>(this)->find(section, key);
}

void RunConfig::set(const std::string& section, const std::string& key, const std::string& value) {
  find(section, key).value = trim(value);
}

void RunConfig::set_assignment(const std::string& assignment) {
  const auto eq = assignment.find('=');
  const auto dot = assignment.find('.');
  if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
    throw InputError("expected section.key=value, got '" + assignment + "'");
  }
  set(trim(assignment.substr(0, dot)), trim(assignment.substr(dot + 1, eq - dot - 1)),
      assignment.substr(eq + 1));
}

RunConfig RunConfig::from_ini(const std::string& text) {
  boost::property_tree::ptree tree;
  std::istringstream in(text);
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& ex) {
    throw InputError(std::string("malformed configuration: ") + ex.what());
  }
  RunConfig config;
  for (const auto& [section, body] : tree) {
    if (body.empty()) {
      throw InputError("configuration key '" + section + "' must belong to a [section]");
    }
    for (const auto& [key, value] : body) config.set(section, key, value.data());
  }
  return config;
}

RunConfig RunConfig::from_file(const std::string& path) {
  const std::string text = read_text(path);
  const auto start = text.find_first_not_of(" \t\r\n");
  if (start != std::string::npos && text[start] == '{') {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& ex) {
      throw InputError("malformed JSON in '" + path + "': " + ex.what());
    }
    if (!doc.contains("config") || !doc["config"].is_object()) {
      throw InputError("'" + path + "' carries no embedded configuration");
    }
    RunConfig config;
    for (const auto& [section, body] : doc["config"].items()) {
      for (const auto& [key, value] : body.items()) {
        config.set(section, key, value.get<std::string>());
      }
    }
    return config;
  }
  const std::string banner = std::string("# ") + kToolName + " ";
  if (text.rfind(banner, 0) == 0) {
    std::istringstream lines(text);
    std::string line, ini;
    std::getline(lines, line);  // banner
    while (std::getline(lines, line) && line.rfind("# ", 0) == 0) ini += line.substr(2) + "\n";
    return from_ini(ini);
  }
  return from_ini(text);
}

const std::string& RunConfig::get(const std::string& section, const std::string& key) const {
  return find(section, key).value;
}

bool RunConfig::is_empty(const std::string& section, const std::string& key) const {
  return get(section, key).empty();
}

double RunConfig::get_double(const std::string& section, const std::string& key) const {
  const std::string& text = get(section, key);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    throw InputError("configuration key '" + section + "." + key + "' is not a number: '" + text +
                     "'");
  }
  return value;
}

std::optional<double> RunConfig::get_optional_double(const std::string& section,
                                                     const std::string& key) const {
  if (is_empty(section, key)) return std::nullopt;
  return get_double(section, key);
}

std::int64_t RunConfig::get_int(const std::string& section, const std::string& key) const {
  const std::string& text = get(section, key);
  std::int64_t value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    throw InputError("configuration key '" + section + "." + key + "' is not an integer: '" +
                     text + "'");
  }
  return value;
}

std::uint64_t RunConfig::get_seed(const std::string& section, const std::string& key) const {
  const std::string& text = get(section, key);
  std::uint64_t value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    throw InputError("configuration key '" + section + "." + key + "' is not a seed: '" + text +
                     "'");
  }
  return value;
}

std::string RunConfig::to_ini(const std::vector<std::string>& sections) const {
  std::ostringstream out;
  std::string current;
  for (const Entry& e : entries_) {
    if (!sections.empty() &&
        std::find(sections.begin(), sections.end(), e.section) == sections.end()) {
      continue;
    }
    if (e.section != current) {
      out << "[" << e.section << "]\n";
      current = e.section;
    }
    out << e.key << " = " << e.value << "\n";
  }
  return out.str();
}

BranchCircuit RunConfig::device_circuit() const {
  const std::string& mode = get("device", "mode");
  const double ls = get_double("device", "Ls_nH");
  const double lr = get_double("device", "Lr_nH");
  const double cr = get_double("device", "Cr_fF");
  const double cj = get_double("device", "CJ_fF");
  const double ej = get_double("device", "EJ_GHz");
  if (mode == "effective") {
    return symmetric_circuit(get_double("device", "Lq_eff_nH"), ls, lr, cr, cj, ej);
  }
  if (mode == "branch") {
    BranchCircuit c{get_double("device", "L1_nH"), get_double("device", "L2_nH"),
                    get_double("device", "L3_nH"), ls, lr, cr, cj, ej};
    c.validate();
    return c;
  }
  throw InputError("device.mode must be 'effective' or 'branch', got '" + mode + "'");
}

EffectiveFluxonium RunConfig::device() const { return reduce_circuit(device_circuit()); }

LoopGeometry RunConfig::geometry() const {
  LoopGeometry g{get_double("geometry", "outer_area_m2"), get_double("geometry", "wire_length_m"),
                 get_double("geometry", "grain_size_m")};
  g.validate();
  return g;
}

FockBasis RunConfig::basis() const {
  FockBasis b{static_cast<int>(get_int("basis", "m_qubit")),
              static_cast<int>(get_int("basis", "n_res"))};
  b.validate();
  return b;
}

double RunConfig::overlap_threshold() const {
  const double t = get_double("tolerances", "overlap_threshold");
  if (!(t > 0.0 && t <= 1.0)) throw InputError("tolerances.overlap_threshold must lie in (0, 1]");
  return t;
}

unsigned RunConfig::threads() const {
  const std::int64_t t = get_int("run", "threads");
  if (t < 0) throw InputError("run.threads must be non-negative");
  return static_cast<unsigned>(t);
}

JunctionArrayModel RunConfig::junction_array() const {
  JunctionArrayModel model;
  const auto n = get_optional_double("dynamics", "n_junctions");
  const LoopGeometry g = geometry();
  model.n_junctions = n ? *n : static_cast<double>(effective_junction_count(g.wire_length_m, g.grain_size_m));
  model.ej_grain_ghz = get_double("dynamics", "ej_grain_GHz");
  model.ec_grain_ghz = get_double("dynamics", "ec_grain_GHz");
  model.validate();
  return model;
}

}  // namespace gradflux
