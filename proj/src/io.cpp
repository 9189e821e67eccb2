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

#include "gradflux/io.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "gradflux/errors.hpp"

namespace gradflux::io {
namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

Json number_or_null(const std::optional<double>& value) {
  if (!value || !std::isfinite(*value)) return nullptr;
  return *value;
}

// Execution settings such as the thread count do not change results and are
// left out of the embedded configuration.
bool embedded(const std::string& section) { return section != "run"; }

std::vector<std::string> embedded_sections(const RunConfig& config) {
  std::vector<std::string> sections;
  for (const auto& e : config.entries()) {
    if (embedded(e.section) && (sections.empty() || sections.back() != e.section)) {
      sections.push_back(e.section);
    }
  }
  return sections;
}

}  // namespace

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buffer[64];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
  return std::string(buffer, ptr);
}

std::string config_banner(const RunConfig& config) {
  std::ostringstream out;
  out << "# " << kToolName << " " << kToolVersion << "\n";
  std::istringstream ini(config.to_ini(embedded_sections(config)));
  std::string line;
  while (std::getline(ini, line)) out << "# " << line << "\n";
  return out.str();
}

Json json_header(const RunConfig& config) {
  Json doc;
  doc["tool"] = kToolName;
  doc["version"] = kToolVersion;
  Json sections = Json::object();
  for (const auto& e : config.entries()) {
    if (embedded(e.section)) sections[e.section][e.key] = e.value;
  }
  doc["config"] = std::move(sections);
  return doc;
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw InputError("missing CSV column '" + name + "'");
}

CsvTable parse_csv(const std::string& text, const std::string& origin) {
  CsvTable table;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    std::vector<std::string> cells = split(body);
    if (table.header.empty()) {
      table.header = std::move(cells);
      continue;
    }
    if (cells.size() != table.header.size()) {
      throw InputError(origin + ":" + std::to_string(line_no) + ": expected " +
                       std::to_string(table.header.size()) + " columns, found " +
                       std::to_string(cells.size()));
    }
    table.rows.push_back(std::move(cells));
  }
  if (table.header.empty()) throw InputError(origin + ": no CSV header");
  return table;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << contents;
  if (!out) throw InputError("failed writing '" + path + "'");
}

double parse_number(const std::string& cell, const std::string& origin) {
  std::string text = trim(cell);
  if (!text.empty() && text.front() == '+') text.erase(0, 1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    throw InputError(origin + ": '" + cell + "' is not a number");
  }
  return value;
}

SpectroscopyDataset parse_dataset(const std::string& text, const std::string& origin) {
  const CsvTable table = parse_csv(text, origin);
  const std::size_t cx = table.column("field_or_flux");
  const std::size_t cu = table.column("unit");
  const std::size_t ct = table.column("transition");
  const std::size_t cf = table.column("freq_GHz");
  const std::size_t cs = table.column("sigma_GHz");
  SpectroscopyDataset data;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& r = table.rows[i];
    const std::string where = origin + " row " + std::to_string(i + 1);
    SpectroscopyRow row;
    row.x = parse_number(r[cx], where);
    if (r[cu] == "T") {
      row.unit = AxisUnit::tesla;
    } else if (r[cu] == "Phi0") {
      row.unit = AxisUnit::phi0;
    } else {
      throw InputError(where + ": unit must be 'T' or 'Phi0', got '" + r[cu] + "'");
    }
    if (r[ct] == "f01") {
      row.transition = QubitTransition::f01;
    } else if (r[ct] == "f02") {
      row.transition = QubitTransition::f02;
    } else {
      throw InputError(where + ": transition must be f01 or f02, got '" + r[ct] + "'");
    }
    row.freq_ghz = parse_number(r[cf], where);
    row.sigma_ghz = r[cs].empty() ? kDefaultFrequencySigmaGhz : parse_number(r[cs], where);
    data.rows.push_back(row);
  }
  return data;
}

std::string dataset_csv(const SpectroscopyDataset& data, const RunConfig& config) {
  std::ostringstream out;
  out << config_banner(config) << "field_or_flux,unit,transition,freq_GHz,sigma_GHz\n";
  for (const auto& row : data.rows) {
    out << format_number(row.x) << "," << (row.unit == AxisUnit::tesla ? "T" : "Phi0") << ","
        << to_string(row.transition) << "," << format_number(row.freq_ghz) << ","
        << format_number(row.sigma_ghz) << "\n";
  }
  return out.str();
}

std::string sweep_csv(std::span<const SweepPoint> points,
                      std::span<const TransitionSpec> transitions, const RunConfig& config) {
  std::ostringstream out;
  out << config_banner(config) << "flux_phi0,transition,freq_GHz,chi_MHz,valid\n";
  for (const SweepPoint& p : points) {
    for (std::size_t t = 0; t < transitions.size(); ++t) {
      const auto& f = p.freq_ghz[t];
      const double freq = f ? *f : std::nan("");
      const double chi = p.chi.valid ? p.chi.chi_mhz : std::nan("");
      const bool valid = p.error.empty() && f.has_value() && p.chi.valid;
      out << format_number(p.flux) << "," << transitions[t].name << "," << format_number(freq)
          << "," << format_number(chi) << "," << (valid ? 1 : 0) << "\n";
    }
  }
  return out.str();
}

Json sweep_json(std::span<const SweepPoint> points, std::span<const TransitionSpec> transitions,
                const EffectiveFluxonium& eff, const RunConfig& config) {
  Json doc = json_header(config);
  doc["effective_circuit"] = {{"Lq_eff_nH", eff.lq_nh},
                              {"Lr_eff_nH", eff.lr_nh},
                              {"Lrq_eff_nH", eff.coupled() ? Json(eff.lrq_nh) : Json(nullptr)},
                              {"CJ_fF", eff.cj_ff},
                              {"Cr_fF", eff.cr_ff},
                              {"EJ_GHz", eff.ej_ghz},
                              {"alpha", eff.alpha}};
  Json names = Json::array();
  for (const auto& t : transitions) {
    names.push_back({{"name", t.name}, {"from", t.from.to_string()}, {"to", t.to.to_string()}});
  }
  doc["transitions"] = std::move(names);
  Json rows = Json::array();
  for (const SweepPoint& p : points) {
    Json row;
    row["flux_phi0"] = p.flux;
    Json freqs = Json::object();
    for (std::size_t t = 0; t < transitions.size(); ++t) {
      freqs[transitions[t].name] = number_or_null(p.freq_ghz[t]);
    }
    row["freq_GHz"] = std::move(freqs);
    row["chi_MHz"] = p.chi.valid ? Json(p.chi.chi_mhz) : Json(nullptr);
    row["chi_valid"] = p.chi.valid;
    row["min_confidence"] = p.chi.min_confidence;
    if (!p.chi.reason.empty()) row["excluded_because"] = p.chi.reason;
    if (!p.error.empty()) row["error"] = p.error;
    rows.push_back(std::move(row));
  }
  doc["points"] = std::move(rows);
  return doc;
}

Json fit_result_json(const FitResult& fit, const SpectroscopyDataset& data,
                     const RunConfig& config) {
  Json doc = json_header(config);
  doc["forward_model"] = to_string(fit.model);
  doc["params"] = {{"Lq_eff_nH", fit.params.lq_nh},
                   {"CJ_fF", fit.params.cj_ff},
                   {"EJ_GHz", fit.params.ej_ghz}};
  if (fit.axis) {
    doc["field_axis"] = {{"scale_phi0_per_T", fit.axis->scale_phi0_per_tesla},
                         {"offset_phi0", fit.axis->offset_phi0}};
  }
  Json params = Json::array();
  for (std::size_t i = 0; i < fit.param_names.size(); ++i) {
    params.push_back({{"name", fit.param_names[i]},
                      {"value", fit.param_values[i]},
                      {"sensitivity", number_or_null(fit.sensitivity[i])},
                      {"std_error", number_or_null(fit.std_error[i])}});
  }
  doc["parameters"] = std::move(params);
  doc["chi2"] = fit.chi2;
  doc["rms_residual_GHz"] = fit.rms_residual_ghz;
  doc["converged"] = fit.converged;
  Json residuals = Json::array();
  for (std::size_t i = 0; i < data.rows.size() && i < fit.model_ghz.size(); ++i) {
    const auto& r = data.rows[i];
    residuals.push_back({{"field_or_flux", r.x},
                         {"unit", r.unit == AxisUnit::tesla ? "T" : "Phi0"},
                         {"transition", to_string(r.transition)},
                         {"freq_GHz", r.freq_ghz},
                         {"sigma_GHz", r.sigma_ghz},
                         {"model_GHz", fit.model_ghz[i]},
                         {"residual_GHz", fit.residual_ghz[i]}});
  }
  doc["residuals"] = std::move(residuals);
  Json starts = Json::array();
  for (const auto& s : fit.starts) {
    starts.push_back({{"start", s.start},
                      {"objective", s.objective},
                      {"iterations", s.iterations},
                      {"converged", s.converged}});
  }
  doc["convergence_log"] = {{"best_start", fit.best_start},
                            {"iterations", fit.iterations},
                            {"evaluations", fit.evaluations},
                            {"objective_history", fit.objective_history},
                            {"starts", std::move(starts)}};
  return doc;
}

std::string trace_csv(const TimeTrace& trace, const RunConfig& config) {
  std::ostringstream out;
  out << config_banner(config) << "t_s,value\n";
  for (std::size_t i = 0; i < trace.t_s.size(); ++i) {
    out << format_number(trace.t_s[i]) << "," << format_number(trace.value[i]) << "\n";
  }
  return out.str();
}

Json trace_sidecar(const TimeTrace& trace, const RunConfig& config) {
  Json doc = json_header(config);
  doc["units"] = {{"t", "s"}, {"value", trace.value_unit}};
  doc["noise_sigma"] = trace.noise_sigma;
  doc["label"] = trace.label;
  doc["samples"] = trace.t_s.size();
  return doc;
}

TimeTrace read_trace(const std::string& path) {
  const CsvTable table = parse_csv(read_file(path), path);
  const std::size_t ct = table.column("t_s");
  const std::size_t cv = table.column("value");
  TimeTrace trace;
  trace.t_s.reserve(table.rows.size());
  trace.value.reserve(table.rows.size());
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const std::string where = path + " row " + std::to_string(i + 1);
    trace.t_s.push_back(parse_number(table.rows[i][ct], where));
    trace.value.push_back(parse_number(table.rows[i][cv], where));
  }
  const std::string sidecar = path + ".json";
  if (std::filesystem::exists(sidecar)) {
    try {
      const auto doc = nlohmann::json::parse(read_file(sidecar));
      trace.noise_sigma = doc.value("noise_sigma", 0.0);
      trace.label = doc.value("label", std::string());
      if (doc.contains("units")) trace.value_unit = doc["units"].value("value", trace.value_unit);
    } catch (const nlohmann::json::exception& ex) {
      throw InputError("malformed trace sidecar '" + sidecar + "': " + ex.what());
    }
  }
  trace.validate();
  return trace;
}

std::string events_csv(std::span<const JumpEvent> events, const RunConfig& config) {
  std::ostringstream out;
  out << config_banner(config) << "t_s,direction,shift\n";
  for (const JumpEvent& e : events) {
    out << format_number(e.t_s) << "," << e.direction << "," << format_number(e.shift) << "\n";
  }
  return out.str();
}

std::vector<double> read_event_times(const std::string& path) {
  const CsvTable table = parse_csv(read_file(path), path);
  const std::size_t ct = table.column("t_s");
  std::vector<double> times;
  times.reserve(table.rows.size());
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    times.push_back(parse_number(table.rows[i][ct], path + " row " + std::to_string(i + 1)));
    if (i > 0 && times[i] < times[i - 1]) throw InputError(path + ": event times must be sorted");
  }
  return times;
}

Json dwell_json(const DwellStats& stats) {
  return {{"lambda_hz", stats.lambda_hz},
          {"ci_low", stats.ci_low_hz},
          {"ci_high", stats.ci_high_hz},
          {"confidence", stats.confidence},
          {"n_events", stats.n_events},
          {"censored_time_s", stats.censored_time_s},
          {"exposure_s", stats.exposure_s},
          {"lifetime_lower_bound_s", stats.lifetime_lower_bound_s()},
          {"dwells_s", stats.dwells_s}};
}

DecayCurve parse_curve(const std::string& text, CurveModel model, const std::string& origin) {
  const CsvTable table = parse_csv(text, origin);
  if (table.header.size() != 2) throw InputError(origin + ": expected two columns");
  DecayCurve curve;
  curve.model = model;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const std::string where = origin + " row " + std::to_string(i + 1);
    curve.t.push_back(parse_number(table.rows[i][0], where));
    curve.y.push_back(parse_number(table.rows[i][1], where));
  }
  curve.validate();
  return curve;
}

}  // namespace gradflux::io
