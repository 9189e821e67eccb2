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

// File formats. Every writer embeds the resolved configuration and the tool
// version: CSV files carry it as a leading block of "# " lines, JSON files
// as the "config" object. The [run] section is left out. Numbers use the
// shortest round-trip form so a rerun with the embedded configuration
// reproduces files byte for byte.

#include <span>
#include <string>
#include <vector>

#include "gradflux/config.hpp"
#include "gradflux/curve_fit.hpp"
#include "gradflux/dynamics.hpp"
#include "gradflux/spectrum.hpp"
#include "gradflux/spectrum_fit.hpp"
#include "json.hpp"

namespace gradflux::io {

using Json = nlohmann::ordered_json;

/// Shortest decimal that parses back to the same double; "nan", "inf",
/// "-inf" for non-finite values.
std::string format_number(double value);

/// "# gradflux <version>" followed by the configuration as "# " lines.
std::string config_banner(const RunConfig& config);

/// {"tool", "version", "config"} header shared by all JSON outputs.
Json json_header(const RunConfig& config);

/// Header row plus data rows; '#' lines and blank lines are skipped.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of a header column; InputError when absent.
  std::size_t column(const std::string& name) const;
};

CsvTable parse_csv(const std::string& text, const std::string& origin = "input");
std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

/// Parses a number cell; InputError naming the origin when malformed.
double parse_number(const std::string& cell, const std::string& origin);

// Spectroscopy: field_or_flux, unit, transition, freq_GHz, sigma_GHz. The
// unit column is "T" or "Phi0"; an empty sigma means 1 MHz.
SpectroscopyDataset parse_dataset(const std::string& text, const std::string& origin = "dataset");
std::string dataset_csv(const SpectroscopyDataset& data, const RunConfig& config);

// Flux sweep: flux_phi0, transition, freq_GHz, chi_MHz, valid. A row is
// valid when both the transition and the dispersive shift resolved.
std::string sweep_csv(std::span<const SweepPoint> points,
                      std::span<const TransitionSpec> transitions, const RunConfig& config);
Json sweep_json(std::span<const SweepPoint> points, std::span<const TransitionSpec> transitions,
                const EffectiveFluxonium& eff, const RunConfig& config);

Json fit_result_json(const FitResult& fit, const SpectroscopyDataset& data,
                     const RunConfig& config);

// Traces: CSV (t_s, value) with a JSON sidecar holding the units, noise
// scale and device label.
std::string trace_csv(const TimeTrace& trace, const RunConfig& config);
Json trace_sidecar(const TimeTrace& trace, const RunConfig& config);
/// Reads `path` and, when present, `path + ".json"`.
TimeTrace read_trace(const std::string& path);

// Event lists: t_s, direction, shift.
std::string events_csv(std::span<const JumpEvent> events, const RunConfig& config);
std::vector<double> read_event_times(const std::string& path);

Json dwell_json(const DwellStats& stats);

/// Two numeric columns taken in order; the header names are free.
DecayCurve parse_curve(const std::string& text, CurveModel model,
                       const std::string& origin = "curve");

}  // namespace gradflux::io
