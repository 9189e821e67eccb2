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

// gradflux command-line front end.
//
// Every subcommand option that changes a result is routed through the run
// configuration, so the configuration echoed into each output file is
// enough to reproduce it. Only file paths stay outside the configuration.
//
// Exit codes: 0 success, 1 numerical failure, 2 input or configuration error.

#include <cmath>
#include <deque>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gradflux/circuit.hpp"
#include "gradflux/config.hpp"
#include "gradflux/curve_fit.hpp"
#include "gradflux/dynamics.hpp"
#include "gradflux/errors.hpp"
#include "gradflux/io.hpp"
#include "gradflux/spectrum.hpp"
#include "gradflux/spectrum_fit.hpp"
#include "gradflux/units.hpp"

namespace gf = gradflux;
using gf::io::Json;

namespace {

struct Binding {
  std::string section;
  std::string key;
  std::string value;
  CLI::Option* option = nullptr;
};

struct Paths {
  std::string config;
  std::vector<std::string> assignments;
  std::string threads;
  std::string out;
  std::string json;
  std::string data;
  std::string trace;
  std::string events_out;
  std::vector<std::string> events;
  bool strict = false;
};

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    gf::io::write_file(path, text);
  }
}

std::string dump(const Json& doc) { return doc.dump(2) + "\n"; }

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    const auto a = item.find_first_not_of(" \t");
    const auto b = item.find_last_not_of(" \t");
    if (a != std::string::npos) items.push_back(item.substr(a, b - a + 1));
  }
  return items;
}

// "25x15,40x20" -> ladder of Fock bases.
std::vector<gf::FockBasis> parse_ladder(const std::string& text) {
  std::vector<gf::FockBasis> ladder;
  for (const std::string& item : split_list(text)) {
    const auto x = item.find('x');
    if (x == std::string::npos) throw gf::InputError("chi.ladder entries look like 25x15, got '" + item + "'");
    gf::FockBasis b{static_cast<int>(gf::io::parse_number(item.substr(0, x), "chi.ladder")),
                    static_cast<int>(gf::io::parse_number(item.substr(x + 1), "chi.ladder"))};
    b.validate();
    ladder.push_back(b);
  }
  return ladder;
}

gf::Parity parse_parity(const std::string& text) {
  if (text == "even") return gf::Parity::even;
  if (text == "odd") return gf::Parity::odd;
  throw gf::InputError("trace.initial_parity must be 'even' or 'odd', got '" + text + "'");
}

Json circuit_json(const gf::BranchCircuit& c, const gf::EffectiveFluxonium& eff) {
  return {{"branch",
           {{"L1_nH", c.l1_nh}, {"L2_nH", c.l2_nh}, {"L3_nH", c.l3_nh}, {"Ls_nH", c.ls_nh},
            {"Lr_nH", c.lr_nh}, {"Cr_fF", c.cr_ff}, {"CJ_fF", c.cj_ff}, {"EJ_GHz", c.ej_ghz}}},
          {"effective",
           {{"Lq_eff_nH", eff.lq_nh},
            {"Lr_eff_nH", eff.lr_nh},
            {"Lrq_eff_nH", eff.coupled() ? Json(eff.lrq_nh) : Json(nullptr)},
            {"alpha", eff.alpha}}}};
}

Json optional_number(double value) { return std::isfinite(value) ? Json(value) : Json(nullptr); }

// ---------------------------------------------------------------- commands

int cmd_sweep(const gf::RunConfig& cfg, const Paths& paths) {
  const gf::EffectiveFluxonium eff = cfg.device();
  const gf::FockBasis basis = cfg.basis();
  const double start = cfg.get_double("sweep", "flux_start_phi0");
  const double stop = cfg.get_double("sweep", "flux_stop_phi0");
  const std::int64_t n = cfg.get_int("sweep", "points");
  if (n < 1) throw gf::InputError("sweep.points must be at least 1");
  std::vector<double> grid(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) {
    grid[i] = n == 1 ? start : start + (stop - start) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  std::vector<gf::TransitionSpec> transitions;
  for (const auto& name : split_list(cfg.get("sweep", "transitions"))) {
    transitions.push_back(gf::TransitionSpec::parse(name));
  }
  if (transitions.empty()) throw gf::InputError("sweep.transitions is empty");

  const auto points = gf::flux_sweep(eff, grid, basis, transitions,
                                     {cfg.overlap_threshold(), cfg.threads()});
  emit(paths.out, gf::io::sweep_csv(points, transitions, cfg));
  if (!paths.json.empty()) {
    gf::io::write_file(paths.json, dump(gf::io::sweep_json(points, transitions, eff, cfg)));
  }
  std::size_t failed = 0;
  for (const auto& p : points) {
    if (!p.error.empty()) {
      ++failed;
      std::cerr << "gradflux: sweep point " << gf::io::format_number(p.flux) << ": " << p.error << "\n";
    }
  }
  return paths.strict && failed > 0 ? 1 : 0;
}

int cmd_chi(const gf::RunConfig& cfg, const Paths& paths) {
  const gf::BranchCircuit circuit = cfg.device_circuit();
  const gf::EffectiveFluxonium eff = gf::reduce_circuit(circuit);
  const gf::FockBasis basis = cfg.basis();
  const double phi = cfg.get_double("chi", "flux_phi0");
  const double threshold = cfg.overlap_threshold();

  Json doc = gf::io::json_header(cfg);
  doc["circuit"] = circuit_json(circuit, eff);
  doc["flux_phi0"] = phi;
  doc["basis"] = {{"m_qubit", basis.m_qubit}, {"n_res", basis.n_res}};

  const gf::SpectrumResult spectrum = gf::diagonalize_labeled(gf::build_hamiltonian(eff, phi, basis));
  const gf::DispersiveShiftResult chi = gf::dispersive_shift(spectrum, phi, threshold);
  doc["chi_MHz"] = chi.valid ? Json(chi.chi_mhz) : Json(nullptr);
  doc["valid"] = chi.valid;
  doc["min_confidence"] = chi.min_confidence;
  if (!chi.reason.empty()) doc["excluded_because"] = chi.reason;
  for (const char* name : {"f01", "fr"}) {
    const auto t = gf::TransitionSpec::parse(name);
    try {
      doc[std::string(name) + "_GHz"] = gf::transition_frequency(spectrum, t.from, t.to, threshold);
    } catch (const gf::UnresolvedLabelError&) {
      doc[std::string(name) + "_GHz"] = nullptr;
    }
  }

  const auto ladder = parse_ladder(cfg.get("chi", "ladder"));
  if (!ladder.empty()) {
    Json rows = Json::array();
    for (const auto& r : gf::convergence_report(eff, phi, ladder, threshold)) {
      rows.push_back({{"m_qubit", r.basis.m_qubit},
                      {"n_res", r.basis.n_res},
                      {"dimension", r.basis.dimension()},
                      {"f01_GHz", r.f01_ghz},
                      {"chi_MHz", optional_number(r.chi_mhz)},
                      {"delta_f01_GHz", r.delta_f01_ghz ? Json(*r.delta_f01_ghz) : Json(nullptr)},
                      {"delta_chi_MHz", r.delta_chi_mhz ? optional_number(*r.delta_chi_mhz) : Json(nullptr)}});
    }
    doc["convergence"] = std::move(rows);
  }

  if (const auto measured = cfg.get_optional_double("chi", "measured_chi_MHz")) {
    gf::SharedInductanceProblem problem;
    problem.lq_eff_nh = eff.lq_nh;
    problem.cj_ff = circuit.cj_ff;
    problem.ej_ghz = circuit.ej_ghz;
    problem.lr_nh = circuit.lr_nh;
    problem.cr_ff = circuit.cr_ff;
    problem.basis = basis;
    problem.phi_eff = phi;
    problem.bracket_nh = {cfg.get_double("chi", "ls_min_nH"), cfg.get_double("chi", "ls_max_nH")};
    const auto fit = gf::fit_shared_inductance(*measured, problem);
    doc["shared_inductance"] = {{"measured_chi_MHz", *measured},
                                {"Ls_nH", fit.ls_nh},
                                {"chi_model_MHz", fit.chi_model_mhz},
                                {"evaluations", fit.evaluations}};
  }
  emit(paths.out, dump(doc));
  return chi.valid ? 0 : 1;
}

int cmd_fit(const gf::RunConfig& cfg, const Paths& paths) {
  const gf::SpectroscopyDataset data = gf::io::parse_dataset(gf::io::read_file(paths.data), paths.data);
  gf::FitBounds bounds;
  bounds.lq_nh = {cfg.get_double("fit", "Lq_min_nH"), cfg.get_double("fit", "Lq_max_nH")};
  bounds.cj_ff = {cfg.get_double("fit", "CJ_min_fF"), cfg.get_double("fit", "CJ_max_fF")};
  bounds.ej_ghz = {cfg.get_double("fit", "EJ_min_GHz"), cfg.get_double("fit", "EJ_max_GHz")};
  bounds.field_scale = {cfg.get_double("fit", "field_scale_min_phi0_per_T"),
                        cfg.get_double("fit", "field_scale_max_phi0_per_T")};
  bounds.field_offset = {cfg.get_double("fit", "field_offset_min_phi0"),
                         cfg.get_double("fit", "field_offset_max_phi0")};

  gf::FitOptions options;
  const std::string& model = cfg.get("fit", "forward_model");
  if (model == "qubit_only") {
    options.model = gf::ForwardModel::qubit_only;
  } else if (model == "coupled") {
    options.model = gf::ForwardModel::coupled;
  } else {
    throw gf::InputError("fit.forward_model must be 'qubit_only' or 'coupled', got '" + model + "'");
  }
  options.readout = {cfg.get_double("device", "Lr_nH"), cfg.get_double("device", "Cr_fF"),
                     cfg.get_double("device", "Ls_nH")};
  options.basis = {cfg.basis().m_qubit, static_cast<int>(cfg.get_int("fit", "coupled_n_res"))};
  options.starts = static_cast<int>(cfg.get_int("fit", "starts"));
  options.seed = cfg.get_seed("fit", "seed");
  options.max_iterations = static_cast<int>(cfg.get_int("fit", "max_iterations"));
  options.threads = cfg.threads();
  if (const auto scale = cfg.get_optional_double("fit", "pinned_field_scale_phi0_per_T")) {
    options.pinned_axis = gf::FieldAxis{*scale, cfg.get_double("fit", "pinned_field_offset_phi0")};
  }

  try {
    const gf::FitResult fit = gf::fit_spectrum(data, std::nullopt, bounds, options);
    emit(paths.out, dump(gf::io::fit_result_json(fit, data, cfg)));
    return 0;
  } catch (const gf::FitConvergenceError& ex) {
    emit(paths.out, dump(gf::io::fit_result_json(ex.best_so_far(), data, cfg)));
    throw;
  }
}

int cmd_phaseslip(const gf::RunConfig& cfg, const Paths& paths) {
  const gf::JunctionArrayModel model = cfg.junction_array();
  const gf::PhaseSlipRate rate = gf::phase_slip_rate(model);
  Json doc = gf::io::json_header(cfg);
  doc["n_junctions"] = model.n_junctions;
  doc["ej_grain_GHz"] = model.ej_grain_ghz;
  doc["ec_grain_GHz"] = model.ec_grain_ghz;
  doc["rate_Hz"] = rate.rate_hz;
  doc["log10_rate_Hz"] = optional_number(rate.log10_rate_hz);
  doc["in_regime"] = rate.in_regime;
  if (!rate.warning.empty()) doc["warning"] = rate.warning;
  doc["current_activated_bias_phi0"] = gf::kCurrentActivatedSlipBiasPhi0;
  if (!rate.warning.empty()) std::cerr << "gradflux: warning: " << rate.warning << "\n";
  emit(paths.out, dump(doc));
  return 0;
}

int cmd_junctions(const gf::RunConfig& cfg, const Paths& paths) {
  const gf::LoopGeometry g = cfg.geometry();
  Json doc = gf::io::json_header(cfg);
  doc["wire_length_m"] = g.wire_length_m;
  doc["grain_size_m"] = g.grain_size_m;
  doc["n_junctions"] = gf::effective_junction_count(g.wire_length_m, g.grain_size_m);
  doc["outer_area_m2"] = g.outer_area_m2;
  doc["inner_area_m2"] = g.inner_area_m2();
  doc["field_period_T"] = gf::units::kFluxQuantum / g.outer_area_m2;
  if (const auto b = cfg.get_optional_double("geometry", "init_field_T")) {
    const gf::LoopFluxes fluxes = gf::flux_from_field(*b, g);
    const gf::TrappedFluxState state = gf::initialization_parity(*b, g);
    doc["initialization"] = {{"field_T", *b},
                             {"outer_flux_phi0", fluxes.outer},
                             {"inner_flux_phi0", fluxes.inner1},
                             {"n_fluxons", state.n_fluxons},
                             {"parity", gf::to_string(state.parity)},
                             {"phi_eff_locked_phi0", state.phi_eff_locked}};
  }
  emit(paths.out, dump(doc));
  return 0;
}

int cmd_simulate_trace(const gf::RunConfig& cfg, const Paths& paths) {
  gf::TelegraphParams params;
  params.rate_even_to_odd_hz = cfg.get_double("trace", "rate_even_to_odd_Hz");
  params.rate_odd_to_even_hz = cfg.get_double("trace", "rate_odd_to_even_Hz");
  params.duration_s = cfg.get_double("trace", "duration_s");
  params.dt_s = cfg.get_double("trace", "dt_s");
  params.noise_sigma = cfg.get_double("trace", "noise_sigma");
  params.initial = parse_parity(cfg.get("trace", "initial_parity"));
  params.even_level = cfg.get_double("trace", "even_level");
  params.odd_level = cfg.get_double("trace", "odd_level");
  gf::TelegraphSimulation sim = gf::simulate_telegraph(params, cfg.get_seed("trace", "seed"));
  sim.trace.label = cfg.get("trace", "label");
  emit(paths.out, gf::io::trace_csv(sim.trace, cfg));
  if (!paths.out.empty() && paths.out != "-") {
    gf::io::write_file(paths.out + ".json", dump(gf::io::trace_sidecar(sim.trace, cfg)));
  }
  if (!paths.events_out.empty()) {
    gf::io::write_file(paths.events_out, gf::io::events_csv(sim.planted, cfg));
  }
  return 0;
}

int cmd_analyze_trace(const gf::RunConfig& cfg, const Paths& paths) {
  const gf::TimeTrace trace = gf::io::read_trace(paths.trace);
  if (trace.t_s.size() < 2) throw gf::InputError(paths.trace + ": trace needs at least two samples");
  gf::JumpDetectorOptions options;
  options.threshold_in_mads = cfg.get_double("detector", "threshold_mads");
  options.window = static_cast<int>(cfg.get_int("detector", "window"));
  const auto events = gf::detect_jumps(trace, options);
  std::vector<double> times;
  for (const auto& e : events) times.push_back(e.t_s);
  const gf::DwellStats stats = gf::estimate_lifetime(times, trace.t_s.front(), trace.t_s.back(),
                                                     cfg.get_double("lifetime", "confidence"));
  Json doc = gf::io::json_header(cfg);
  doc["trace"] = {{"path", paths.trace},
                  {"label", trace.label},
                  {"samples", trace.t_s.size()},
                  {"span_s", trace.t_s.back() - trace.t_s.front()}};
  doc["noise_mad"] = gf::noise_mad(trace.value);
  Json list = Json::array();
  for (const auto& e : events) {
    list.push_back({{"t_s", e.t_s}, {"direction", e.direction}, {"shift", e.shift}});
  }
  doc["events"] = std::move(list);
  doc["dwell_stats"] = gf::io::dwell_json(stats);
  if (const auto ref = cfg.get_optional_double("lifetime", "reference_rate_Hz")) {
    doc["reference_rate_Hz"] = *ref;
    doc["separation_sigma"] = gf::regime_separation_sigma(stats, *ref);
  }
  doc["current_activated_bias_phi0"] = gf::kCurrentActivatedSlipBiasPhi0;
  emit(paths.out, dump(doc));
  if (!paths.events_out.empty()) gf::io::write_file(paths.events_out, gf::io::events_csv(events, cfg));
  return 0;
}

int cmd_coincidence(const gf::RunConfig& cfg, const Paths& paths) {
  if (paths.events.size() < 2) throw gf::InputError("coincidence needs at least two event lists");
  std::vector<std::vector<double>> lists;
  for (const auto& path : paths.events) lists.push_back(gf::io::read_event_times(path));
  const auto span = cfg.get_optional_double("coincidence", "span_s");
  if (!span) throw gf::InputError("coincidence.span_s (--span) is required");
  const double window = cfg.get_double("coincidence", "window_s");
  const gf::CoincidenceReport report = gf::coincidence_analysis(lists, window, *span);
  Json doc = gf::io::json_header(cfg);
  doc["event_lists"] = paths.events;
  Json pairs = Json::array();
  for (const auto& p : report.pairs) {
    pairs.push_back({{"first", p.first},
                     {"second", p.second},
                     {"count", p.count},
                     {"expected", p.expected},
                     {"excess_ratio", optional_number(p.excess_ratio)}});
  }
  doc["pairs"] = std::move(pairs);
  doc["total_count"] = report.total_count;
  doc["total_expected"] = report.total_expected;
  doc["excess_ratio"] = optional_number(report.excess_ratio);
  emit(paths.out, dump(doc));
  return 0;
}

int cmd_decay_fit(const gf::RunConfig& cfg, const Paths& paths) {
  const gf::CurveModel model = gf::parse_curve_model(cfg.get("curve", "model"));
  if (model == gf::CurveModel::parabola) throw gf::InputError("use parabola-fit for curve.model = parabola");
  const gf::DecayCurve curve = gf::io::parse_curve(gf::io::read_file(paths.data), model, paths.data);
  const gf::DecayFit fit = gf::fit_decay(curve);
  Json doc = gf::io::json_header(cfg);
  doc["model"] = gf::to_string(fit.model);
  doc["amplitude"] = fit.amplitude;
  doc["time_constant"] = fit.time_constant;
  doc["time_constant_stderr"] = optional_number(fit.time_constant_stderr);
  doc["offset"] = fit.offset;
  if (model == gf::CurveModel::ramsey) {
    doc["detuning"] = fit.detuning;
    doc["phase_rad"] = fit.phase;
  }
  doc["rms_residual"] = fit.rms_residual;
  doc["iterations"] = fit.iterations;
  doc["time_unit"] = "same as input column 1";
  emit(paths.out, dump(doc));
  return 0;
}

int cmd_parabola_fit(const gf::RunConfig& cfg, const Paths& paths) {
  const gf::DecayCurve curve =
      gf::io::parse_curve(gf::io::read_file(paths.data), gf::CurveModel::parabola, paths.data);
  const gf::ParabolaFit fit = gf::fit_parabola(curve);
  Json doc = gf::io::json_header(cfg);
  doc["f_max"] = fit.f_max;
  doc["b_offset"] = fit.b_offset;
  doc["curvature"] = fit.curvature;
  doc["curvature_clamped"] = fit.curvature_clamped;
  doc["rms_residual"] = fit.rms_residual;
  doc["units"] = "f in input column 2 units, B in input column 1 units";
  emit(paths.out, dump(doc));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gradflux: gradiometric fluxonium modelling and fluxon-escape statistics"};
  app.set_version_flag("--version", std::string(gf::kToolName) + " " + gf::kToolVersion);
  app.require_subcommand(1);
  app.fallthrough();

  Paths paths;
  app.add_option("--config", paths.config,
                 "INI configuration, or an output file of this tool to rerun");
  app.add_option("--set", paths.assignments, "Override a configuration key: section.key=value");
  app.add_option("--threads", paths.threads, "Worker threads (0 = hardware concurrency)");

  std::deque<Binding> bindings;
  auto bind = [&](CLI::App* sub, const std::string& flag, const std::string& section,
                  const std::string& key, const std::string& help) {
    Binding& b = bindings.emplace_back();
    b.section = section;
    b.key = key;
    b.option = sub->add_option(flag, b.value, help + " [" + section + "." + key + "]");
  };
  auto out_option = [&](CLI::App* sub, const std::string& help) {
    sub->add_option("-o,--out", paths.out, help);
  };

  std::vector<std::pair<CLI::App*, int (*)(const gf::RunConfig&, const Paths&)>> commands;

  auto* sweep = app.add_subcommand("sweep", "Transition frequencies and dispersive shift versus flux");
  bind(sweep, "--start", "sweep", "flux_start_phi0", "First flux point [Phi0]");
  bind(sweep, "--stop", "sweep", "flux_stop_phi0", "Last flux point [Phi0]");
  bind(sweep, "--points", "sweep", "points", "Number of flux points");
  bind(sweep, "--transitions", "sweep", "transitions", "Comma list: f01, f02, f12, fr, n:m->n:m");
  out_option(sweep, "CSV output (default stdout)");
  sweep->add_option("--json", paths.json, "JSON mirror with metadata");
  sweep->add_flag("--strict", paths.strict, "Exit 1 when any flux point fails");
  commands.emplace_back(sweep, cmd_sweep);

  auto* fit = app.add_subcommand("fit", "Fit effective circuit parameters to spectroscopy data");
  fit->add_option("--data", paths.data, "Dataset CSV")->required();
  bind(fit, "--model", "fit", "forward_model", "qubit_only or coupled");
  bind(fit, "--starts", "fit", "starts", "Multi-start budget");
  bind(fit, "--seed", "fit", "seed", "Seed for the start sampler");
  bind(fit, "--pin-field-scale", "fit", "pinned_field_scale_phi0_per_T", "Pin the field scale [Phi0/T]");
  bind(fit, "--pin-field-offset", "fit", "pinned_field_offset_phi0", "Pinned field offset [Phi0]");
  out_option(fit, "JSON output (default stdout)");
  commands.emplace_back(fit, cmd_fit);

  auto* chi = app.add_subcommand("chi", "Dispersive shift, convergence ladder, shared inductance");
  bind(chi, "--flux", "chi", "flux_phi0", "Effective flux [Phi0]");
  bind(chi, "--ladder", "chi", "ladder", "Basis ladder, e.g. 25x15,40x20,50x40");
  bind(chi, "--measured-MHz", "chi", "measured_chi_MHz", "Measured chi to invert for Ls [MHz]");
  out_option(chi, "JSON output (default stdout)");
  commands.emplace_back(chi, cmd_chi);

  auto* slip = app.add_subcommand("phaseslip", "Phase-slip rate of the junction-array wire");
  bind(slip, "--n-junctions", "dynamics", "n_junctions", "Effective junction count");
  bind(slip, "--ej", "dynamics", "ej_grain_GHz", "Grain Josephson energy [GHz]");
  bind(slip, "--ec", "dynamics", "ec_grain_GHz", "Grain charging energy [GHz]");
  out_option(slip, "JSON output (default stdout)");
  commands.emplace_back(slip, cmd_phaseslip);

  auto* junctions = app.add_subcommand("junctions", "Effective junction count and loop geometry");
  bind(junctions, "--wire-length", "geometry", "wire_length_m", "Wire length [m]");
  bind(junctions, "--grain-size", "geometry", "grain_size_m", "Grain size [m]");
  bind(junctions, "--area", "geometry", "outer_area_m2", "Outer loop area [m^2]");
  bind(junctions, "--init-field", "geometry", "init_field_T", "Cool-down field [T]");
  out_option(junctions, "JSON output (default stdout)");
  commands.emplace_back(junctions, cmd_junctions);

  auto* simulate = app.add_subcommand("simulate-trace", "Synthetic parity telegraph trace");
  bind(simulate, "--rate-eo", "trace", "rate_even_to_odd_Hz", "Even to odd rate [Hz]");
  bind(simulate, "--rate-oe", "trace", "rate_odd_to_even_Hz", "Odd to even rate [Hz]");
  bind(simulate, "--duration", "trace", "duration_s", "Duration [s]");
  bind(simulate, "--dt", "trace", "dt_s", "Sample interval [s]");
  bind(simulate, "--noise", "trace", "noise_sigma", "Gaussian readout noise");
  bind(simulate, "--seed", "trace", "seed", "Random seed");
  bind(simulate, "--initial", "trace", "initial_parity", "even or odd");
  bind(simulate, "--label", "trace", "label", "Device label");
  out_option(simulate, "Trace CSV; the sidecar goes to <out>.json");
  simulate->add_option("--events-out", paths.events_out, "Planted switching events CSV");
  commands.emplace_back(simulate, cmd_simulate_trace);

  auto* analyze = app.add_subcommand("analyze-trace", "Detect jumps and estimate the fluxon lifetime");
  analyze->add_option("--trace", paths.trace, "Trace CSV (t_s,value)")->required();
  bind(analyze, "--threshold", "detector", "threshold_mads", "Detection threshold [noise MADs]");
  bind(analyze, "--window", "detector", "window", "Rolling median window [samples]");
  bind(analyze, "--confidence", "lifetime", "confidence", "Interval confidence level");
  bind(analyze, "--reference-rate", "lifetime", "reference_rate_Hz", "Rate to compare against [Hz]");
  out_option(analyze, "JSON output (default stdout)");
  analyze->add_option("--events-out", paths.events_out, "Detected events CSV");
  commands.emplace_back(analyze, cmd_analyze_trace);

  auto* coincidence = app.add_subcommand("coincidence", "Coincidences between event lists");
  coincidence->add_option("--events", paths.events, "Event CSV files (t_s column)")->required();
  bind(coincidence, "--window", "coincidence", "window_s", "Coincidence window [s]");
  bind(coincidence, "--span", "coincidence", "span_s", "Common observation span [s]");
  out_option(coincidence, "JSON output (default stdout)");
  commands.emplace_back(coincidence, cmd_coincidence);

  auto* decay = app.add_subcommand("decay-fit", "T1, Ramsey or echo fit of a two-column curve");
  decay->add_option("--data", paths.data, "Curve CSV (time, population)")->required();
  bind(decay, "--model", "curve", "model", "exponential, ramsey or echo");
  out_option(decay, "JSON output (default stdout)");
  commands.emplace_back(decay, cmd_decay_fit);

  auto* parabola = app.add_subcommand("parabola-fit", "Parabolic frequency shift versus field");
  parabola->add_option("--data", paths.data, "Curve CSV (field, frequency)")->required();
  out_option(parabola, "JSON output (default stdout)");
  commands.emplace_back(parabola, cmd_parabola_fit);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    gf::RunConfig cfg = paths.config.empty() ? gf::RunConfig() : gf::RunConfig::from_file(paths.config);
    for (const auto& a : paths.assignments) cfg.set_assignment(a);
    for (const auto& b : bindings) {
      if (b.option->count() > 0) cfg.set(b.section, b.key, b.value);
    }
    if (!paths.threads.empty()) cfg.set("run", "threads", paths.threads);
    cfg.threads();  // validate early
    for (const auto& [sub, run] : commands) {
      if (sub->parsed()) return run(cfg, paths);
    }
    return 2;
  } catch (const gf::InputError& ex) {
    std::cerr << "gradflux: error: " << ex.what() << "\n";
    return 2;
  } catch (const gf::NumericalError& ex) {
    std::cerr << "gradflux: numerical failure: " << ex.what() << "\n";
    return 1;
  } catch (const std::exception& ex) {
    std::cerr << "gradflux: failure: " << ex.what() << "\n";
    return 1;
  }
}
