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

// Fluxon escape: phase-slip rate of the granular superinductor modeled as a
// junction array, and statistics of parity-switching time traces.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gradflux/circuit.hpp"

namespace gradflux {

/// Bias (flux quanta in the outer loop) above which circulating currents
/// activate phase slips. Reported with the analysis output only; no barrier
/// suppression model is attached to it.
inline constexpr double kCurrentActivatedSlipBiasPhi0 = 130.0;

struct JunctionArrayModel {
  double n_junctions = 75e3;
  double ej_grain_ghz = 53e3;
  double ec_grain_ghz = 48.0;

  void validate() const;
};

struct PhaseSlipRate {
  double rate_hz = 0.0;
  double log10_rate_hz = 0.0;  // -inf when the rate is zero
  bool in_regime = true;       // EJ / EC >= 1
  std::string warning;
};

/// N (4 / sqrt(pi)) (8 EJ^3 EC)^(1/4) exp(-sqrt(8 EJ / EC)), with energies
/// given as frequencies so the result is directly in Hz. Evaluated in log
/// space.
PhaseSlipRate phase_slip_rate(const JunctionArrayModel& model);

/// round(wire_length / grain_size).
std::int64_t effective_junction_count(double wire_length_m, double grain_size_m);

struct TimeTrace {
  std::vector<double> t_s;
  std::vector<double> value;
  double noise_sigma = 0.0;
  std::string label;
  std::string value_unit = "arb";

  void validate() const;
};

struct TelegraphParams {
  double rate_even_to_odd_hz = 0.0;
  double rate_odd_to_even_hz = 0.0;
  double duration_s = 0.0;
  double dt_s = 1.0;
  double noise_sigma = 0.0;
  Parity initial = Parity::odd;
  double even_level = 0.0;
  double odd_level = 1.0;

  void validate() const;
};

struct JumpEvent {
  double t_s = 0.0;
  int direction = 0;  // +1 when the level rises
  std::size_t sample = 0;
  double shift = 0.0;
};

struct TelegraphSimulation {
  TimeTrace trace;
  std::vector<JumpEvent> planted;  // true switching times
};

/// Two-state Markov switching sampled every dt with Gaussian readout noise.
/// Reproducible for a given seed.
TelegraphSimulation simulate_telegraph(const TelegraphParams& params, std::uint64_t seed);

struct JumpDetectorOptions {
  double threshold_in_mads = 6.0;
  int window = 15;
};

/// Level shifts between rolling medians exceeding threshold x noise MAD,
/// where the noise MAD is median|x[i+1] - x[i]| / sqrt(2) (0.674 sigma for
/// Gaussian noise). Candidates are confirmed against the medians of the
/// full segments between neighbouring change points, and each event is
/// placed at the least-squares split between those levels.
std::vector<JumpEvent> detect_jumps(const TimeTrace& trace, const JumpDetectorOptions& options = {});

/// Robust per-sample noise estimate used by the detector (the MAD above).
double noise_mad(std::span<const double> values);

struct DwellStats {
  std::vector<double> dwells_s;
  std::vector<bool> censored;  // only the final dwell is censored
  double lambda_hz = 0.0;
  double ci_low_hz = 0.0;
  double ci_high_hz = 0.0;
  double confidence = 0.95;
  std::size_t n_events = 0;
  double censored_time_s = 0.0;
  double exposure_s = 0.0;

  /// Lifetime bound implied by the upper rate limit.
  double lifetime_lower_bound_s() const noexcept { return 1.0 / ci_high_hz; }
};

/// Rate = completed dwells / total observed time. Exact Poisson interval for
/// n > 0; for n = 0 the one-sided upper limit -ln(1 - confidence) / T.
DwellStats estimate_lifetime(std::span<const double> event_times_s, double t_start_s,
                             double t_end_s, double confidence = 0.95);

/// How many Poisson standard deviations the observed event count lies below
/// the count expected at `reference_rate_hz`.
double regime_separation_sigma(const DwellStats& observed, double reference_rate_hz);

struct CoincidencePair {
  std::size_t first = 0;
  std::size_t second = 0;
  std::size_t count = 0;      // events of `first` with a partner in `second`
  double expected = 0.0;      // 2 lambda1 lambda2 window T
  double excess_ratio = 0.0;  // count / expected
};

struct CoincidenceReport {
  std::vector<CoincidencePair> pairs;
  std::size_t total_count = 0;
  double total_expected = 0.0;
  double excess_ratio = 0.0;
};

CoincidenceReport coincidence_analysis(std::span<const std::vector<double>> event_times_s,
                                       double window_s, double span_s);

}  // namespace gradflux
