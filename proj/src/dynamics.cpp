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

#include "gradflux/dynamics.hpp"

#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "gradflux/errors.hpp"

namespace gradflux {

void JunctionArrayModel::validate() const {
  if (!std::isfinite(n_junctions) || n_junctions < 0.0) {
    throw InputError("junction count must be finite and non-negative");
  }
  if (!std::isfinite(ej_grain_ghz) || ej_grain_ghz <= 0.0) {
    throw InputError("grain Josephson energy must be positive");
  }
  if (!std::isfinite(ec_grain_ghz) || ec_grain_ghz <= 0.0) {
    throw InputError("grain charging energy must be positive");
  }
}

PhaseSlipRate phase_slip_rate(const JunctionArrayModel& model) {
  model.validate();
  PhaseSlipRate out;
  const double ratio = model.ej_grain_ghz / model.ec_grain_ghz;
  if (ratio < 1.0) {
    out.in_regime = false;
    out.warning = "EJ/EC = " + std::to_string(ratio) +
                  " < 1: the array phase-slip formula is outside its regime of validity";
  }
  if (model.n_junctions == 0.0) {
    out.rate_hz = 0.0;
    out.log10_rate_hz = -std::numeric_limits<double>::infinity();
    return out;
  }
  const double ej = model.ej_grain_ghz;
  const double ec = model.ec_grain_ghz;
  // ln of the prefactor in Hz plus the (large, negative) tunneling exponent.
  const double log_rate = std::log(model.n_junctions) + std::log(4.0 / std::sqrt(std::numbers::pi)) +
                          0.25 * (std::log(8.0) + 3.0 * std::log(ej) + std::log(ec)) +
                          std::log(1e9) - std::sqrt(8.0 * ratio);
  out.log10_rate_hz = log_rate / std::numbers::ln10;
  out.rate_hz = std::exp(log_rate);
  return out;
}

std::int64_t effective_junction_count(double wire_length_m, double grain_size_m) {
  if (!(wire_length_m > 0.0) || !(grain_size_m > 0.0) || !std::isfinite(wire_length_m) ||
      !std::isfinite(grain_size_m)) {
    throw InputError("wire length and grain size must be positive");
  }
  return std::llround(wire_length_m / grain_size_m);
}

void TimeTrace::validate() const {
  if (t_s.size() != value.size()) throw InputError("trace has mismatched time / value lengths");
  for (std::size_t i = 0; i < t_s.size(); ++i) {
    if (!std::isfinite(t_s[i]) || !std::isfinite(value[i])) {
      throw InputError("trace has non-finite samples");
    }
    if (i > 0 && !(t_s[i] > t_s[i - 1])) throw InputError("trace time must be strictly increasing");
  }
}

void TelegraphParams::validate() const {
  if (!(rate_even_to_odd_hz >= 0.0) || !(rate_odd_to_even_hz >= 0.0) ||
      !std::isfinite(rate_even_to_odd_hz) || !std::isfinite(rate_odd_to_even_hz)) {
    throw InputError("switching rates must be finite and non-negative");
  }
  if (!(dt_s > 0.0) || !std::isfinite(dt_s)) throw InputError("dt must be positive");
  if (!(duration_s >= dt_s) || !std::isfinite(duration_s)) {
    throw InputError("duration must be at least one sample interval");
  }
  if (!(noise_sigma >= 0.0)) throw InputError("noise sigma must be non-negative");
}

TelegraphSimulation simulate_telegraph(const TelegraphParams& params, std::uint64_t seed) {
  params.validate();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  auto draw_dwell = [&](Parity state) {
    const double rate =
        state == Parity::even ? params.rate_even_to_odd_hz : params.rate_odd_to_even_hz;
    if (rate == 0.0) return std::numeric_limits<double>::infinity();
    return std::exponential_distribution<double>(rate)(rng);
  };
  auto level = [&](Parity state) {
    return state == Parity::even ? params.even_level : params.odd_level;
  };

  const auto last = static_cast<std::size_t>(std::floor(params.duration_s / params.dt_s + 1e-9));
  TelegraphSimulation out;
  out.trace.noise_sigma = params.noise_sigma;
  out.trace.t_s.reserve(last + 1);
  out.trace.value.reserve(last + 1);

  Parity state = params.initial;
  double next_switch = draw_dwell(state);
  for (std::size_t k = 0; k <= last; ++k) {
    const double t = static_cast<double>(k) * params.dt_s;
    while (next_switch <= t) {
      const Parity next = state == Parity::even ? Parity::odd : Parity::even;
      const double shift = level(next) - level(state);
      out.planted.push_back({next_switch, shift > 0.0 ? 1 : -1, k, shift});
      state = next;
      next_switch += draw_dwell(state);
    }
    double v = level(state);
    if (params.noise_sigma > 0.0) v += params.noise_sigma * noise(rng);
    out.trace.t_s.push_back(t);
    out.trace.value.push_back(v);
  }
  return out;
}

namespace {

double median_of(std::span<const double> values) {
  std::vector<double> copy(values.begin(), values.end());
  const std::size_t mid = copy.size() / 2;
  std::nth_element(copy.begin(), copy.begin() + static_cast<std::ptrdiff_t>(mid), copy.end());
  double upper = copy[mid];
  if (copy.size() % 2 == 1) return upper;
  const double lower = *std::max_element(copy.begin(), copy.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

}  // namespace

double noise_mad(std::span<const double> values) {
  if (values.size() < 2) return 0.0;
  std::vector<double> diffs(values.size() - 1);
  for (std::size_t i = 0; i + 1 < values.size(); ++i) diffs[i] = std::abs(values[i + 1] - values[i]);
  return median_of(diffs) / std::numbers::sqrt2;
}

std::vector<JumpEvent> detect_jumps(const TimeTrace& trace, const JumpDetectorOptions& options) {
  if (!(options.threshold_in_mads > 0.0)) throw InputError("jump threshold must be positive");
  if (options.window < 3) throw InputError("detector window must be at least 3 samples");
  trace.validate();
  const std::span<const double> x(trace.value);
  const std::size_t n = x.size();
  if (n < 10) throw InputError("jump detection needs at least 10 samples");

  const auto w = static_cast<std::size_t>(options.window);
  const double tau = options.threshold_in_mads * noise_mad(x);
  const std::size_t min_side = std::max<std::size_t>(2, w / 3);

  // Difference of forward and backward rolling medians at each split.
  std::vector<double> d(n, 0.0);
  for (std::size_t i = min_side; i + min_side <= n; ++i) {
    const std::size_t lo = i >= w ? i - w : 0;
    const std::size_t hi = std::min(n, i + w);
    d[i] = median_of(x.subspan(i, hi - i)) - median_of(x.subspan(lo, i - lo));
  }

  std::vector<std::size_t> cuts;
  for (std::size_t i = 0; i < n;) {
    if (std::abs(d[i]) <= tau) {
      ++i;
      continue;
    }
    std::size_t j = i, peak = i;
    const bool rising = d[i] > 0.0;
    while (j < n && std::abs(d[j]) > tau && (d[j] > 0.0) == rising) {
      if (std::abs(d[j]) > std::abs(d[peak])) peak = j;
      ++j;
    }
    cuts.push_back(peak);
    i = j;
  }

  auto segment_shifts = [&](const std::vector<std::size_t>& c) {
    std::vector<double> shifts(c.size());
    for (std::size_t q = 0; q < c.size(); ++q) {
      const std::size_t begin = q == 0 ? 0 : c[q - 1];
      const std::size_t end = q + 1 < c.size() ? c[q + 1] : n;
      shifts[q] = median_of(x.subspan(c[q], end - c[q])) - median_of(x.subspan(begin, c[q] - begin));
    }
    return shifts;
  };

  // Drop the weakest candidate until every level shift clears the threshold.
  while (!cuts.empty()) {
    const std::vector<double> shifts = segment_shifts(cuts);
    std::size_t weakest = 0;
    for (std::size_t q = 1; q < shifts.size(); ++q) {
      if (std::abs(shifts[q]) < std::abs(shifts[weakest])) weakest = q;
    }
    if (std::abs(shifts[weakest]) > tau) break;
    cuts.erase(cuts.begin() + static_cast<std::ptrdiff_t>(weakest));
  }

  std::vector<JumpEvent> events;
  events.reserve(cuts.size());
  for (std::size_t q = 0; q < cuts.size(); ++q) {
    const std::size_t begin = q == 0 ? 0 : cuts[q - 1];
    const std::size_t end = q + 1 < cuts.size() ? cuts[q + 1] : n;
    const std::size_t c = cuts[q];
    const double left = median_of(x.subspan(begin, c - begin));
    const double right = median_of(x.subspan(c, end - c));
    const std::size_t lo = std::max(begin + 1, c > w ? c - w : std::size_t{1});
    const std::size_t hi = std::min(end - 1, c + w);
    std::size_t best_split = c;
    double best_cost = std::numeric_limits<double>::infinity();
    for (std::size_t s = lo; s <= hi; ++s) {
      double cost = 0.0;
      for (std::size_t i = lo - 1; i < s; ++i) cost += (x[i] - left) * (x[i] - left);
      for (std::size_t i = s; i <= hi; ++i) cost += (x[i] - right) * (x[i] - right);
      if (cost < best_cost) {
        best_cost = cost;
        best_split = s;
      }
    }
    cuts[q] = best_split;
    events.push_back({trace.t_s[best_split], right > left ? 1 : -1, best_split, right - left});
  }
  return events;
}

DwellStats estimate_lifetime(std::span<const double> event_times_s, double t_start_s,
                             double t_end_s, double confidence) {
  if (!(t_end_s > t_start_s) || !std::isfinite(t_start_s) || !std::isfinite(t_end_s)) {
    throw InputError("trace span must be a finite, non-empty interval");
  }
  if (!(confidence > 0.0 && confidence < 1.0)) throw InputError("confidence must lie in (0, 1)");
  double previous = t_start_s;
  for (double t : event_times_s) {
    if (!std::isfinite(t) || t < previous || t > t_end_s) {
      throw InputError("events must be sorted and lie inside the trace span");
    }
    previous = t;
  }

  DwellStats out;
  out.confidence = confidence;
  out.n_events = event_times_s.size();
  out.exposure_s = t_end_s - t_start_s;
  double cursor = t_start_s;
  for (double t : event_times_s) {
    out.dwells_s.push_back(t - cursor);
    out.censored.push_back(false);
    cursor = t;
  }
  out.dwells_s.push_back(t_end_s - cursor);
  out.censored.push_back(true);
  out.censored_time_s = t_end_s - cursor;

  const double k = static_cast<double>(out.n_events);
  const double exposure = out.exposure_s;
  const double alpha = 1.0 - confidence;
  out.lambda_hz = k / exposure;
  if (out.n_events == 0) {
    out.ci_low_hz = 0.0;
    out.ci_high_hz = -std::log(alpha) / exposure;
  } else {
    out.ci_low_hz = boost::math::gamma_p_inv(k, 0.5 * alpha) / exposure;
    out.ci_high_hz = boost::math::gamma_p_inv(k + 1.0, 1.0 - 0.5 * alpha) / exposure;
  }
  return out;
}

double regime_separation_sigma(const DwellStats& observed, double reference_rate_hz) {
  const double expected = reference_rate_hz * observed.exposure_s;
  if (!(expected > 0.0)) throw InputError("reference rate must be positive");
  return (expected - static_cast<double>(observed.n_events)) / std::sqrt(expected);
}

CoincidenceReport coincidence_analysis(std::span<const std::vector<double>> event_times_s,
                                       double window_s, double span_s) {
  if (event_times_s.size() < 2) throw InputError("coincidence analysis needs at least two traces");
  if (!(window_s >= 0.0) || !(span_s > 0.0)) {
    throw InputError("window must be non-negative and span positive");
  }
  for (const auto& events : event_times_s) {
    if (!std::is_sorted(events.begin(), events.end())) {
      throw InputError("event times must be sorted");
    }
  }

  CoincidenceReport report;
  for (std::size_t a = 0; a < event_times_s.size(); ++a) {
    for (std::size_t b = a + 1; b < event_times_s.size(); ++b) {
      const auto& first = event_times_s[a];
      const auto& second = event_times_s[b];
      CoincidencePair pair{a, b, 0, 0.0, 0.0};
      for (double t : first) {
        const auto it = std::lower_bound(second.begin(), second.end(), t - window_s);
        if (it != second.end() && *it <= t + window_s) ++pair.count;
      }
      const double rate_a = static_cast<double>(first.size()) / span_s;
      const double rate_b = static_cast<double>(second.size()) / span_s;
      pair.expected = 2.0 * rate_a * rate_b * window_s * span_s;
      pair.excess_ratio = pair.expected > 0.0 ? static_cast<double>(pair.count) / pair.expected
                                              : std::numeric_limits<double>::quiet_NaN();
      report.total_count += pair.count;
      report.total_expected += pair.expected;
      report.pairs.push_back(pair);
    }
  }
  report.excess_ratio = report.total_expected > 0.0
                            ? static_cast<double>(report.total_count) / report.total_expected
                            : std::numeric_limits<double>::quiet_NaN();
  return report;
}

}  // namespace gradflux
