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

// Time-domain coherence curves and the kinetic-inductance parabola.

#include <string>
#include <vector>

namespace gradflux {

enum class CurveModel { exponential, ramsey, echo, parabola };

const char* to_string(CurveModel model) noexcept;
CurveModel parse_curve_model(const std::string& text);

/// Sampled curve. For decays `t` is time (any unit, typically us) and `y`
/// the population inversion; for the parabola `t` is field [uT] and `y` the
/// readout frequency [GHz].
struct DecayCurve {
  std::vector<double> t;
  std::vector<double> y;
  CurveModel model = CurveModel::exponential;

  /// t strictly increasing, finite values, at least 5 samples (3 for the
  /// parabola).
  void validate() const;
};

/// exponential / echo: a exp(-t / tau) + c
/// ramsey:             a exp(-t / tau) cos(2 pi detuning t + phase) + c
struct DecayFit {
  CurveModel model = CurveModel::exponential;
  double amplitude = 0.0;
  double time_constant = 0.0;  // same unit as t
  double offset = 0.0;
  double detuning = 0.0;  // 1 / (unit of t); ramsey only
  double phase = 0.0;     // rad; ramsey only
  double time_constant_stderr = 0.0;
  double rms_residual = 0.0;
  int iterations = 0;
};

DecayFit fit_decay(const DecayCurve& curve);

/// f(B) = f_max - curvature (B - b_offset)^2 with curvature >= 0.
struct ParabolaFit {
  double f_max = 0.0;
  double b_offset = 0.0;
  double curvature = 0.0;
  bool curvature_clamped = false;  // data open upward; flat fit returned
  double rms_residual = 0.0;
};

ParabolaFit fit_parabola(const DecayCurve& curve);

}  // namespace gradflux
