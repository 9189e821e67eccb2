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

// Library-wide unit convention: inductance in nH, capacitance in fF,
// energies quoted as frequencies E/h in GHz, flux in units of the flux
// quantum, magnetic field in tesla, time in seconds (microseconds for
// coherence curves).

#include <cmath>
#include <numbers>

namespace gradflux::units {

inline constexpr double kElementaryCharge = 1.602176634e-19;  // C
inline constexpr double kPlanck = 6.62607015e-34;             // J s
inline constexpr double kHbar = kPlanck / (2.0 * std::numbers::pi);
inline constexpr double kFluxQuantum = kPlanck / (2.0 * kElementaryCharge);  // Wb

inline constexpr double kNano = 1e-9;
inline constexpr double kFemto = 1e-15;
inline constexpr double kGiga = 1e9;

/// Inductive energy (Phi0/2pi)^2 / L expressed in GHz.
inline double inductive_energy_ghz(double l_nh) {
  const double reduced = kFluxQuantum / (2.0 * std::numbers::pi);
  return reduced * reduced / (l_nh * kNano) / kPlanck / kGiga;
}

/// Charging energy e^2 / 2C expressed in GHz.
inline double charging_energy_ghz(double c_ff) {
  return kElementaryCharge * kElementaryCharge / (2.0 * c_ff * kFemto) / kPlanck / kGiga;
}

/// Bare LC frequency 1 / (2 pi sqrt(LC)) in GHz.
inline double lc_frequency_ghz(double l_nh, double c_ff) {
  return 1.0 / (2.0 * std::numbers::pi * std::sqrt(l_nh * kNano * c_ff * kFemto)) / kGiga;
}

/// Zero-point fluctuation of the reduced phase 2 pi Phi / Phi0 for an LC
/// oscillator, sqrt(2 e^2 Z / hbar).
inline double phase_zero_point(double l_nh, double c_ff) {
  const double impedance = std::sqrt((l_nh * kNano) / (c_ff * kFemto));
  return std::sqrt(2.0 * kElementaryCharge * kElementaryCharge * impedance / kHbar);
}

}  // namespace gradflux::units
