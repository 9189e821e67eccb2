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

// Lumped-element description of the three-loop gradiometric fluxonium and
// its reduction to an equivalent single-loop fluxonium coupled to a readout
// resonator.

#include <cstdint>
#include <limits>

namespace gradflux {

/// Raw branch elements of the gradiometric circuit. L1 and L3 are the two
/// superinductor halves of the outer loop, L2 the central branch, Ls the
/// inductance shared with the readout mode (in series with L1).
struct BranchCircuit {
  double l1_nh = 0.0;
  double l2_nh = 0.0;
  double l3_nh = 0.0;
  double ls_nh = 0.0;
  double lr_nh = 0.0;
  double cr_ff = 0.0;
  double cj_ff = 0.0;
  double ej_ghz = 0.0;

  /// Throws InputError when an element is negative or non-finite or a
  /// capacitance is not positive, and DegenerateCircuitError when both L1
  /// and L3 vanish.
  void validate() const;
};

/// Single-loop model seen by the junction. `lrq_nh` is +infinity when the
/// shared inductance is zero, i.e. the qubit and resonator are uncoupled.
struct EffectiveFluxonium {
  double lq_nh = 0.0;
  double lr_nh = 0.0;
  double lrq_nh = std::numeric_limits<double>::infinity();
  double cj_ff = 0.0;
  double cr_ff = 0.0;
  double ej_ghz = 0.0;
  double alpha = 0.0;

  bool coupled() const noexcept { return lrq_nh < std::numeric_limits<double>::infinity(); }
  void validate() const;
};

/// Reduces the branch circuit to the effective single-loop fluxonium.
/// Throws DegenerateCircuitError naming the vanishing quantity.
EffectiveFluxonium reduce_circuit(const BranchCircuit& circuit);

/// Builds a symmetric (alpha = 0) branch circuit with no central-branch
/// inductance, L3 = L1 + Ls, with L1 chosen so that the reduced shunt
/// inductance equals `lq_eff_nh`. Used to realize a device that was
/// characterized only through its effective parameters.
BranchCircuit symmetric_circuit(double lq_eff_nh, double ls_nh, double lr_nh, double cr_ff,
                                double cj_ff, double ej_ghz);

/// External fluxes threading the two inner loops, in flux quanta.
struct FluxBias {
  double phi_ext1 = 0.0;
  double phi_ext2 = 0.0;

  double sigma() const noexcept { return 0.5 * (phi_ext1 + phi_ext2); }
  double delta() const noexcept { return 0.5 * (phi_ext1 - phi_ext2); }
  double effective(double alpha) const noexcept { return delta() + alpha * sigma(); }
};

/// Effective flux bias delta + alpha * sigma seen by the junction.
double effective_flux(const FluxBias& bias, double alpha) noexcept;

struct LoopGeometry {
  double outer_area_m2 = 50e-6 * 150e-6;
  double wire_length_m = 300e-6;
  double grain_size_m = 4e-9;

  double inner_area_m2() const noexcept { return 0.5 * outer_area_m2; }
  void validate() const;
};

struct LoopFluxes {
  double outer = 0.0;
  double inner1 = 0.0;
  double inner2 = 0.0;
};

/// Fluxes (in flux quanta) of a homogeneous perpendicular field through
/// the outer and the two inner loops.
LoopFluxes flux_from_field(double field_t, const LoopGeometry& geometry);

enum class Parity { even, odd };

const char* to_string(Parity parity) noexcept;

struct TrappedFluxState {
  std::int64_t n_fluxons = 0;
  Parity parity = Parity::even;
  double phi_eff_locked = 0.0;
};

/// Fluxon number frozen into the outer loop when cooling through the
/// superconducting transition in field `init_field_t`. Exact half-integer
/// flux rounds to the even neighbour.
TrappedFluxState initialization_parity(double init_field_t, const LoopGeometry& geometry);

}  // namespace gradflux
