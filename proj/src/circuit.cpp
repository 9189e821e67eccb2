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

#include "gradflux/circuit.hpp"

#include <cfenv>
#include <cmath>
#include <string>

#include "gradflux/errors.hpp"
#include "gradflux/units.hpp"

namespace gradflux {
namespace {

void require_finite_nonnegative(double value, const char* name) {
  if (!std::isfinite(value) || value < 0.0) {
    throw InputError(std::string(name) + " must be finite and non-negative, got " +
                     std::to_string(value));
  }
}

void require_positive(double value, const char* name) {
  if (!std::isfinite(value) || value <= 0.0) {
    throw InputError(std::string(name) + " must be finite and positive, got " +
                     std::to_string(value));
  }
}

}  // namespace

void BranchCircuit::validate() const {
  require_finite_nonnegative(l1_nh, "L1");
  require_finite_nonnegative(l2_nh, "L2");
  require_finite_nonnegative(l3_nh, "L3");
  require_finite_nonnegative(ls_nh, "Ls");
  require_finite_nonnegative(lr_nh, "Lr");
  require_positive(cr_ff, "Cr");
  require_positive(cj_ff, "CJ");
  require_finite_nonnegative(ej_ghz, "EJ");
  if (l1_nh == 0.0 && l3_nh == 0.0) {
    throw DegenerateCircuitError("L1 + L3 (at least one outer-loop branch must be positive)");
  }
}

void EffectiveFluxonium::validate() const {
  require_positive(lq_nh, "Lq_eff");
  require_positive(lr_nh, "Lr_eff");
  if (!(lrq_nh > 0.0)) throw InputError("Lrq_eff must be positive (or infinite)");
  require_positive(cj_ff, "CJ");
  require_positive(cr_ff, "Cr");
  require_finite_nonnegative(ej_ghz, "EJ");
  if (!std::isfinite(alpha)) throw InputError("alpha must be finite");
}

EffectiveFluxonium reduce_circuit(const BranchCircuit& c) {
  c.validate();
  const double l1 = c.l1_nh, l2 = c.l2_nh, l3 = c.l3_nh, ls = c.ls_nh, lr = c.lr_nh;

  // Squared auxiliary inductances.
  const double sigma2 = l1 * l2 + l2 * l3 + l1 * l3;
  const double eps2 = ls * l2 + ls * l3 + sigma2;
  const double a2 = ls * l2 + sigma2;
  const double b2 = lr * l3 + sigma2;

  if (sigma2 == 0.0) throw DegenerateCircuitError("L_sigma^2 = L1 L2 + L2 L3 + L1 L3");
  if (eps2 == 0.0) throw DegenerateCircuitError("L_eps^2 = Ls L2 + Ls L3 + L_sigma^2");
  const double mixed = lr * a2 + ls * b2;
  if (mixed == 0.0) throw DegenerateCircuitError("Lr L_a^2 + Ls L_b^2");

  const double inverse_lq =
      (l3 * sigma2 * (ls + lr) + lr * ls * l2 * l3) / (sigma2 * mixed) + l1 / sigma2;
  if (inverse_lq == 0.0) throw DegenerateCircuitError("inverse effective shunt inductance");

  EffectiveFluxonium eff;
  eff.lq_nh = 1.0 / inverse_lq;
  eff.lr_nh = mixed / eps2;
  const double coupling_den = 2.0 * ls * l3;
  eff.lrq_nh = coupling_den == 0.0 ? std::numeric_limits<double>::infinity() : mixed / coupling_den;
  eff.alpha = (l3 - l1 - ls) / (l1 + ls + l3);
  eff.cj_ff = c.cj_ff;
  eff.cr_ff = c.cr_ff;
  eff.ej_ghz = c.ej_ghz;
  return eff;
}

BranchCircuit symmetric_circuit(double lq_eff_nh, double ls_nh, double lr_nh, double cr_ff,
                                double cj_ff, double ej_ghz) {
  require_positive(lq_eff_nh, "Lq_eff");
  require_finite_nonnegative(ls_nh, "Ls");
  require_finite_nonnegative(lr_nh, "Lr");
  // With L2 = 0 and L3 = L1 + Ls the reduced inverse inductance is
  //   P / (P x + Q) + 1 / (x + Ls) = 1 / T,  P = Lr + Ls, Q = Lr Ls, x = L1,
  // which is a quadratic in x with exactly one positive root.
  const double t = lq_eff_nh;
  const double p = lr_nh + ls_nh;
  const double q = lr_nh * ls_nh;
  double l1 = 0.0;
  if (p == 0.0) {
    // No readout branch at all: L1 and L3 = L1 in parallel.
    l1 = 2.0 * t;
  } else {
    const double qa = p;
    const double qb = p * ls_nh + q - 2.0 * t * p;
    const double qc = q * ls_nh - t * p * ls_nh - t * q;
    const double disc = qb * qb - 4.0 * qa * qc;
    if (disc < 0.0) throw InputError("no symmetric circuit realizes the requested Lq_eff");
    // The larger root is the positive one.
    const double root = (-qb + std::sqrt(disc)) / (2.0 * qa);
    if (!(root > 0.0)) throw InputError("no symmetric circuit realizes the requested Lq_eff");
    l1 = root;
  }
  BranchCircuit c;
  c.l1_nh = l1;
  c.l2_nh = 0.0;
  c.l3_nh = l1 + ls_nh;
  c.ls_nh = ls_nh;
  c.lr_nh = lr_nh;
  c.cr_ff = cr_ff;
  c.cj_ff = cj_ff;
  c.ej_ghz = ej_ghz;
  return c;
}

double effective_flux(const FluxBias& bias, double alpha) noexcept { return bias.effective(alpha); }

void LoopGeometry::validate() const {
  require_positive(outer_area_m2, "outer_area");
  require_positive(wire_length_m, "wire_length");
  require_positive(grain_size_m, "grain_size");
}

LoopFluxes flux_from_field(double field_t, const LoopGeometry& geometry) {
  geometry.validate();
  if (!std::isfinite(field_t)) throw InputError("field must be finite");
  const double outer = field_t * geometry.outer_area_m2 / units::kFluxQuantum;
  const double inner = field_t * geometry.inner_area_m2() / units::kFluxQuantum;
  return {outer, inner, inner};
}

const char* to_string(Parity parity) noexcept { return parity == Parity::even ? "even" : "odd"; }

TrappedFluxState initialization_parity(double init_field_t, const LoopGeometry& geometry) {
  const double outer = flux_from_field(init_field_t, geometry).outer;
  const int saved = std::fegetround();
  std::fesetround(FE_TONEAREST);
  const double rounded = std::nearbyint(outer);
  std::fesetround(saved);

  TrappedFluxState state;
  state.n_fluxons = static_cast<std::int64_t>(rounded);
  const bool odd = (state.n_fluxons % 2) != 0;
  state.parity = odd ? Parity::odd : Parity::even;
  state.phi_eff_locked = odd ? 0.5 : 0.0;
  return state;
}

}  // namespace gradflux
