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

#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <random>

#include "doctest.h"
#include "gradflux/circuit.hpp"
#include "gradflux/errors.hpp"
#include "gradflux/units.hpp"

using namespace gradflux;
using boost::multiprecision::cpp_rational;

namespace {

BranchCircuit make(double l1, double l2, double l3, double ls, double lr) {
  return {l1, l2, l3, ls, lr, 20.2, 3.4, 5.1};
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

// Reference reduction in exact rational arithmetic, written out from the
// series / parallel network algebra independently of the library.
struct ExactReduction {
  cpp_rational lq, lr, lrq, alpha;
};

ExactReduction exact_reduce(cpp_rational l1, cpp_rational l2, cpp_rational l3, cpp_rational ls,
                            cpp_rational lr) {
  const cpp_rational s2 = l1 * l2 + l2 * l3 + l1 * l3;
  const cpp_rational e2 = ls * l2 + ls * l3 + s2;
  const cpp_rational a2 = ls * l2 + s2;
  const cpp_rational b2 = lr * l3 + s2;
  const cpp_rational m = lr * a2 + ls * b2;
  ExactReduction out;
  const cpp_rational inv_lq = (l3 * s2 * (ls + lr) + lr * ls * l2 * l3) / (s2 * m) + l1 / s2;
  out.lq = 1 / inv_lq;
  out.lr = m / e2;
  out.lrq = m / (2 * ls * l3);
  out.alpha = (l3 - l1 - ls) / (l1 + ls + l3);
  return out;
}

}  // namespace

TEST_CASE("gradiometric limit reduces to half the outer-loop branch") {
  for (double lq : {1.0, 50.0, 172.0, 900.0}) {
    const auto eff = reduce_circuit(make(2 * lq, 0.0, 2 * lq, 0.0, 21.6));
    CHECK(rel(eff.lq_nh, lq) <= 1e-12);
    CHECK_FALSE(eff.coupled());
    CHECK(eff.alpha == 0.0);
  }
}

TEST_CASE("Ls = 0, L2 = 0, L1 = L3 gives L1 / 2 for random branches") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.1, 2000.0);
  for (int i = 0; i < 200; ++i) {
    const double l1 = u(rng);
    const auto eff = reduce_circuit(make(l1, 0.0, l1, 0.0, u(rng)));
    CHECK(rel(eff.lq_nh, 0.5 * l1) <= 1e-12);
  }
}

TEST_CASE("asymmetry vanishes for L1 = L3 with no shared branch and for L3 = L1 + Ls") {
  CHECK(reduce_circuit(make(30.0, 5.0, 30.0, 0.0, 20.0)).alpha == 0.0);
  const auto eff = reduce_circuit(make(30.0, 5.0, 32.5, 2.5, 20.0));
  CHECK(eff.alpha == 0.0);
  // Then the effective flux ignores the common-mode component.
  CHECK(effective_flux({0.3, 0.1}, eff.alpha) == doctest::Approx(effective_flux({5.3, 5.1}, eff.alpha)).epsilon(1e-15));
}

TEST_CASE("equal branches with a small shared inductance") {
  // Hand evaluation: sigma^2 = 300, La^2 = 310, Lb^2 = 500, so
  // 1/Lq = 65000 / 2010000 + 10 / 300 and Lq = 15.227...
  const auto eff = reduce_circuit(make(10.0, 10.0, 10.0, 1.0, 20.0));
  CHECK(eff.lq_nh == doctest::Approx(15.23).epsilon(5e-4));
  CHECK(eff.lq_nh == doctest::Approx(1.0 / (65000.0 / 2010000.0 + 10.0 / 300.0)).epsilon(1e-14));
}

TEST_CASE("reduction agrees with exact rational evaluation on random circuits") {
  std::mt19937_64 rng(2026);
  std::uniform_int_distribution<int> u(1, 1 << 20);
  for (int i = 0; i < 100; ++i) {
    // Dyadic values are exact in binary floating point.
    int k[5];
    for (int& v : k) v = u(rng);
    const double scale = 1.0 / 1024.0;
    const BranchCircuit c = make(k[0] * scale, k[1] * scale, k[2] * scale, k[3] * scale, k[4] * scale);
    const auto eff = reduce_circuit(c);
    const cpp_rational s(1, 1024);
    const auto ref = exact_reduce(k[0] * s, k[1] * s, k[2] * s, k[3] * s, k[4] * s);
    CHECK(rel(eff.lq_nh, static_cast<double>(ref.lq)) <= 1e-10);
    CHECK(rel(eff.lr_nh, static_cast<double>(ref.lr)) <= 1e-10);
    CHECK(rel(eff.lrq_nh, static_cast<double>(ref.lrq)) <= 1e-10);
    CHECK(std::abs(eff.alpha - static_cast<double>(ref.alpha)) <= 1e-10);
    CHECK(std::abs(eff.alpha) <= 1.0);
  }
}

TEST_CASE("degenerate circuits name the vanishing quantity") {
  try {
    reduce_circuit(make(0.0, 0.0, 0.0, 1.0, 20.0));
    FAIL("expected an error");
  } catch (const DegenerateCircuitError& ex) {
    CHECK(ex.quantity().find("L1 + L3") != std::string::npos);
  }
  try {
    reduce_circuit(make(0.0, 0.0, 10.0, 1.0, 20.0));
    FAIL("expected an error");
  } catch (const DegenerateCircuitError& ex) {
    CHECK(ex.quantity().find("L_sigma^2") != std::string::npos);
  }
  CHECK_THROWS_AS(reduce_circuit(make(-1.0, 0.0, 10.0, 1.0, 20.0)), InputError);
  BranchCircuit bad = make(10.0, 0.0, 10.0, 1.0, 20.0);
  bad.cj_ff = 0.0;
  CHECK_THROWS_AS(reduce_circuit(bad), InputError);
}

TEST_CASE("symmetric realization hits the requested shunt inductance") {
  for (double ls : {0.0, 0.5, 2.8, 10.0}) {
    const BranchCircuit c = symmetric_circuit(172.0, ls, 21.6, 20.2, 3.4, 5.1);
    const auto eff = reduce_circuit(c);
    CHECK(rel(eff.lq_nh, 172.0) <= 1e-12);
    CHECK(eff.alpha == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(c.l2_nh == 0.0);
    CHECK(eff.coupled() == (ls > 0.0));
  }
}

TEST_CASE("effective flux algebra") {
  CHECK(effective_flux({0.25, 0.25}, 0.0) == 0.0);
  // Odd trapped fluxon in a symmetric device sits at half flux.
  CHECK(initialization_parity(units::kFluxQuantum / LoopGeometry{}.outer_area_m2, {}).phi_eff_locked == 0.5);
  // alpha = 1/60 with 60 flux quanta in each inner loop advances by one quantum.
  CHECK(effective_flux({60.0, 60.0}, 1.0 / 60.0) == doctest::Approx(1.0).epsilon(1e-14));

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int i = 0; i < 50; ++i) {
    const double p1 = u(rng), p2 = u(rng), q1 = u(rng), q2 = u(rng), a = u(rng) / 3.0;
    const double k = u(rng);
    // Linearity.
    CHECK(effective_flux({p1 + k * q1, p2 + k * q2}, a) ==
          doctest::Approx(effective_flux({p1, p2}, a) + k * effective_flux({q1, q2}, a)).epsilon(1e-12));
    // Exchange flips only the difference term.
    const FluxBias b{p1, p2}, swapped{p2, p1};
    CHECK(swapped.delta() == doctest::Approx(-b.delta()));
    CHECK(swapped.sigma() == doctest::Approx(b.sigma()));
    CHECK(effective_flux(b, a) == doctest::Approx(b.delta() + a * b.sigma()).epsilon(1e-15));
  }
}

TEST_CASE("field to flux conversion") {
  const LoopGeometry g;
  const auto zero = flux_from_field(0.0, g);
  CHECK(zero.outer == 0.0);
  CHECK(zero.inner1 == 0.0);
  CHECK(zero.inner2 == 0.0);
  CHECK(flux_from_field(280e-9, g).outer == doctest::Approx(1.016).epsilon(1e-3));
  CHECK(flux_from_field(100.0 * units::kFluxQuantum / g.outer_area_m2, g).outer ==
        doctest::Approx(100.0).epsilon(1e-14));
  CHECK(g.inner_area_m2() * 2.0 == g.outer_area_m2);
  const auto f = flux_from_field(1e-6, g);
  CHECK(f.inner1 * 2.0 == doctest::Approx(f.outer).epsilon(1e-15));
}

TEST_CASE("initialization parity") {
  const LoopGeometry g;
  const double period = units::kFluxQuantum / g.outer_area_m2;
  const auto one = initialization_parity(period, g);
  CHECK(one.n_fluxons == 1);
  CHECK(one.parity == Parity::odd);
  CHECK(one.phi_eff_locked == 0.5);
  const auto none = initialization_parity(0.0, g);
  CHECK(none.n_fluxons == 0);
  CHECK(none.parity == Parity::even);
  CHECK(none.phi_eff_locked == 0.0);
  const auto two = initialization_parity(2.4 * period, g);
  CHECK(two.n_fluxons == 2);
  CHECK(two.parity == Parity::even);
  // Exact half-integer flux rounds to even. Nudge the field until the
  // computed flux is exactly k + 1/2.
  int ties = 0;
  for (int k = -6; k <= 6; ++k) {
    const double target = k + 0.5;
    double b = target * period;
    for (int step = 0; step < 64 && flux_from_field(b, g).outer != target; ++step) {
      b = std::nextafter(b, flux_from_field(b, g).outer < target ? 1.0 : -1.0);
    }
    if (flux_from_field(b, g).outer != target) continue;  // not representable
    ++ties;
    CHECK(initialization_parity(b, g).n_fluxons % 2 == 0);
    CHECK(std::abs(initialization_parity(b, g).n_fluxons - target) == 0.5);
  }
  CHECK(ties >= 6);

  // Consistency with the raw flux over a field scan.
  for (int i = -40; i <= 40; ++i) {
    const double b = 0.137 * i * period;
    const long n = std::lround(flux_from_field(b, g).outer);
    const auto s = initialization_parity(b, g);
    CHECK((std::abs(n) % 2 == 1) == (s.parity == Parity::odd));
  }
}
