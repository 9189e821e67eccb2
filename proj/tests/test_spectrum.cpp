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

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "doctest.h"
#include "gradflux/circuit.hpp"
#include "gradflux/linalg.hpp"
#include "gradflux/spectrum.hpp"

using namespace gradflux;

namespace {

constexpr double kPi = std::numbers::pi;

double lc_ghz(double l_nh, double c_ff) {
  return 1.0 / (2.0 * kPi * std::sqrt(l_nh * 1e-9 * c_ff * 1e-15)) * 1e-9;
}

EffectiveFluxonium fitted_device() {
  return reduce_circuit(symmetric_circuit(172.0, 2.8, 21.6, 20.2, 3.4, 5.1));
}

Eigen::VectorXd energies(const EffectiveFluxonium& eff, double phi, FockBasis basis) {
  return symmetric_eigen(build_hamiltonian(eff, phi, basis).matrix, false).values;
}

double f01(const EffectiveFluxonium& eff, double phi, FockBasis basis) {
  return transition_frequency(diagonalize_labeled(build_hamiltonian(eff, phi, basis)), {0, 0},
                              {0, 1});
}

}  // namespace

TEST_CASE("built Hamiltonians are Hermitian") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 20; ++i) {
    const BranchCircuit c{50 + 400 * u(rng), 30 * u(rng), 50 + 400 * u(rng), 5 * u(rng),
                          10 + 30 * u(rng), 10 + 20 * u(rng), 1 + 5 * u(rng), 10 * u(rng)};
    const auto h = build_hamiltonian(reduce_circuit(c), 3.0 * u(rng) - 1.0, {12, 6});
    CHECK(hermiticity_defect(h.matrix) <= 1e-12);
    CHECK(h.matrix.allFinite());
  }
}

TEST_CASE("non-Hermitian input is rejected") {
  HamiltonianMatrix h;
  h.basis = {2, 2};
  h.matrix = Eigen::MatrixXd::Identity(4, 4);
  h.matrix(0, 1) = 1.0;
  CHECK_THROWS_AS(diagonalize_labeled(h), InputError);
}

TEST_CASE("diagonal input keeps its diagonal and identity labels") {
  HamiltonianMatrix h;
  h.basis = {3, 2};
  h.matrix = Eigen::MatrixXd::Zero(6, 6);
  for (int i = 0; i < 6; ++i) h.matrix(i, i) = 0.5 * i * i + 1.0;
  const auto spec = diagonalize_labeled(h);
  for (int i = 0; i < 6; ++i) {
    CHECK(spec.energies[i] == doctest::Approx(0.5 * i * i + 1.0).epsilon(1e-14));
    CHECK(spec.levels[i].label == LevelLabel{i / 3, i % 3});
    CHECK(spec.levels[i].retained);
    CHECK(spec.levels[i].confidence == doctest::Approx(1.0));
  }
}

TEST_CASE("embedded two-level block splits by 2g") {
  const double g = 0.037;
  HamiltonianMatrix h;
  h.basis = {2, 2};
  h.matrix = Eigen::MatrixXd::Zero(4, 4);
  h.matrix(0, 1) = h.matrix(1, 0) = g;
  h.matrix(2, 2) = 10.0;
  h.matrix(3, 3) = 20.0;
  const auto spec = diagonalize_labeled(h);
  CHECK(spec.energies[1] - spec.energies[0] == doctest::Approx(2.0 * g).epsilon(1e-13));
  // Equal mixing: one level keeps each label at confidence one half.
  CHECK(spec.levels[0].confidence == doctest::Approx(0.5));
}

TEST_CASE("uncoupled harmonic limit is an exact ladder sum") {
  EffectiveFluxonium eff{172.0, 24.0, std::numeric_limits<double>::infinity(), 3.4, 20.2, 0.0, 0.0};
  const double fq = lc_ghz(172.0, 3.4);
  const double fr = lc_ghz(24.0, 20.2);
  const FockBasis basis{10, 6};
  std::vector<double> expected;
  for (int n = 0; n < basis.n_res; ++n) {
    for (int m = 0; m < basis.m_qubit; ++m) expected.push_back(n * fr + m * fq);
  }
  std::sort(expected.begin(), expected.end());
  for (double phi : {0.0, 0.3, 0.5}) {
    const auto e = energies(eff, phi, basis);
    double worst = 0.0;
    for (std::size_t i = 0; i < expected.size(); ++i) {
      worst = std::max(worst, std::abs(e[static_cast<Eigen::Index>(i)] - expected[i]));
    }
    CHECK(worst <= 1e-9);
  }
  const auto spec = diagonalize_labeled(build_hamiltonian(eff, 0.2, basis));
  CHECK(transition_frequency(spec, {0, 0}, {0, 1}) == doctest::Approx(fq).epsilon(1e-12));
  CHECK(transition_frequency(spec, {0, 1}, {0, 1}) == 0.0);
  CHECK(std::abs(dispersive_shift(spec, 0.2).chi_mhz) < 1e-6);
}

TEST_CASE("EJ = 0 with coupling matches the classical normal modes") {
  // Inverse inductance matrix [[1/Lr, -1/(2Lrq)], [-1/(2Lrq), 1/Lq]] with
  // capacitances diag(Cr, CJ): det(K - w^2 C) = 0 is a quadratic in w^2.
  for (const auto& [lq, lr, lrq] : {std::tuple{172.0, 24.4, 1498.0}, std::tuple{60.0, 30.0, 80.0}}) {
    const double cr = 20.2, cj = 3.4;
    EffectiveFluxonium eff{lq, lr, lrq, cj, cr, 0.0, 0.0};
    const double Lq = lq * 1e-9, Lr = lr * 1e-9, Lrq = lrq * 1e-9, Cr = cr * 1e-15, Cj = cj * 1e-15;
    const double a = Cr * Cj;
    const double b = -(Cr / Lq + Cj / Lr);
    const double c = 1.0 / (Lr * Lq) - 1.0 / (4.0 * Lrq * Lrq);
    const double disc = std::sqrt(b * b - 4 * a * c);
    const double w_lo = std::sqrt((-b - disc) / (2 * a)), w_hi = std::sqrt((-b + disc) / (2 * a));
    const double f_lo = w_lo / (2 * kPi) * 1e-9, f_hi = w_hi / (2 * kPi) * 1e-9;

    const auto e = energies(eff, 0.0, {30, 30});
    std::vector<double> expected;
    for (int p = 0; p < 4; ++p) {
      for (int q = 0; q < 4; ++q) expected.push_back(p * f_lo + q * f_hi);
    }
    std::sort(expected.begin(), expected.end());
    for (int k = 1; k < 6; ++k) {
      CHECK(e[k] - e[0] == doctest::Approx(expected[static_cast<std::size_t>(k)]).epsilon(1e-9));
    }
  }
}

TEST_CASE("spectrum is flux periodic and symmetric about half flux") {
  const auto eff = fitted_device();
  const FockBasis basis{20, 8};
  for (double phi : {0.0, 0.13, 0.37, 0.5, 0.81}) {
    const auto a = energies(eff, phi, basis);
    const auto b = energies(eff, phi + 1.0, basis);
    CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-9);
  }
  for (double d : {0.05, 0.1, 0.2}) {
    const auto a = energies(eff, 0.5 + d, basis);
    const auto b = energies(eff, 0.5 - d, basis);
    CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("gradiometric device matches the single-loop fluxonium") {
  const double lq = 172.0, cj = 3.4, ej = 5.1;
  const auto eff = reduce_circuit({2 * lq, 0.0, 2 * lq, 0.0, 21.6, 20.2, cj, ej});
  const FockBasis basis{25, 4};
  double worst = 0.0;
  for (int i = 0; i <= 20; ++i) {
    const double delta = i / 20.0;
    const FluxBias bias{0.37 + delta, 0.37 - delta};
    const double phi = effective_flux(bias, eff.alpha);
    const auto spec = diagonalize_labeled(build_hamiltonian(eff, phi, basis));
    const auto ref = single_loop_reference(lq, cj, ej, delta, basis.m_qubit);
    for (int m = 0; m < 10; ++m) {
      const auto idx = spec.index_of({0, m});
      REQUIRE(idx.has_value());
      worst = std::max(worst, std::abs(spec.energies[static_cast<Eigen::Index>(*idx)] - ref[m]));
    }
  }
  CHECK(worst <= 1e-6);
}

TEST_CASE("single-loop reference limits") {
  const auto harmonic = single_loop_reference(172.0, 3.4, 0.0, 0.3, 12);
  const double fq = lc_ghz(172.0, 3.4);
  for (int k = 0; k < 12; ++k) CHECK(harmonic[k] == doctest::Approx(k * fq).epsilon(1e-12));

  // Tunnel splitting at half flux shrinks as EJ grows.
  double previous = std::numeric_limits<double>::infinity();
  for (double ej : {3.0, 5.0, 7.0, 9.0, 11.0, 13.0}) {
    const auto e = single_loop_reference(172.0, 3.4, ej, 0.5, 40);
    const double f = e[1] - e[0];
    CHECK(f < previous);
    previous = f;
  }
}

TEST_CASE("labels are stable under basis doubling at half flux") {
  const auto eff = fitted_device();
  const auto small = diagonalize_labeled(build_hamiltonian(eff, 0.5, {25, 15}));
  const auto large = diagonalize_labeled(build_hamiltonian(eff, 0.5, {50, 30}));
  for (int i = 0; i < 6; ++i) {
    CHECK(small.levels[i].label == large.levels[i].label);
    CHECK(small.energies[i] - small.energies[0] ==
          doctest::Approx(large.energies[i] - large.energies[0]).epsilon(1e-4));
  }
  CHECK(small.levels[0].label == LevelLabel{0, 0});
  // f01 at the sweet spot lies below the resonator.
  CHECK(small.levels[1].label == LevelLabel{0, 1});
}

TEST_CASE("f01 at half flux agrees with a converged oracle") {
  const auto eff = fitted_device();
  const std::vector<FockBasis> ladder{{25, 15}, {40, 20}, {50, 30}, {60, 40}};
  double converged = f01(eff, 0.5, ladder[0]);
  bool done = false;
  for (std::size_t i = 1; i < ladder.size() && !done; ++i) {
    const double next = f01(eff, 0.5, ladder[i]);
    done = std::abs(next - converged) < 1e-6;
    converged = next;
  }
  REQUIRE(done);
  CHECK(f01(eff, 0.5, {25, 15}) == doctest::Approx(converged).epsilon(1e-4 / converged));
  // f01 is at its minimum at the sweet spot.
  CHECK(f01(eff, 0.45, {25, 15}) > f01(eff, 0.5, {25, 15}));
  CHECK(f01(eff, 0.55, {25, 15}) > f01(eff, 0.5, {25, 15}));
}

TEST_CASE("dispersive shift") {
  const auto eff = fitted_device();
  const auto chi = dispersive_shift(eff, 0.5, {25, 15});
  REQUIRE(chi.valid);
  CHECK(chi.chi_mhz < 0.0);
  CHECK(chi.min_confidence > 0.9);

  const auto uncoupled = reduce_circuit(symmetric_circuit(172.0, 0.0, 21.6, 20.2, 3.4, 5.1));
  REQUIRE_FALSE(uncoupled.coupled());
  CHECK(std::abs(dispersive_shift(uncoupled, 0.5, {25, 15}).chi_mhz) < 1e-6);
}

TEST_CASE("f01 sweeps through the readout band and the crossing is excluded") {
  const auto eff = fitted_device();
  const FockBasis basis{25, 8};
  const auto f0 = f01(eff, 0.0, basis);
  const auto fh = f01(eff, 0.5, basis);
  CHECK(f0 > 7.445);
  CHECK(fh < 7.445);

  std::vector<double> grid;
  for (int i = 0; i <= 100; ++i) grid.push_back(0.5 * i / 100.0);
  const std::vector<TransitionSpec> t{TransitionSpec::parse("f01")};
  const auto points = flux_sweep(eff, grid, basis, t, {kDefaultOverlapThreshold, 2});
  int excluded = 0;
  for (const auto& p : points) {
    CHECK(p.error.empty());
    if (!p.chi.valid) {
      ++excluded;
      CHECK_FALSE(p.chi.reason.empty());
      CHECK(std::isnan(p.chi.chi_mhz));
    }
  }
  CHECK(excluded > 0);
  CHECK(excluded < 20);
}

TEST_CASE("unresolved labels raise a flagged error") {
  HamiltonianMatrix h;
  h.basis = {2, 2};
  h.matrix = Eigen::MatrixXd::Zero(4, 4);
  h.matrix(0, 1) = h.matrix(1, 0) = 0.1;
  h.matrix(2, 2) = 3.0;
  h.matrix(3, 3) = 4.0;
  const auto spec = diagonalize_labeled(h);
  try {
    transition_frequency(spec, {0, 0}, {0, 1});
    FAIL("expected UnresolvedLabelError");
  } catch (const UnresolvedLabelError& ex) {
    CHECK(ex.confidence() < kDefaultOverlapThreshold);
  }
  CHECK(transition_frequency(spec, {1, 0}, {1, 1}) == doctest::Approx(1.0));
}

TEST_CASE("flux sweep is deterministic and order independent") {
  const auto eff = fitted_device();
  const FockBasis basis{15, 6};
  std::vector<TransitionSpec> t;
  for (const char* name : {"f01", "f02", "fr", "0:1->1:1"}) t.push_back(TransitionSpec::parse(name));
  CHECK(t[3].name == "0:1->1:1");
  CHECK(TransitionSpec::parse("0,1->1,1").to == LevelLabel{1, 1});
  CHECK_THROWS_AS(TransitionSpec::parse("f99"), InputError);

  std::vector<double> grid;
  for (int i = 0; i < 17; ++i) grid.push_back(i / 16.0);
  const auto one = flux_sweep(eff, grid, basis, t, {0.7, 1});
  const auto many = flux_sweep(eff, grid, basis, t, {0.7, 4});
  std::vector<double> shifted(grid);
  for (double& g : shifted) g += 1.0;
  const auto next = flux_sweep(eff, shifted, basis, t, {0.7, 3});
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(one[i].flux == grid[i]);
    for (std::size_t k = 0; k < t.size(); ++k) {
      REQUIRE(one[i].freq_ghz[k].has_value() == many[i].freq_ghz[k].has_value());
      if (one[i].freq_ghz[k]) {
        CHECK(*one[i].freq_ghz[k] == *many[i].freq_ghz[k]);
        REQUIRE(next[i].freq_ghz[k].has_value());
        CHECK(std::abs(*one[i].freq_ghz[k] - *next[i].freq_ghz[k]) <= 1e-9);
      }
    }
  }
  // Symmetry of f01 about half flux, evaluated independently on both halves.
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const std::size_t j = grid.size() - 1 - i;
    if (one[i].freq_ghz[0] && one[j].freq_ghz[0]) {
      CHECK(std::abs(*one[i].freq_ghz[0] - *one[j].freq_ghz[0]) <= 1e-9);
    }
  }
  // A single point equals the direct call.
  const double single[] = {0.5};
  const auto direct = flux_sweep(eff, single, basis, t);
  CHECK(*direct[0].freq_ghz[0] == f01(eff, 0.5, basis));
  CHECK(direct[0].chi.chi_mhz == dispersive_shift(eff, 0.5, basis).chi_mhz);
}

TEST_CASE("convergence report") {
  const auto eff = fitted_device();
  const FockBasis only[] = {{25, 15}};
  const auto single = convergence_report(eff, 0.5, only);
  REQUIRE(single.size() == 1);
  CHECK_FALSE(single[0].delta_f01_ghz.has_value());
  CHECK_FALSE(single[0].delta_chi_mhz.has_value());

  const FockBasis ladder[] = {{25, 15}, {40, 20}, {50, 30}};
  const auto rows = convergence_report(eff, 0.5, ladder);
  REQUIRE(rows.size() == 3);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    // Relative deltas: the qubit frequency settles before the dispersive shift.
    CHECK(std::abs(*rows[i].delta_f01_ghz / rows[i].f01_ghz) <
          std::abs(*rows[i].delta_chi_mhz / rows[i].chi_mhz));
  }
  const FockBasis descending[] = {{40, 20}, {25, 15}};
  CHECK_THROWS_AS(convergence_report(eff, 0.5, descending), InputError);
}

TEST_CASE("dispersive shift is converged between dimension 2000 and 3500") {
  const auto eff = fitted_device();
  const FockBasis ladder[] = {{50, 40}, {70, 50}};
  const auto rows = convergence_report(eff, 0.5, ladder);
  CHECK(std::abs(*rows[1].delta_chi_mhz) < 0.01);
}

TEST_CASE("invalid bases and parameters") {
  CHECK_THROWS_AS(build_hamiltonian(fitted_device(), 0.5, {1, 5}), InputError);
  EffectiveFluxonium bad = fitted_device();
  bad.cj_ff = -1.0;
  CHECK_THROWS_AS(build_hamiltonian(bad, 0.5, {5, 5}), InputError);
  CHECK_THROWS_AS(build_hamiltonian(fitted_device(), std::nan(""), {5, 5}), InputError);
}
