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

#include "gradflux/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <regex>
#include <sstream>

#include "gradflux/linalg.hpp"
#include "gradflux/parallel.hpp"
#include "gradflux/units.hpp"

namespace gradflux {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// zpf * (a + a^dagger) truncated to `size` Fock states.
Eigen::MatrixXd ladder_position(int size, double zero_point) {
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(size, size);
  for (int k = 1; k < size; ++k) {
    const double element = zero_point * std::sqrt(static_cast<double>(k));
    x(k - 1, k) = element;
    x(k, k - 1) = element;
  }
  return x;
}

void require_positive(double value, const char* name) {
  if (!std::isfinite(value) || value <= 0.0) {
    throw InputError(std::string(name) + " must be finite and positive");
  }
}

}  // namespace

void FockBasis::validate() const {
  if (m_qubit < 2 || n_res < 2) {
    throw InputError("Fock basis needs at least 2 qubit and 2 resonator states, got m=" +
                     std::to_string(m_qubit) + " n=" + std::to_string(n_res));
  }
}

std::string LevelLabel::to_string() const {
  return "|" + std::to_string(n_res) + "," + std::to_string(m_qubit) + ">";
}

FluxoniumQubit::FluxoniumQubit(double lq_nh, double cj_ff, double ej_ghz, int m_qubit)
    : m_(m_qubit), ej_ghz_(ej_ghz) {
  require_positive(lq_nh, "Lq");
  require_positive(cj_ff, "CJ");
  if (!std::isfinite(ej_ghz) || ej_ghz < 0.0) throw InputError("EJ must be finite and >= 0");
  if (m_qubit < 2) throw InputError("qubit basis needs at least 2 Fock states");
  plasma_ghz_ = units::lc_frequency_ghz(lq_nh, cj_ff);
  phase_ = ladder_position(m_, units::phase_zero_point(lq_nh, cj_ff));
  const EigenDecomposition eig = symmetric_eigen(phase_, true);
  phase_eigenvalues_ = eig.values;
  phase_eigenvectors_ = eig.vectors;
}

Eigen::MatrixXd FluxoniumQubit::hamiltonian(double phi_ext) const {
  Eigen::VectorXd cosine(m_);
  const double offset = kTwoPi * phi_ext;
  for (int k = 0; k < m_; ++k) cosine[k] = std::cos(phase_eigenvalues_[k] + offset);
  Eigen::MatrixXd h = -ej_ghz_ * (phase_eigenvectors_ * cosine.asDiagonal() *
                                  phase_eigenvectors_.transpose());
  for (int k = 0; k < m_; ++k) h(k, k) += plasma_ghz_ * k;
  // Symmetrize away rounding from the rotation.
  return 0.5 * (h + h.transpose());
}

Eigen::VectorXd FluxoniumQubit::levels(double phi_ext) const {
  return symmetric_eigen(hamiltonian(phi_ext), false).values;
}

HamiltonianMatrix build_hamiltonian(const EffectiveFluxonium& eff, double phi_eff,
                                    const FockBasis& basis) {
  eff.validate();
  basis.validate();
  if (!std::isfinite(phi_eff)) throw InputError("flux must be finite");
  const int m = basis.m_qubit;
  const int n = basis.n_res;

  const FluxoniumQubit qubit(eff.lq_nh, eff.cj_ff, eff.ej_ghz, m);
  const Eigen::MatrixXd hq = qubit.hamiltonian(phi_eff);
  const double fr = units::lc_frequency_ghz(eff.lr_nh, eff.cr_ff);

  // -Phi_r Phi_q / (2 Lrq) = -(E_L(Lrq) / 2) phi_r phi_q in reduced phases.
  double coupling = 0.0;
  if (eff.coupled()) coupling = 0.5 * units::inductive_energy_ghz(eff.lrq_nh);
  const double zr = units::phase_zero_point(eff.lr_nh, eff.cr_ff);
  const Eigen::MatrixXd& phase_q = qubit.phase_operator();

  HamiltonianMatrix out;
  out.basis = basis;
  out.qubit_reference = hq;
  out.matrix = Eigen::MatrixXd::Zero(basis.dimension(), basis.dimension());
  for (int r = 0; r < n; ++r) {
    auto diag = out.matrix.block(r * m, r * m, m, m);
    diag = hq;
    diag.diagonal().array() += fr * r;
    if (coupling != 0.0 && r + 1 < n) {
      const double element = -coupling * zr * std::sqrt(static_cast<double>(r + 1));
      out.matrix.block(r * m, (r + 1) * m, m, m) = element * phase_q;
      out.matrix.block((r + 1) * m, r * m, m, m) = element * phase_q;
    }
  }
  return out;
}

std::optional<std::size_t> SpectrumResult::index_of(const LevelLabel& label) const {
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (levels[i].retained && levels[i].label == label) return i;
  }
  return std::nullopt;
}

SpectrumResult diagonalize_labeled(const HamiltonianMatrix& hamiltonian) {
  const FockBasis& basis = hamiltonian.basis;
  basis.validate();
  const Eigen::Index dim = basis.dimension();
  if (hamiltonian.matrix.rows() != dim || hamiltonian.matrix.cols() != dim) {
    throw InputError("Hamiltonian dimension does not match its Fock basis");
  }
  const double defect = hermiticity_defect(hamiltonian.matrix);
  if (defect > 1e-12) {
    throw InputError("Hamiltonian is not Hermitian (relative defect " + std::to_string(defect) +
                     ")");
  }

  const EigenDecomposition eig = symmetric_eigen(hamiltonian.matrix, true);
  const int m = basis.m_qubit;

  Eigen::MatrixXd reference = Eigen::MatrixXd::Identity(m, m);
  if (hamiltonian.qubit_reference.size() != 0) {
    if (hamiltonian.qubit_reference.rows() != m) {
      throw InputError("qubit reference block does not match the qubit basis");
    }
    reference = symmetric_eigen(hamiltonian.qubit_reference, true).vectors;
  }

  SpectrumResult out;
  out.energies = eig.values;
  out.levels.assign(static_cast<std::size_t>(dim), LevelInfo{});
  std::vector<double> best(static_cast<std::size_t>(dim), -1.0);
  for (int r = 0; r < basis.n_res; ++r) {
    const Eigen::MatrixXd projected =
        reference.transpose() * eig.vectors.middleRows(static_cast<Eigen::Index>(r) * m, m);
    for (Eigen::Index level = 0; level < dim; ++level) {
      Eigen::Index row = 0;
      const double overlap = projected.col(level).cwiseAbs2().maxCoeff(&row);
      auto& slot = best[static_cast<std::size_t>(level)];
      if (overlap > slot) {
        slot = overlap;
        out.levels[static_cast<std::size_t>(level)].label = {r, static_cast<int>(row)};
        out.levels[static_cast<std::size_t>(level)].confidence = overlap;
      }
    }
  }

  // Resolve duplicates: the best-matching level keeps the label.
  std::vector<std::size_t> order(out.levels.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return out.levels[a].confidence > out.levels[b].confidence;
  });
  std::vector<char> taken(static_cast<std::size_t>(dim), 0);
  for (std::size_t idx : order) {
    const LevelLabel& label = out.levels[idx].label;
    const std::size_t key = static_cast<std::size_t>(label.n_res) * m + label.m_qubit;
    if (!taken[key]) {
      taken[key] = 1;
      out.levels[idx].retained = true;
    }
  }
  return out;
}

UnresolvedLabelError::UnresolvedLabelError(LevelLabel label, double confidence)
    : NumericalError("level " + label.to_string() + " is not resolved (overlap confidence " +
                     std::to_string(confidence) + ")"),
      label_(label),
      confidence_(confidence) {}

namespace {

double resolved_energy(const SpectrumResult& spectrum, const LevelLabel& label, double threshold) {
  const auto idx = spectrum.index_of(label);
  if (!idx) throw UnresolvedLabelError(label, 0.0);
  const double confidence = spectrum.levels[*idx].confidence;
  if (confidence < threshold) throw UnresolvedLabelError(label, confidence);
  return spectrum.energies[static_cast<Eigen::Index>(*idx)];
}

}  // namespace

double transition_frequency(const SpectrumResult& spectrum, const LevelLabel& from,
                            const LevelLabel& to, double threshold) {
  if (from == to) {
    resolved_energy(spectrum, from, threshold);
    return 0.0;
  }
  return resolved_energy(spectrum, to, threshold) - resolved_energy(spectrum, from, threshold);
}

DispersiveShiftResult dispersive_shift(const SpectrumResult& spectrum, double phi_eff,
                                       double threshold) {
  DispersiveShiftResult out;
  out.flux = phi_eff;
  out.chi_mhz = std::numeric_limits<double>::quiet_NaN();
  const LevelLabel needed[4] = {{0, 0}, {1, 0}, {0, 1}, {1, 1}};
  double energy[4] = {};
  double min_confidence = 1.0;
  for (int k = 0; k < 4; ++k) {
    const auto idx = spectrum.index_of(needed[k]);
    if (!idx) {
      out.min_confidence = 0.0;
      out.reason = "level " + needed[k].to_string() + " not labeled";
      return out;
    }
    min_confidence = std::min(min_confidence, spectrum.levels[*idx].confidence);
    energy[k] = spectrum.energies[static_cast<Eigen::Index>(*idx)];
  }
  out.min_confidence = min_confidence;
  if (min_confidence < threshold) {
    out.reason = "near avoided crossing (overlap confidence " + std::to_string(min_confidence) + ")";
    return out;
  }
  out.valid = true;
  out.chi_mhz = ((energy[3] - energy[2]) - (energy[1] - energy[0])) * 1e3;
  return out;
}

DispersiveShiftResult dispersive_shift(const EffectiveFluxonium& eff, double phi_eff,
                                       const FockBasis& basis, double threshold) {
  return dispersive_shift(diagonalize_labeled(build_hamiltonian(eff, phi_eff, basis)), phi_eff,
                          threshold);
}

TransitionSpec TransitionSpec::parse(const std::string& text) {
  if (text == "f01") return {text, {0, 0}, {0, 1}};
  if (text == "f02") return {text, {0, 0}, {0, 2}};
  if (text == "f12") return {text, {0, 1}, {0, 2}};
  if (text == "fr") return {text, {0, 0}, {1, 0}};
  static const std::regex explicit_form(R"(^\s*(\d+)\s*[,:]\s*(\d+)\s*->\s*(\d+)\s*[,:]\s*(\d+)\s*$)");
  std::smatch match;
  if (std::regex_match(text, match, explicit_form)) {
    // Canonical name uses ':' so it survives inside CSV cells and lists.
    return {match.str(1) + ":" + match.str(2) + "->" + match.str(3) + ":" + match.str(4),
            {std::stoi(match[1]), std::stoi(match[2])},
            {std::stoi(match[3]), std::stoi(match[4])}};
  }
  throw InputError("unknown transition '" + text + "' (use f01, f02, f12, fr or n:m->n:m)");
}

std::vector<SweepPoint> flux_sweep(const EffectiveFluxonium& eff, std::span<const double> flux_grid,
                                   const FockBasis& basis,
                                   std::span<const TransitionSpec> transitions,
                                   const SweepOptions& options) {
  eff.validate();
  basis.validate();
  for (double phi : flux_grid) {
    if (!std::isfinite(phi)) throw InputError("flux grid contains a non-finite value");
  }
  std::vector<SweepPoint> points(flux_grid.size());
  parallel_for(flux_grid.size(), options.threads, [&](std::size_t i) {
    SweepPoint& point = points[i];
    point.flux = flux_grid[i];
    point.freq_ghz.assign(transitions.size(), std::nullopt);
    point.chi.flux = point.flux;
    point.chi.chi_mhz = std::numeric_limits<double>::quiet_NaN();
    try {
      const SpectrumResult spectrum =
          diagonalize_labeled(build_hamiltonian(eff, point.flux, basis));
      for (std::size_t t = 0; t < transitions.size(); ++t) {
        try {
          point.freq_ghz[t] = transition_frequency(spectrum, transitions[t].from,
                                                   transitions[t].to, options.overlap_threshold);
        } catch (const UnresolvedLabelError&) {
          // Left empty; reported as invalid.
        }
      }
      point.chi = dispersive_shift(spectrum, point.flux, options.overlap_threshold);
    } catch (const std::exception& ex) {
      point.error = ex.what();
    }
  });
  return points;
}

Eigen::VectorXd single_loop_reference(double lq_nh, double cj_ff, double ej_ghz, double phi_ext,
                                      int m_qubit) {
  return FluxoniumQubit(lq_nh, cj_ff, ej_ghz, m_qubit).levels(phi_ext);
}

std::vector<ConvergenceRow> convergence_report(const EffectiveFluxonium& eff, double phi_eff,
                                               std::span<const FockBasis> ladder,
                                               double threshold) {
  for (std::size_t i = 1; i < ladder.size(); ++i) {
    if (ladder[i].dimension() <= ladder[i - 1].dimension()) {
      throw InputError("convergence ladder must be strictly ascending in dimension");
    }
  }
  std::vector<ConvergenceRow> rows;
  rows.reserve(ladder.size());
  for (const FockBasis& basis : ladder) {
    const SpectrumResult spectrum = diagonalize_labeled(build_hamiltonian(eff, phi_eff, basis));
    ConvergenceRow row;
    row.basis = basis;
    row.f01_ghz = transition_frequency(spectrum, {0, 0}, {0, 1}, threshold);
    row.chi_mhz = dispersive_shift(spectrum, phi_eff, threshold).chi_mhz;
    if (!rows.empty()) {
      row.delta_f01_ghz = row.f01_ghz - rows.back().f01_ghz;
      row.delta_chi_mhz = row.chi_mhz - rows.back().chi_mhz;
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace gradflux
