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

// Coupled readout-resonator / fluxonium spectrum in a truncated product Fock
// basis. Basis index is n_res_index * m_qubit + m_qubit_index.

#include <Eigen/Dense>
#include <compare>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gradflux/circuit.hpp"
#include "gradflux/errors.hpp"

namespace gradflux {

inline constexpr double kDefaultOverlapThreshold = 0.7;

struct FockBasis {
  int m_qubit = 25;
  int n_res = 15;

  int dimension() const noexcept { return m_qubit * n_res; }
  void validate() const;
};

/// Bare-state label |n_r m_q>: resonator photon number, qubit level.
struct LevelLabel {
  int n_res = 0;
  int m_qubit = 0;

  friend auto operator<=>(const LevelLabel&, const LevelLabel&) = default;
  std::string to_string() const;
};

/// Standalone fluxonium in the harmonic basis of (Lq, CJ). The phase
/// operator's eigendecomposition is cached so that many flux points can be
/// evaluated cheaply.
class FluxoniumQubit {
 public:
  FluxoniumQubit(double lq_nh, double cj_ff, double ej_ghz, int m_qubit);

  /// Harmonic part plus -EJ cos(phi + 2 pi phi_ext), in GHz.
  Eigen::MatrixXd hamiltonian(double phi_ext) const;
  Eigen::VectorXd levels(double phi_ext) const;

  const Eigen::MatrixXd& phase_operator() const noexcept { return phase_; }
  int size() const noexcept { return m_; }

 private:
  int m_;
  double ej_ghz_;
  double plasma_ghz_;
  Eigen::MatrixXd phase_;
  Eigen::VectorXd phase_eigenvalues_;
  Eigen::MatrixXd phase_eigenvectors_;
};

struct HamiltonianMatrix {
  Eigen::MatrixXd matrix;  // GHz
  FockBasis basis;
  /// Uncoupled EJ-inclusive qubit block used as the labeling reference.
  /// When empty, the harmonic Fock states are used instead.
  Eigen::MatrixXd qubit_reference;
};

HamiltonianMatrix build_hamiltonian(const EffectiveFluxonium& eff, double phi_eff,
                                    const FockBasis& basis);

struct LevelInfo {
  LevelLabel label;
  double confidence = 0.0;  // squared overlap with the bare state
  bool retained = false;    // false when a better-matching level owns the label
};

struct SpectrumResult {
  Eigen::VectorXd energies;  // ascending, GHz
  std::vector<LevelInfo> levels;

  /// Level carrying `label` among the retained labels.
  std::optional<std::size_t> index_of(const LevelLabel& label) const;
};

SpectrumResult diagonalize_labeled(const HamiltonianMatrix& hamiltonian);

class UnresolvedLabelError : public NumericalError {
 public:
  UnresolvedLabelError(LevelLabel label, double confidence);
  LevelLabel label() const noexcept { return label_; }
  /// Best overlap found for the label; zero when no level carries it.
  double confidence() const noexcept { return confidence_; }

 private:
  LevelLabel label_;
  double confidence_;
};

/// E(to) - E(from) in GHz. Throws UnresolvedLabelError when either label is
/// missing or its overlap confidence is below `threshold`.
double transition_frequency(const SpectrumResult& spectrum, const LevelLabel& from,
                            const LevelLabel& to, double threshold = kDefaultOverlapThreshold);

struct DispersiveShiftResult {
  double chi_mhz = 0.0;  // NaN when invalid
  double flux = 0.0;
  bool valid = false;
  double min_confidence = 0.0;
  std::string reason;  // why the point was excluded
};

/// chi = [E(1,1) - E(0,1)] - [E(1,0) - E(0,0)] from an already labeled
/// spectrum.
DispersiveShiftResult dispersive_shift(const SpectrumResult& spectrum, double phi_eff,
                                       double threshold = kDefaultOverlapThreshold);

DispersiveShiftResult dispersive_shift(const EffectiveFluxonium& eff, double phi_eff,
                                       const FockBasis& basis,
                                       double threshold = kDefaultOverlapThreshold);

struct TransitionSpec {
  std::string name;
  LevelLabel from;
  LevelLabel to;

  /// Accepts f01, f02, f12, fr, or an explicit "a:b->c:d" (or "a,b->c,d")
  /// in (n_r, m_q).
  static TransitionSpec parse(const std::string& text);
};

struct SweepPoint {
  double flux = 0.0;
  std::vector<std::optional<double>> freq_ghz;  // one per requested transition
  DispersiveShiftResult chi;
  std::string error;  // non-empty when the point failed as a whole
};

struct SweepOptions {
  double overlap_threshold = kDefaultOverlapThreshold;
  unsigned threads = 1;
};

std::vector<SweepPoint> flux_sweep(const EffectiveFluxonium& eff, std::span<const double> flux_grid,
                                   const FockBasis& basis,
                                   std::span<const TransitionSpec> transitions,
                                   const SweepOptions& options = {});

/// Ascending eigenvalues of the standalone single-loop fluxonium.
Eigen::VectorXd single_loop_reference(double lq_nh, double cj_ff, double ej_ghz, double phi_ext,
                                      int m_qubit);

struct ConvergenceRow {
  FockBasis basis;
  double f01_ghz = 0.0;
  double chi_mhz = 0.0;
  std::optional<double> delta_f01_ghz;  // relative to the previous row
  std::optional<double> delta_chi_mhz;
};

std::vector<ConvergenceRow> convergence_report(const EffectiveFluxonium& eff, double phi_eff,
                                               std::span<const FockBasis> ladder,
                                               double threshold = kDefaultOverlapThreshold);

}  // namespace gradflux
