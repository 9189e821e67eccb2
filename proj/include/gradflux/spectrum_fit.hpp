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

// Recovery of effective fluxonium parameters from two-tone spectroscopy, and
// of the shared readout inductance from a measured dispersive shift.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gradflux/errors.hpp"
#include "gradflux/spectrum.hpp"

namespace gradflux {

inline constexpr double kDefaultFrequencySigmaGhz = 1e-3;

enum class AxisUnit { tesla, phi0 };
enum class QubitTransition { f01, f02 };

const char* to_string(AxisUnit unit) noexcept;
const char* to_string(QubitTransition transition) noexcept;

struct SpectroscopyRow {
  double x = 0.0;  // field [T] or effective flux [Phi0], see `unit`
  AxisUnit unit = AxisUnit::phi0;
  QubitTransition transition = QubitTransition::f01;
  double freq_ghz = 0.0;
  double sigma_ghz = kDefaultFrequencySigmaGhz;
};

struct SpectroscopyDataset {
  std::vector<SpectroscopyRow> rows;

  bool uses_field() const noexcept;
  /// Throws InputError for empty or under-determined data, mixed axis
  /// units, or non-positive frequencies / uncertainties.
  void validate(std::size_t fitted_parameters) const;
};

struct QubitParams {
  double lq_nh = 0.0;
  double cj_ff = 0.0;
  double ej_ghz = 0.0;
};

/// phi = scale * B + offset for datasets recorded against applied field.
struct FieldAxis {
  double scale_phi0_per_tesla = 0.0;
  double offset_phi0 = 0.0;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

struct FitBounds {
  Interval lq_nh{40.0, 1000.0};
  Interval cj_ff{0.5, 20.0};
  Interval ej_ghz{0.2, 50.0};
  Interval field_scale{1e5, 1e9};  // Phi0 / T
  Interval field_offset{-0.5, 0.5};
};

enum class ForwardModel { qubit_only, coupled };

const char* to_string(ForwardModel model) noexcept;

/// Readout branch used by the coupled forward model; the qubit side is
/// realized through symmetric_circuit().
struct ReadoutBranch {
  double lr_nh = 21.6;
  double cr_ff = 20.2;
  double ls_nh = 2.8;
};

struct FitOptions {
  ForwardModel model = ForwardModel::qubit_only;
  ReadoutBranch readout;
  FockBasis basis{25, 6};  // n_res is ignored by the qubit-only model
  int starts = 8;
  std::uint64_t seed = 1;
  int max_iterations = 3000;
  double simplex_tolerance = 1e-8;
  unsigned threads = 1;
  std::optional<FieldAxis> pinned_axis;
};

struct FitParams {
  QubitParams qubit;
  std::optional<FieldAxis> axis;
};

struct StartRecord {
  int start = 0;
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct FitResult {
  QubitParams params;
  std::optional<FieldAxis> axis;  // fitted or pinned, when the data use field
  ForwardModel model = ForwardModel::qubit_only;

  double chi2 = 0.0;
  double rms_residual_ghz = 0.0;
  std::vector<double> model_ghz;
  std::vector<double> residual_ghz;  // model - measured, per row

  std::vector<std::string> param_names;
  std::vector<double> param_values;
  std::vector<double> sensitivity;  // |d(weighted residuals)/d(param)|
  std::vector<double> std_error;    // sqrt(diag((J^T J)^-1)), NaN if singular

  bool converged = false;
  int iterations = 0;
  int evaluations = 0;
  int best_start = 0;
  std::vector<double> objective_history;  // accepted iterations of the best start
  std::vector<StartRecord> starts;
};

class FitConvergenceError : public NumericalError {
 public:
  FitConvergenceError(const std::string& what, FitResult best)
      : NumericalError(what), best_(std::move(best)) {}
  const FitResult& best_so_far() const noexcept { return best_; }

 private:
  FitResult best_;
};

/// Forward model: predicted frequency for every row of `data`.
std::vector<double> predict_transitions(const SpectroscopyDataset& data, const FitParams& params,
                                        const FitOptions& options);

/// Weighted least-squares fit by bounded multi-start Nelder-Mead. When
/// `init` is empty the first start comes from a coarse grid scan of the
/// objective; the remaining starts are Latin-hypercube samples over
/// `bounds`, seeded by options.seed.
FitResult fit_spectrum(const SpectroscopyDataset& data, const std::optional<FitParams>& init,
                       const FitBounds& bounds, const FitOptions& options);

struct SharedInductanceProblem {
  double lq_eff_nh = 172.0;
  double cj_ff = 3.4;
  double ej_ghz = 5.1;
  double lr_nh = 21.6;
  double cr_ff = 20.2;
  FockBasis basis{25, 15};
  double phi_eff = 0.5;
  Interval bracket_nh{1e-4, 10.0};
  double tolerance_nh = 1e-7;
};

/// Model dispersive shift in MHz for a given shared inductance, with the
/// remaining parameters held fixed.
double chi_for_shared_inductance(const SharedInductanceProblem& problem, double ls_nh);

struct SharedInductanceFit {
  double ls_nh = 0.0;
  double chi_model_mhz = 0.0;
  int evaluations = 0;
};

/// Solves chi_model(Ls) = chi_measured by bracketed root search.
SharedInductanceFit fit_shared_inductance(double chi_measured_mhz,
                                          const SharedInductanceProblem& problem);

}  // namespace gradflux
