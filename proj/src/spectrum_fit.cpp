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

#include "gradflux/spectrum_fit.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>
#include <gsl/gsl_vector.h>

#include <algorithm>
#include <array>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <numeric>
#include <random>

#include "gradflux/circuit.hpp"
#include "gradflux/parallel.hpp"

namespace gradflux {

const char* to_string(AxisUnit unit) noexcept { return unit == AxisUnit::tesla ? "T" : "phi0"; }

const char* to_string(QubitTransition transition) noexcept {
  return transition == QubitTransition::f01 ? "f01" : "f02";
}

const char* to_string(ForwardModel model) noexcept {
  return model == ForwardModel::qubit_only ? "qubit_only" : "coupled";
}

bool SpectroscopyDataset::uses_field() const noexcept {
  return !rows.empty() && rows.front().unit == AxisUnit::tesla;
}

void SpectroscopyDataset::validate(std::size_t fitted_parameters) const {
  if (rows.empty()) throw InputError("spectroscopy dataset is empty");
  if (rows.size() < fitted_parameters) {
    throw InputError("spectroscopy dataset is under-determined: " + std::to_string(rows.size()) +
                     " rows for " + std::to_string(fitted_parameters) + " parameters");
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const SpectroscopyRow& row = rows[i];
    const std::string where = " (row " + std::to_string(i) + ")";
    if (row.unit != rows.front().unit) throw InputError("mixed axis units in dataset" + where);
    if (!std::isfinite(row.x)) throw InputError("non-finite axis value" + where);
    if (!(row.freq_ghz > 0.0) || !std::isfinite(row.freq_ghz)) {
      throw InputError("frequency must be positive" + where);
    }
    if (!(row.sigma_ghz > 0.0) || !std::isfinite(row.sigma_ghz)) {
      throw InputError("sigma must be positive" + where);
    }
  }
}

namespace {

struct GslErrorHandlerOff {
  GslErrorHandlerOff() { gsl_set_error_handler_off(); }
};
const GslErrorHandlerOff gsl_handler_off;

double row_flux(const SpectroscopyRow& row, const std::optional<FieldAxis>& axis) {
  if (row.unit == AxisUnit::phi0) return row.x;
  if (!axis) throw InputError("field-axis dataset needs a field-to-flux calibration");
  return axis->scale_phi0_per_tesla * row.x + axis->offset_phi0;
}

// Transition energies above the ground state, keyed by flux.
using LevelTable = std::map<double, std::array<double, 2>>;

LevelTable qubit_only_levels(const std::vector<double>& fluxes, const QubitParams& p, int m) {
  const FluxoniumQubit qubit(p.lq_nh, p.cj_ff, p.ej_ghz, m);
  LevelTable table;
  for (double phi : fluxes) {
    if (table.contains(phi)) continue;
    const Eigen::VectorXd e = qubit.levels(phi);
    table[phi] = {e[1] - e[0], e[2] - e[0]};
  }
  return table;
}

LevelTable coupled_levels(const std::vector<double>& fluxes, const QubitParams& p,
                          const FitOptions& options) {
  const ReadoutBranch& ro = options.readout;
  const EffectiveFluxonium eff = reduce_circuit(
      symmetric_circuit(p.lq_nh, ro.ls_nh, ro.lr_nh, ro.cr_ff, p.cj_ff, p.ej_ghz));
  LevelTable table;
  for (double phi : fluxes) {
    if (table.contains(phi)) continue;
    const SpectrumResult s = diagonalize_labeled(build_hamiltonian(eff, phi, options.basis));
    table[phi] = {transition_frequency(s, {0, 0}, {0, 1}, 0.0),
                  transition_frequency(s, {0, 0}, {0, 2}, 0.0)};
  }
  return table;
}

// Maps an unconstrained coordinate onto a bounded parameter.
struct BoundedCoordinate {
  double lo;
  double hi;
  bool logarithmic;

  double value(double u) const {
    const double s = 0.5 * (1.0 + std::tanh(u));
    if (logarithmic) return std::exp(std::log(lo) + s * (std::log(hi) - std::log(lo)));
    return lo + s * (hi - lo);
  }
  double coordinate(double v) const {
    double s = logarithmic ? (std::log(v) - std::log(lo)) / (std::log(hi) - std::log(lo))
                           : (v - lo) / (hi - lo);
    s = std::clamp(s, 1e-9, 1.0 - 1e-9);
    return std::atanh(2.0 * s - 1.0);
  }
};

void check_interval(const Interval& iv, const char* name, bool positive) {
  if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi) || !(iv.lo < iv.hi) ||
      (positive && iv.lo <= 0.0)) {
    throw InputError(std::string("invalid bounds for ") + name);
  }
}

class SpectrumObjective {
 public:
  SpectrumObjective(const SpectroscopyDataset& data, const FitBounds& bounds,
                    const FitOptions& options)
      : data_(data), options_(options) {
    check_interval(bounds.lq_nh, "Lq", true);
    check_interval(bounds.cj_ff, "CJ", true);
    check_interval(bounds.ej_ghz, "EJ", true);
    coords_ = {{bounds.lq_nh.lo, bounds.lq_nh.hi, true},
               {bounds.cj_ff.lo, bounds.cj_ff.hi, true},
               {bounds.ej_ghz.lo, bounds.ej_ghz.hi, true}};
    names_ = {"Lq_eff_nH", "CJ_fF", "EJ_GHz"};
    fit_axis_ = data.uses_field() && !options.pinned_axis;
    if (fit_axis_) {
      check_interval(bounds.field_scale, "field scale", false);
      check_interval(bounds.field_offset, "field offset", false);
      coords_.push_back({bounds.field_scale.lo, bounds.field_scale.hi, bounds.field_scale.lo > 0});
      coords_.push_back({bounds.field_offset.lo, bounds.field_offset.hi, false});
      names_.push_back("field_scale_phi0_per_T");
      names_.push_back("field_offset_phi0");
    }
  }

  std::size_t dimension() const noexcept { return coords_.size(); }
  const std::vector<std::string>& names() const noexcept { return names_; }
  const BoundedCoordinate& coordinate(std::size_t i) const { return coords_[i]; }

  FitParams params_from_values(const std::vector<double>& v) const {
    FitParams p;
    p.qubit = {v[0], v[1], v[2]};
    if (fit_axis_) {
      p.axis = FieldAxis{v[3], v[4]};
    } else if (data_.uses_field()) {
      p.axis = options_.pinned_axis;
    }
    return p;
  }

  std::vector<double> values_from_params(const FitParams& p) const {
    std::vector<double> v = {p.qubit.lq_nh, p.qubit.cj_ff, p.qubit.ej_ghz};
    if (fit_axis_) {
      const FieldAxis axis = p.axis.value_or(FieldAxis{
          std::sqrt(coords_[3].lo * coords_[3].hi), 0.5 * (coords_[4].lo + coords_[4].hi)});
      v.push_back(axis.scale_phi0_per_tesla);
      v.push_back(axis.offset_phi0);
    }
    return v;
  }

  std::vector<double> values_from_coordinates(const double* u) const {
    std::vector<double> v(coords_.size());
    for (std::size_t i = 0; i < coords_.size(); ++i) v[i] = coords_[i].value(u[i]);
    return v;
  }

  double chi2_of_values(const std::vector<double>& v) const {
    std::vector<double> model;
    try {
      model = predict_transitions(data_, params_from_values(v), options_);
    } catch (const std::exception&) {
      return kPenalty;
    }
    double chi2 = 0.0;
    for (std::size_t i = 0; i < model.size(); ++i) {
      const double r = (model[i] - data_.rows[i].freq_ghz) / data_.rows[i].sigma_ghz;
      chi2 += r * r;
    }
    return std::isfinite(chi2) ? chi2 : kPenalty;
  }

  static constexpr double kPenalty = 1e30;

 private:
  const SpectroscopyDataset& data_;
  const FitOptions& options_;
  std::vector<BoundedCoordinate> coords_;
  std::vector<std::string> names_;
  bool fit_axis_ = false;
};

struct StartOutcome {
  std::vector<double> coordinates;
  double objective = std::numeric_limits<double>::infinity();
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
  std::vector<double> history;
};

struct GslContext {
  const SpectrumObjective* objective;
  int* evaluations;
};

double gsl_objective(const gsl_vector* u, void* raw) {
  auto* ctx = static_cast<GslContext*>(raw);
  ++*ctx->evaluations;
  return ctx->objective->chi2_of_values(
      ctx->objective->values_from_coordinates(gsl_vector_const_ptr(u, 0)));
}

using MinimizerPtr = std::unique_ptr<gsl_multimin_fminimizer, decltype(&gsl_multimin_fminimizer_free)>;
using VectorPtr = std::unique_ptr<gsl_vector, decltype(&gsl_vector_free)>;

StartOutcome run_simplex(const SpectrumObjective& objective, std::vector<double> start,
                         const FitOptions& options) {
  const std::size_t n = objective.dimension();
  StartOutcome out;
  GslContext ctx{&objective, &out.evaluations};
  gsl_multimin_function fn{&gsl_objective, n, &ctx};

  constexpr int kMaxRestarts = 4;
  for (int restart = 0; restart <= kMaxRestarts; ++restart) {
    MinimizerPtr minimizer(gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, n),
                           &gsl_multimin_fminimizer_free);
    VectorPtr x(gsl_vector_alloc(n), &gsl_vector_free);
    VectorPtr step(gsl_vector_alloc(n), &gsl_vector_free);
    for (std::size_t i = 0; i < n; ++i) {
      gsl_vector_set(x.get(), i, start[i]);
      gsl_vector_set(step.get(), i, restart == 0 ? 0.3 : 0.05);
    }
    gsl_multimin_fminimizer_set(minimizer.get(), &fn, x.get(), step.get());
    // fval is only filled in by iterate, so evaluate the entry point here.
    const double entry = gsl_objective(x.get(), &ctx);
    if (out.history.empty() || entry < out.history.back()) out.history.push_back(entry);

    bool converged = false;
    int iter = 0;
    for (; iter < options.max_iterations; ++iter) {
      if (gsl_multimin_fminimizer_iterate(minimizer.get()) != GSL_SUCCESS) break;
      const double best = minimizer->fval;
      if (best < out.history.back()) out.history.push_back(best);
      const double size = gsl_multimin_fminimizer_size(minimizer.get());
      if (gsl_multimin_test_size(size, options.simplex_tolerance) == GSL_SUCCESS) {
        converged = true;
        ++iter;
        break;
      }
    }
    out.iterations += iter;
    const double previous = out.objective;
    out.objective = minimizer->fval;
    out.coordinates.assign(minimizer->x->data, minimizer->x->data + n);
    out.converged = converged;
    start = out.coordinates;
    // Restart from the optimum until a fresh simplex no longer improves it.
    if (restart > 0 && previous - out.objective <= 1e-10 * std::max(1.0, previous)) break;
  }
  return out;
}

std::vector<std::vector<double>> latin_hypercube(std::size_t samples, std::size_t dims,
                                                 std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::vector<double>> points(samples, std::vector<double>(dims));
  for (std::size_t d = 0; d < dims; ++d) {
    std::vector<std::size_t> strata(samples);
    std::iota(strata.begin(), strata.end(), 0);
    std::shuffle(strata.begin(), strata.end(), rng);
    for (std::size_t s = 0; s < samples; ++s) {
      // Keep starts away from the saturating edges of the bound map.
      const double fraction = (static_cast<double>(strata[s]) + unit(rng)) / samples;
      points[s][d] = 0.05 + 0.9 * fraction;
    }
  }
  return points;
}

std::vector<double> grid_scan_start(const SpectrumObjective& objective) {
  constexpr int kPerAxis = 7;
  std::vector<double> best_values;
  double best = std::numeric_limits<double>::infinity();
  std::vector<double> values(objective.dimension());
  for (std::size_t d = 3; d < objective.dimension(); ++d) {
    values[d] = objective.coordinate(d).value(0.0);
  }
  for (int i = 0; i < kPerAxis; ++i) {
    for (int j = 0; j < kPerAxis; ++j) {
      for (int k = 0; k < kPerAxis; ++k) {
        const int idx[3] = {i, j, k};
        for (int d = 0; d < 3; ++d) {
          const double s = (idx[d] + 0.5) / kPerAxis;
          values[d] = objective.coordinate(d).value(std::atanh(2.0 * s - 1.0));
        }
        const double f = objective.chi2_of_values(values);
        if (f < best) {
          best = f;
          best_values = values;
        }
      }
    }
  }
  return best_values;
}

}  // namespace

std::vector<double> predict_transitions(const SpectroscopyDataset& data, const FitParams& params,
                                        const FitOptions& options) {
  std::vector<double> fluxes;
  fluxes.reserve(data.rows.size());
  for (const SpectroscopyRow& row : data.rows) fluxes.push_back(row_flux(row, params.axis));
  const LevelTable table = options.model == ForwardModel::qubit_only
                               ? qubit_only_levels(fluxes, params.qubit, options.basis.m_qubit)
                               : coupled_levels(fluxes, params.qubit, options);
  std::vector<double> out(data.rows.size());
  for (std::size_t i = 0; i < data.rows.size(); ++i) {
    const auto& levels = table.at(fluxes[i]);
    out[i] = data.rows[i].transition == QubitTransition::f01 ? levels[0] : levels[1];
  }
  return out;
}

FitResult fit_spectrum(const SpectroscopyDataset& data, const std::optional<FitParams>& init,
                       const FitBounds& bounds, const FitOptions& options) {
  if (options.starts < 1) throw InputError("fit needs at least one start");
  options.basis.validate();
  const SpectrumObjective objective(data, bounds, options);
  data.validate(objective.dimension());

  const std::size_t dims = objective.dimension();
  std::vector<std::vector<double>> starts;
  {
    const std::vector<double> first =
        init ? objective.values_from_params(*init) : grid_scan_start(objective);
    std::vector<double> u(dims);
    for (std::size_t d = 0; d < dims; ++d) u[d] = objective.coordinate(d).coordinate(first[d]);
    starts.push_back(u);
  }
  if (options.starts > 1) {
    for (const auto& s : latin_hypercube(options.starts - 1, dims, options.seed)) {
      std::vector<double> u(dims);
      for (std::size_t d = 0; d < dims; ++d) u[d] = std::atanh(2.0 * s[d] - 1.0);
      starts.push_back(u);
    }
  }

  std::vector<StartOutcome> outcomes(starts.size());
  parallel_for(starts.size(), options.threads,
               [&](std::size_t i) { outcomes[i] = run_simplex(objective, starts[i], options); });

  FitResult result;
  result.model = options.model;
  std::size_t best = 0;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    result.starts.push_back({static_cast<int>(i), outcomes[i].objective, outcomes[i].iterations,
                             outcomes[i].converged});
    result.evaluations += outcomes[i].evaluations;
    if (outcomes[i].objective < outcomes[best].objective) best = i;  // ties keep lower index
  }
  const StartOutcome& winner = outcomes[best];
  const std::vector<double> values = objective.values_from_coordinates(winner.coordinates.data());
  const FitParams fitted = objective.params_from_values(values);

  result.params = fitted.qubit;
  result.axis = fitted.axis;
  result.best_start = static_cast<int>(best);
  result.iterations = winner.iterations;
  result.converged = winner.converged;
  result.objective_history = winner.history;
  result.param_names = objective.names();
  result.param_values = values;
  result.model_ghz = predict_transitions(data, fitted, options);
  result.residual_ghz.resize(data.rows.size());
  double sum_sq = 0.0;
  result.chi2 = 0.0;
  for (std::size_t i = 0; i < data.rows.size(); ++i) {
    result.residual_ghz[i] = result.model_ghz[i] - data.rows[i].freq_ghz;
    sum_sq += result.residual_ghz[i] * result.residual_ghz[i];
    const double w = result.residual_ghz[i] / data.rows[i].sigma_ghz;
    result.chi2 += w * w;
  }
  result.rms_residual_ghz = std::sqrt(sum_sq / static_cast<double>(data.rows.size()));

  // Finite-difference Jacobian of the weighted residuals.
  Eigen::MatrixXd jac(static_cast<Eigen::Index>(data.rows.size()), static_cast<Eigen::Index>(dims));
  for (std::size_t d = 0; d < dims; ++d) {
    std::vector<double> plus = values, minus = values;
    const double h = 1e-6 * std::max(std::abs(values[d]), 1e-3);
    plus[d] += h;
    minus[d] -= h;
    const auto fp = predict_transitions(data, objective.params_from_values(plus), options);
    const auto fm = predict_transitions(data, objective.params_from_values(minus), options);
    for (std::size_t i = 0; i < data.rows.size(); ++i) {
      jac(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) =
          (fp[i] - fm[i]) / (2.0 * h) / data.rows[i].sigma_ghz;
    }
  }
  result.sensitivity.resize(dims);
  result.std_error.assign(dims, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t d = 0; d < dims; ++d) {
    result.sensitivity[d] = jac.col(static_cast<Eigen::Index>(d)).norm();
  }
  const Eigen::MatrixXd normal = jac.transpose() * jac;
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(normal);
  if (lu.isInvertible()) {
    const Eigen::MatrixXd cov = lu.inverse();
    for (std::size_t d = 0; d < dims; ++d) {
      const double var = cov(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
      if (var >= 0.0) result.std_error[d] = std::sqrt(var);
    }
  }

  if (!result.converged) {
    throw FitConvergenceError("spectrum fit did not converge after " +
                                  std::to_string(options.starts) + " starts",
                              result);
  }
  return result;
}

double chi_for_shared_inductance(const SharedInductanceProblem& problem, double ls_nh) {
  const EffectiveFluxonium eff = reduce_circuit(symmetric_circuit(
      problem.lq_eff_nh, ls_nh, problem.lr_nh, problem.cr_ff, problem.cj_ff, problem.ej_ghz));
  const DispersiveShiftResult chi = dispersive_shift(eff, problem.phi_eff, problem.basis);
  if (!chi.valid) {
    throw NumericalError("dispersive shift undefined at Ls = " + std::to_string(ls_nh) +
                         " nH: " + chi.reason);
  }
  return chi.chi_mhz;
}

SharedInductanceFit fit_shared_inductance(double chi_measured_mhz,
                                          const SharedInductanceProblem& problem) {
  if (!std::isfinite(chi_measured_mhz) || chi_measured_mhz == 0.0) {
    throw InputError("measured dispersive shift must be finite and nonzero");
  }
  check_interval(problem.bracket_nh, "Ls bracket", true);
  int evaluations = 0;
  auto residual = [&](double ls) {
    ++evaluations;
    return chi_for_shared_inductance(problem, ls) - chi_measured_mhz;
  };
  const double f_lo = residual(problem.bracket_nh.lo);
  const double f_hi = residual(problem.bracket_nh.hi);
  if (f_lo == 0.0) return {problem.bracket_nh.lo, chi_measured_mhz, evaluations};
  if (f_hi == 0.0) return {problem.bracket_nh.hi, chi_measured_mhz, evaluations};
  if ((f_lo < 0.0) == (f_hi < 0.0)) {
    throw NumericalError(
        "no sign change of chi_model - chi_measured on Ls in [" +
        std::to_string(problem.bracket_nh.lo) + ", " + std::to_string(problem.bracket_nh.hi) +
        "] nH; widen the bracket or check the sign of the measured shift");
  }
  std::uintmax_t max_iter = 200;
  const double tol = problem.tolerance_nh;
  const auto [lo, hi] = boost::math::tools::toms748_solve(
      residual, problem.bracket_nh.lo, problem.bracket_nh.hi, f_lo, f_hi,
      [tol](double a, double b) { return std::abs(b - a) <= tol; }, max_iter);
  const double ls = 0.5 * (lo + hi);
  return {ls, chi_for_shared_inductance(problem, ls), evaluations + 1};
}

}  // namespace gradflux
