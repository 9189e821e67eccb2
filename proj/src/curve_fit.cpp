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

#include "gradflux/curve_fit.hpp"

#include <gsl/gsl_blas.h>
#include <gsl/gsl_errno.h>
#include <gsl/gsl_multifit_nlinear.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <memory>
#include <numbers>
#include <numeric>
#include <set>

#include "gradflux/errors.hpp"

namespace gradflux {

const char* to_string(CurveModel model) noexcept {
  switch (model) {
    case CurveModel::exponential: return "exponential";
    case CurveModel::ramsey: return "ramsey";
    case CurveModel::echo: return "echo";
    case CurveModel::parabola: return "parabola";
  }
  return "unknown";
}

CurveModel parse_curve_model(const std::string& text) {
  if (text == "exponential" || text == "t1") return CurveModel::exponential;
  if (text == "ramsey") return CurveModel::ramsey;
  if (text == "echo") return CurveModel::echo;
  if (text == "parabola") return CurveModel::parabola;
  throw InputError("unknown curve model '" + text + "'");
}

void DecayCurve::validate() const {
  const std::size_t minimum = model == CurveModel::parabola ? 3 : 5;
  if (t.size() != y.size()) throw InputError("curve has mismatched t / y lengths");
  if (t.size() < minimum) {
    throw InputError("curve needs at least " + std::to_string(minimum) + " samples");
  }
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!std::isfinite(t[i]) || !std::isfinite(y[i])) throw InputError("curve has non-finite samples");
    if (i > 0 && !(t[i] > t[i - 1])) throw InputError("curve abscissa must be strictly increasing");
  }
}

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct CurveData {
  const std::vector<double>* t;  // normalized
  const std::vector<double>* y;
  bool oscillating;
};

double model_value(const CurveData& d, const double* p, double t) {
  const double envelope = p[0] * std::exp(-t / p[1]);
  if (!d.oscillating) return envelope + p[2];
  return envelope * std::cos(kTwoPi * p[3] * t + p[4]) + p[2];
}

int residuals(const gsl_vector* x, void* raw, gsl_vector* f) {
  const auto* d = static_cast<const CurveData*>(raw);
  const double* p = gsl_vector_const_ptr(x, 0);
  for (std::size_t i = 0; i < d->t->size(); ++i) {
    gsl_vector_set(f, i, model_value(*d, p, (*d->t)[i]) - (*d->y)[i]);
  }
  return GSL_SUCCESS;
}

struct LocalFit {
  std::vector<double> params;
  double chi2 = std::numeric_limits<double>::infinity();
  double tau_variance = std::numeric_limits<double>::quiet_NaN();
  int iterations = 0;
  bool ok = false;
};

LocalFit levenberg_marquardt(const CurveData& data, const std::vector<double>& start) {
  gsl_set_error_handler_off();
  const std::size_t n = data.t->size();
  const std::size_t p = start.size();
  LocalFit out;
  if (n <= p) return out;

  gsl_multifit_nlinear_parameters params = gsl_multifit_nlinear_default_parameters();
  std::unique_ptr<gsl_multifit_nlinear_workspace, decltype(&gsl_multifit_nlinear_free)> work(
      gsl_multifit_nlinear_alloc(gsl_multifit_nlinear_trust, &params, n, p),
      &gsl_multifit_nlinear_free);
  std::unique_ptr<gsl_vector, decltype(&gsl_vector_free)> x(gsl_vector_alloc(p), &gsl_vector_free);
  for (std::size_t i = 0; i < p; ++i) gsl_vector_set(x.get(), i, start[i]);

  gsl_multifit_nlinear_fdf fdf{};
  fdf.f = &residuals;
  fdf.df = nullptr;
  fdf.fvv = nullptr;
  fdf.n = n;
  fdf.p = p;
  fdf.params = const_cast<CurveData*>(&data);

  if (gsl_multifit_nlinear_init(x.get(), &fdf, work.get()) != GSL_SUCCESS) return out;
  int info = 0;
  const int status =
      gsl_multifit_nlinear_driver(1000, 1e-14, 1e-14, 0.0, nullptr, nullptr, &info, work.get());
  if (status != GSL_SUCCESS && status != GSL_EMAXITER) return out;

  const gsl_vector* solution = gsl_multifit_nlinear_position(work.get());
  const gsl_vector* f = gsl_multifit_nlinear_residual(work.get());
  double chi2 = 0.0;
  gsl_blas_ddot(f, f, &chi2);
  out.params.assign(solution->data, solution->data + p);
  out.chi2 = chi2;
  out.iterations = static_cast<int>(gsl_multifit_nlinear_niter(work.get()));
  out.ok = std::isfinite(chi2) && std::all_of(out.params.begin(), out.params.end(),
                                              [](double v) { return std::isfinite(v); });

  std::unique_ptr<gsl_matrix, decltype(&gsl_matrix_free)> covar(gsl_matrix_alloc(p, p),
                                                               &gsl_matrix_free);
  if (gsl_multifit_nlinear_covar(gsl_multifit_nlinear_jac(work.get()), 0.0, covar.get()) ==
      GSL_SUCCESS) {
    const double dof = static_cast<double>(n - p);
    out.tau_variance = gsl_matrix_get(covar.get(), 1, 1) * chi2 / dof;
  }
  return out;
}

double mean_of(const std::vector<double>& v, std::size_t first, std::size_t last) {
  return std::accumulate(v.begin() + static_cast<std::ptrdiff_t>(first),
                         v.begin() + static_cast<std::ptrdiff_t>(last), 0.0) /
         static_cast<double>(last - first);
}

// Dominant oscillation frequency of y - c on the (normalized) time grid.
std::pair<double, double> periodogram_peak(const std::vector<double>& t,
                                           const std::vector<double>& y, double c) {
  const std::size_t n = t.size();
  const double span = t.back() - t.front();
  const double nyquist = 0.5 * static_cast<double>(n - 1) / span;
  const int grid = static_cast<int>(8 * n);
  double best_power = -1.0, best_freq = 0.0, best_phase = 0.0;
  for (int k = 1; k <= grid; ++k) {
    const double nu = nyquist * k / grid;
    std::complex<double> acc{0.0, 0.0};
    for (std::size_t i = 0; i < n; ++i) {
      acc += (y[i] - c) * std::polar(1.0, -kTwoPi * nu * t[i]);
    }
    if (std::norm(acc) > best_power) {
      best_power = std::norm(acc);
      best_freq = nu;
      best_phase = std::arg(acc);
    }
  }
  return {best_freq, best_phase};
}

}  // namespace

DecayFit fit_decay(const DecayCurve& curve) {
  if (curve.model == CurveModel::parabola) throw InputError("use fit_parabola for parabola curves");
  curve.validate();
  const std::size_t n = curve.t.size();

  const auto [y_min, y_max] = std::minmax_element(curve.y.begin(), curve.y.end());
  const double y_scale = std::max({std::abs(*y_min), std::abs(*y_max), 1e-300});
  if (*y_max - *y_min <= 1e-12 * y_scale) {
    throw InputError("curve is constant: no decay resolvable");
  }

  // Work on t / t_scale so that the fit is equivariant under time rescaling.
  const double t_scale = std::max(std::abs(curve.t.front()), std::abs(curve.t.back()));
  std::vector<double> tn(n);
  for (std::size_t i = 0; i < n; ++i) tn[i] = curve.t[i] / t_scale;
  const bool oscillating = curve.model == CurveModel::ramsey;
  const CurveData data{&tn, &curve.y, oscillating};

  const std::size_t tail = std::max<std::size_t>(1, n / 10);
  const double c_tail = mean_of(curve.y, n - tail, n);
  const double c_mean = mean_of(curve.y, 0, n);
  const double span = tn.back() - tn.front();

  std::vector<std::vector<double>> starts;
  const double tau_guesses[] = {0.03, 0.1, 0.3, 1.0, 3.0};
  if (!oscillating) {
    const double a0 = curve.y.front() - c_tail;
    for (double tau : tau_guesses) starts.push_back({a0 != 0.0 ? a0 : 1.0, tau * span, c_tail});
    // Growing starts, so that a rising curve is recognized rather than
    // approximated by a slow decay.
    const double g0 = curve.y.back() - curve.y.front();
    for (double tau : tau_guesses) starts.push_back({g0 != 0.0 ? g0 : 1.0, -tau * span, curve.y.front()});
  } else {
    for (double c0 : {c_tail, c_mean}) {
      const auto [nu, phase] = periodogram_peak(tn, curve.y, c0);
      double a0 = 0.0;
      for (double v : curve.y) a0 = std::max(a0, std::abs(v - c0));
      for (double tau : tau_guesses) starts.push_back({a0, tau * span, c0, nu, phase});
    }
  }

  // Best least-squares solution over all starts; a decaying model is only
  // accepted when that solution actually decays.
  LocalFit best;
  for (const auto& start : starts) {
    LocalFit candidate = levenberg_marquardt(data, start);
    if (candidate.ok && candidate.chi2 < best.chi2) best = candidate;
  }
  if (!best.ok) throw NumericalError("decay fit did not converge");
  if (!(best.params[1] > 0.0)) {
    throw NumericalError("decay fit produced a negative time constant (the curve grows)");
  }
  if (std::abs(best.params[0]) <= 1e-9 * y_scale) {
    throw InputError("fitted amplitude vanishes: no decay resolvable");
  }

  DecayFit out;
  out.model = curve.model;
  out.amplitude = best.params[0];
  out.time_constant = best.params[1] * t_scale;
  out.offset = best.params[2];
  if (oscillating) {
    double a = best.params[0], nu = best.params[3], phase = best.params[4];
    // Canonical form: positive amplitude and detuning, phase in (-pi, pi].
    if (nu < 0.0) {
      nu = -nu;
      phase = -phase;
    }
    if (a < 0.0) {
      a = -a;
      phase += std::numbers::pi;
    }
    phase = std::remainder(phase, kTwoPi);
    out.amplitude = a;
    out.detuning = nu / t_scale;
    out.phase = phase;
  }
  out.time_constant_stderr =
      std::isfinite(best.tau_variance) ? std::sqrt(std::max(0.0, best.tau_variance)) * t_scale : 0.0;
  out.rms_residual = std::sqrt(best.chi2 / static_cast<double>(n));
  out.iterations = best.iterations;
  return out;
}

ParabolaFit fit_parabola(const DecayCurve& curve) {
  DecayCurve checked = curve;
  checked.model = CurveModel::parabola;
  checked.validate();
  const std::size_t n = curve.t.size();

  const std::set<double> distinct(curve.t.begin(), curve.t.end());
  if (distinct.size() < 3) throw InputError("parabola fit needs at least 3 distinct abscissae");

  const double center = std::accumulate(curve.t.begin(), curve.t.end(), 0.0) / n;
  double width = 0.0;
  for (double b : curve.t) width = std::max(width, std::abs(b - center));
  Eigen::MatrixXd design(static_cast<Eigen::Index>(n), 3);
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const double x = (curve.t[i] - center) / width;
    const auto row = static_cast<Eigen::Index>(i);
    design(row, 0) = 1.0;
    design(row, 1) = x;
    design(row, 2) = x * x;
    rhs[row] = curve.y[i];
  }
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < 3) throw InputError("parabola fit is rank deficient");
  const Eigen::Vector3d coef = qr.solve(rhs);

  const double y_scale = rhs.cwiseAbs().maxCoeff();
  const double spread = rhs.maxCoeff() - rhs.minCoeff();
  ParabolaFit out;
  if (std::abs(coef[2]) <= 1e-12 * std::max(spread, 1e-300) || spread <= 1e-15 * y_scale) {
    throw InputError("data are collinear: curvature is not resolvable");
  }
  if (coef[2] > 0.0) {
    out.curvature = 0.0;
    out.curvature_clamped = true;
    out.f_max = rhs.mean();
    out.b_offset = center;
  } else {
    // y = c0 + c1 x + c2 x^2 with x = (B - center) / width.
    const double x0 = -coef[1] / (2.0 * coef[2]);
    out.b_offset = center + x0 * width;
    out.f_max = coef[0] - coef[1] * coef[1] / (4.0 * coef[2]);
    out.curvature = -coef[2] / (width * width);
  }
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = curve.t[i] - out.b_offset;
    const double r = out.f_max - out.curvature * d * d - curve.y[i];
    sum_sq += r * r;
  }
  out.rms_residual = std::sqrt(sum_sq / static_cast<double>(n));
  return out;
}

}  // namespace gradflux
