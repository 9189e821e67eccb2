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

#include <Eigen/Dense>

namespace gradflux {

struct EigenDecomposition {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // columns; empty when not requested
};

/// Full spectrum of a real symmetric matrix (LAPACK divide and conquer).
/// Throws NumericalError with matrix diagnostics on solver failure.
EigenDecomposition symmetric_eigen(const Eigen::MatrixXd& matrix, bool want_vectors = true);

/// max|H - H^T| / max|H|; zero for the empty or zero matrix.
double hermiticity_defect(const Eigen::MatrixXd& matrix);

/// f(A) for symmetric A via its eigendecomposition.
template <typename Fn>
Eigen::MatrixXd symmetric_function(const Eigen::MatrixXd& matrix, Fn&& fn) {
  const EigenDecomposition eig = symmetric_eigen(matrix, true);
  Eigen::VectorXd mapped(eig.values.size());
  for (Eigen::Index i = 0; i < eig.values.size(); ++i) mapped[i] = fn(eig.values[i]);
  return eig.vectors * mapped.asDiagonal() * eig.vectors.transpose();
}

}  // namespace gradflux
