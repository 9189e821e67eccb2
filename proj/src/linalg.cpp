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

#include "gradflux/linalg.hpp"

#include <lapacke.h>

#include <sstream>

#include "gradflux/errors.hpp"

namespace gradflux {

double hermiticity_defect(const Eigen::MatrixXd& matrix) {
  if (matrix.size() == 0) return 0.0;
  const double scale = matrix.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  return (matrix - matrix.transpose()).cwiseAbs().maxCoeff() / scale;
}

EigenDecomposition symmetric_eigen(const Eigen::MatrixXd& matrix, bool want_vectors) {
  const Eigen::Index n = matrix.rows();
  if (matrix.cols() != n) throw InputError("symmetric_eigen: matrix is not square");
  EigenDecomposition out;
  out.values.resize(n);
  if (n == 0) return out;
  if (!matrix.allFinite()) throw NumericalError("symmetric_eigen: matrix has non-finite entries");

  Eigen::MatrixXd work = matrix;  // column-major; overwritten with eigenvectors
  const lapack_int info =
      LAPACKE_dsyevd(LAPACK_COL_MAJOR, want_vectors ? 'V' : 'N', 'L', static_cast<lapack_int>(n),
                     work.data(), static_cast<lapack_int>(n), out.values.data());
  if (info != 0) {
    std::ostringstream msg;
    msg << "dsyevd failed (info=" << info << ") for dimension " << n
        << ", max|H|=" << matrix.cwiseAbs().maxCoeff()
        << ", hermiticity defect=" << hermiticity_defect(matrix);
    throw NumericalError(msg.str());
  }
  if (want_vectors) out.vectors = std::move(work);
  return out;
}

}  // namespace gradflux
