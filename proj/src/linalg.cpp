// SPDX-License-Identifier: Apache-2.0
//
// mgsat - distributed precoding for multi-gateway multibeam satellites
// Copyright (C) 2026 The mgsat authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "mgsat/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>

namespace mgsat {

CMat hermitize(const CMat& a) { return 0.5 * (a + a.adjoint()); }

void fix_phase(Eigen::Ref<CVec> v) {
  Eigen::Index best = 0;
  double best_abs = -1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    // Strict comparison keeps the first index among equal magnitudes.
    const double m = std::abs(v(i));
    if (m > best_abs * (1.0 + 1e-12) + 1e-300) {
      best_abs = m;
      best = i;
    }
  }
  if (best_abs > 0.0) {
    v *= std::conj(v(best)) / best_abs;
    v(best) = cd(std::abs(v(best)), 0.0);
  }
}

HermitianEigen hermitian_eig(const CMat& a) {
  Eigen::SelfAdjointEigenSolver<CMat> solver(hermitize(a));
  if (solver.info() != Eigen::Success) {
    throw NumericalError("Hermitian eigendecomposition did not converge");
  }
  const Eigen::Index n = a.rows();
  HermitianEigen out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  // Eigen returns ascending order.
  for (Eigen::Index i = 0; i < n; ++i) {
    out.values(i) = solver.eigenvalues()(n - 1 - i);
    out.vectors.col(i) = solver.eigenvectors().col(n - 1 - i);
    fix_phase(out.vectors.col(i));
  }
  return out;
}

CMat leading_eigenvectors(const CMat& gram, Eigen::Index k, const std::string& what) {
  if (k > gram.rows()) {
    throw ConfigError(what + ": requested " + std::to_string(k) + " eigenvectors of a " +
                      std::to_string(gram.rows()) + "x" + std::to_string(gram.rows()) + " matrix");
  }
  const HermitianEigen eig = hermitian_eig(gram);
  const double top = eig.values.size() > 0 ? eig.values(0) : 0.0;
  if (k > 0 && (!(top > 0.0) || eig.values(k - 1) <= kRankTolerance * top)) {
    throw NumericalError(what + " rank-deficient");
  }
  return eig.vectors.leftCols(k);
}

CMat orthonormal_columns(const CMat& b) {
  const Eigen::Index n = b.rows();
  const Eigen::Index k = b.cols();
  if (k > n) {
    throw ConfigError("orthonormal_columns: more columns than rows");
  }
  if (k == 0) {
    return CMat(n, 0);
  }
  Eigen::HouseholderQR<CMat> qr(b);
  const CMat r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  CMat q = qr.householderQ() * CMat::Identity(n, k);
  double max_diag = 0.0;
  for (Eigen::Index i = 0; i < k; ++i) {
    max_diag = std::max(max_diag, std::abs(r(i, i)));
  }
  for (Eigen::Index i = 0; i < k; ++i) {
    const double m = std::abs(r(i, i));
    if (!(m > 1e-10 * max_diag)) {
      throw NumericalError("beamformer matrix rank-deficient");
    }
    // Q R = Q diag(p) diag(p)^* R, with p_i = r_ii / |r_ii|.
    q.col(i) *= r(i, i) / m;
  }
  return q;
}

CMat random_semi_unitary(Rng& rng, Eigen::Index n, Eigen::Index k) {
  return orthonormal_columns(random_complex_matrix(rng, n, k));
}

double semi_unitarity_error(const CMat& b) {
  return (b.adjoint() * b - CMat::Identity(b.cols(), b.cols())).norm();
}

}  // namespace mgsat
