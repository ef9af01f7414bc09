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

#pragma once

#include "mgsat/random.hpp"
#include "mgsat/types.hpp"

namespace mgsat {

/// Eigenvalues below this fraction of the largest are treated as zero.
inline constexpr double kRankTolerance = 1e-12;

/// Eigen-pairs of a Hermitian matrix. Values are sorted descending and each
/// eigenvector is scaled by a unit-modulus phase so that its largest-magnitude
/// entry (first such entry on ties) is real and positive.
struct HermitianEigen {
  RVec values;
  CMat vectors;
};

HermitianEigen hermitian_eig(const CMat& a);

/// (A + A^H) / 2.
CMat hermitize(const CMat& a);

/// Rotates `v` in place so that its largest-magnitude entry is real positive.
void fix_phase(Eigen::Ref<CVec> v);

/// The k dominant eigenvectors of a Hermitian PSD matrix. Throws
/// NumericalError mentioning `what` when the k-th eigenvalue falls below the
/// rank tolerance.
CMat leading_eigenvectors(const CMat& gram, Eigen::Index k, const std::string& what);

/// Q factor of the thin QR decomposition of `b`, with the phases chosen so the
/// R factor has a real positive diagonal. An input that already has
/// orthonormal columns is returned unchanged up to roundoff.
CMat orthonormal_columns(const CMat& b);

/// Haar-like random n x k matrix with orthonormal columns.
CMat random_semi_unitary(Rng& rng, Eigen::Index n, Eigen::Index k);

/// ||B^H B - I||_F.
double semi_unitarity_error(const CMat& b);

/// Orthogonal projector onto the column space of a matrix with orthonormal
/// columns.
inline CMat projector(const CMat& b) { return b * b.adjoint(); }

}  // namespace mgsat
