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

#include <string>
#include <vector>

#include "mgsat/scenario.hpp"
#include "mgsat/types.hpp"

namespace mgsat {

enum class BfnMode { adaptive, nulling, coarse, prefixed };

std::string to_string(BfnMode mode);

/// Null-steering beamformer and the intermediate products of its design.
struct NullingBeamformer {
  CMat B;      // n x k, Vbar0 * B0
  CMat Vbar0;  // n x (n - k_bar), orthonormal basis of the null space of Hbar
  CMat B0;     // (n - k_bar) x k
  CMat Hbar;   // k_bar x n, protected users seen from this gateway's feeds
  CMat Q;      // k x (n - k_bar), H_mm * Vbar0
};

/// One beamformer per cluster; the nulling fields are filled in nulling mode
/// only.
struct BeamformerSet {
  BfnMode mode = BfnMode::adaptive;
  std::vector<CMat> B;
  std::vector<CMat> Vbar0;
  std::vector<CMat> B0;
  std::vector<CMat> Hbar;
  std::vector<CMat> Q;
};

/// The k dominant eigenvectors of H_mm^H H_mm (k = rows of H_mm). This is
/// the semi-unitary B minimizing trace{(B^H H^H H B)^{-1}}.
CMat bfn_adaptive(const CMat& H_mm);

/// Adaptive design restricted to the null space of the protected-user
/// channel Hbar, so that Hbar * B = 0.
NullingBeamformer bfn_nulling(const CMat& H_mm, const CMat& Hbar);

/// The k dominant eigenvectors of an expected Gramian.
CMat bfn_coarse(const CMat& G_expected, int k);

/// Orthonormal basis of the column space of a given beamformer.
CMat bfn_prefixed(const CMat& B_given);

/// Regularized precoder of one gateway with its eigen-quantities.
struct ClusterPrecoder {
  CMat T;       // k x k
  double t = 0.0;
  double gamma = 0.0;
  CMat U;       // eigenvectors of B^H H^H H B
  RVec lambda;  // matching eigenvalues, descending
};

/// T = sqrt(t) (B^H H^H H B + gamma I)^{-1} B^H H^H with trace{T T^H} = P_m.
ClusterPrecoder precoder_Tm(const CMat& B, const CMat& H_mm, double gamma, double P_m);

/// Eigen-decomposition of B^H H_mm^H H_mm B (descending, phase-fixed).
void effective_gram_eig(const CMat& B, const CMat& H_mm, CMat& U, RVec& lambda);

/// Expected leakage Gramian sum_{p != m} E[H_pm^H H_pm] with unit weights.
CMat build_sigma_hat(const ExpectedGramians& gramians, int m);

/// Instantaneous leakage Gramian sum_{p != m} H_pm^H H_pm.
CMat build_sigma_instantaneous(const ChannelRealization& ch, int m);

/// The k_bar off-cluster users whose beam centers lie nearest to the
/// centroid of cluster m's beam centers (ties to the lower user index).
std::vector<int> protected_users(const Scenario& scenario, int m);

/// Rows of the protected users restricted to gateway m's feeds.
CMat protected_channel(const ChannelRealization& ch, const std::vector<int>& users, int m);

}  // namespace mgsat
