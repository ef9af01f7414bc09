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

#include <vector>

#include "mgsat/metrics.hpp"
#include "mgsat/scenario.hpp"
#include "mgsat/types.hpp"

namespace mgsat {

/// Quadratic cost trace{F^H A F - F^H X - X^H F} under trace{F F^H} <= P.
struct QuadraticSubproblem {
  CMat A;  // n x n Hermitian PSD
  CMat X;  // n x k
  double P = 0.0;
};

/// A_m = sum_p H_pm^H D_p^H D_p H_pm and X_m = H_mm^H D_m^H for cluster m.
QuadraticSubproblem build_subproblem(const ChannelRealization& ch,
                                     const std::vector<ReceiverGains>& D, int m, double power);

/// Transmit power of (A + nu I)^{-1} X in the eigenbasis of A:
/// sum_i ||row_i(Xt)||^2 / (eigvals_i + nu)^2. A zero denominator with a
/// nonzero row yields +infinity.
double phi(double nu, const RVec& eigvals, const CMat& Xt);

struct MultiplierSolution {
  double nu = 0.0;
  CMat F;
};

/// Minimizer of the quadratic subproblem. Returns nu = 0 with the
/// (pseudo-)inverse solution when that is feasible; otherwise bisects on
/// phi(nu) = P.
MultiplierSolution find_multiplier(const QuadraticSubproblem& sub);

/// Per-user MMSE scalars d_j = [G_m]_jj / [C_m]_jj for fixed precoders.
std::vector<ReceiverGains> update_receivers(const ChannelRealization& ch,
                                            const std::vector<CMat>& F);

struct OgbfState {
  std::vector<CMat> F;
  std::vector<ReceiverGains> D;
  std::vector<double> nu;
  std::vector<double> smse_history;  // one entry per half-step
  int iterations = 0;
};

/// Cyclic minimization over {F_m} and {D_m}, starting from D_m = I.
OgbfState ogbf_alternating(const ChannelRealization& ch, const std::vector<double>& cluster_power,
                           double tol = 1e-8, int max_iter = 100);

/// Closed-form regularized inversion over all feeds with a common receiver
/// scale: F = sqrt(t) (H^H H + (K/P) I)^{-1} H^H, trace{F F^H} = P.
CMat ogbf_single_gateway(const ChannelRealization& ch, double total_power);

}  // namespace mgsat
