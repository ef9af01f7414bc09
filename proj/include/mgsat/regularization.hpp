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

#include "mgsat/types.hpp"

namespace mgsat {

/// Inputs of the leakage-aware regularization rule for one cluster.
struct RegularizationInputs {
  RVec lambda;  // eigenvalues of B^H H_mm^H H_mm B, descending
  RVec sigma;   // diagonal of U^H B^H Sigma B U
  int k = 0;
  double P_m = 0.0;
};

/// diag(U^H B^H Sigma B U), real parts clipped at zero.
RVec sigma_diagonal(const CMat& U, const CMat& B, const CMat& Sigma);

/// sum_i lambda_i / (lambda_i + gamma)^3 (gamma - sigma_i - k / P_m).
double gamma_root_function(const RegularizationInputs& inp, double gamma);

/// Root of gamma_root_function in [k/P_m, k/P_m + max sigma], by bisection
/// carried to machine precision. Uniform sigma = s returns k/P_m + s exactly.
double solve_gamma(const RegularizationInputs& inp);

/// t_m = P_m / sum_i lambda_i / (lambda_i + gamma)^2.
double scaling_tm(const RVec& lambda, double gamma, double P_m);

/// k / P_m + trace{B^H Sigma_hat B} / k.
double gamma_closed_form(const CMat& B, const CMat& Sigma_hat, int k, double P_m);

/// The per-cluster error as a function of gamma with t_m eliminated through
/// the power constraint, up to the additive constant k:
/// sum_i [-2 l/(l+g) + l^2/(l+g)^2 + s l/(l+g)^2 + (k/P) l/(l+g)^2].
double regularization_objective(const RVec& lambda, const RVec& sigma, int k, double P_m,
                                double gamma);

/// trace{E_m} for the regularized precoder with common receiver scale
/// 1/sqrt(t_m), evaluated from the k x k matrices G = B^H H^H H B and
/// L = B^H Sigma B without any eigendecomposition.
double cluster_error_matrix_form(const CMat& G, const CMat& L, int k, double P_m, double gamma);

/// `points` geometrically spaced values from lo to hi inclusive.
std::vector<double> geometric_grid(double lo, double hi, int points);

/// Brute-force minimizer of trace{E_m} over a geometric gamma grid spanning
/// [k/(10 P_m), 10 (k/P_m + max sigma)].
double gamma_oracle_grid(const CMat& H_mm, const CMat& B, const CMat& Sigma, int k, double P_m,
                         int grid_points = 2000);

/// Ratio between consecutive points of the oracle grid for these inputs.
double gamma_oracle_grid_ratio(const CMat& H_mm, const CMat& B, const CMat& Sigma, int k,
                               double P_m, int grid_points = 2000);

}  // namespace mgsat
