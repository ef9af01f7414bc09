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

#include "mgsat/regularization.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>

namespace mgsat {
namespace {

void check_inputs(const RegularizationInputs& inp) {
  if (inp.lambda.size() != inp.sigma.size()) {
    throw ConfigError("lambda and sigma lengths differ");
  }
  if (inp.k < 1 || !(inp.P_m > 0.0)) {
    throw ConfigError("regularization needs k >= 1 and P_m > 0");
  }
  if ((inp.lambda.array() < 0.0).any() || !(inp.lambda.maxCoeff() > 0.0)) {
    throw ConfigError("lambda must be nonnegative with at least one positive entry");
  }
}

struct OracleSetup {
  CMat G;
  CMat L;
  double lo = 0.0;
  double hi = 0.0;
};

// Grid bounds need max sigma_ii, which depends on the eigenbasis of G.
OracleSetup oracle_setup(const CMat& H_mm, const CMat& B, const CMat& Sigma, int k, double P_m) {
  OracleSetup s;
  const CMat HB = H_mm * B;
  s.G = HB.adjoint() * HB;
  s.L = B.adjoint() * Sigma * B;
  Eigen::SelfAdjointEigenSolver<CMat> eig(0.5 * (s.G + s.G.adjoint()));
  const CMat rotated = eig.eigenvectors().adjoint() * s.L * eig.eigenvectors();
  double max_sigma = 0.0;
  for (Eigen::Index i = 0; i < rotated.rows(); ++i) {
    max_sigma = std::max(max_sigma, rotated(i, i).real());
  }
  const double base = k / P_m;
  s.lo = base / 10.0;
  s.hi = 10.0 * (base + max_sigma);
  return s;
}

}  // namespace

RVec sigma_diagonal(const CMat& U, const CMat& B, const CMat& Sigma) {
  const CMat BU = B * U;
  RVec out(U.cols());
  for (Eigen::Index i = 0; i < U.cols(); ++i) {
    const double v = (BU.col(i).adjoint() * Sigma * BU.col(i))(0, 0).real();
    out(i) = std::max(v, 0.0);
  }
  return out;
}

double gamma_root_function(const RegularizationInputs& inp, double gamma) {
  const double base = inp.k / inp.P_m;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < inp.lambda.size(); ++i) {
    const double l = inp.lambda(i);
    if (l == 0.0) {
      continue;
    }
    const double d = l + gamma;
    sum += l / (d * d * d) * (gamma - std::max(inp.sigma(i), 0.0) - base);
  }
  return sum;
}

double solve_gamma(const RegularizationInputs& inp) {
  check_inputs(inp);
  const RVec sigma = inp.sigma.cwiseMax(0.0);
  const double base = inp.k / inp.P_m;
  const double smin = sigma.minCoeff();
  const double smax = sigma.maxCoeff();
  if (smin == smax) {
    return base + smax;
  }
  double lo = base;
  double hi = base + smax;
  RegularizationInputs clipped = inp;
  clipped.sigma = sigma;
  if (gamma_root_function(clipped, lo) >= 0.0) {
    return lo;
  }
  if (gamma_root_function(clipped, hi) <= 0.0) {
    return hi;
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) {
      break;
    }
    const double f = gamma_root_function(clipped, mid);
    if (f == 0.0) {
      return mid;
    }
    (f < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double scaling_tm(const RVec& lambda, double gamma, double P_m) {
  double den = 0.0;
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    const double d = lambda(i) + gamma;
    if (lambda(i) > 0.0) {
      den += lambda(i) / (d * d);
    }
  }
  if (!(den > 0.0)) {
    throw NumericalError("zero channel");
  }
  return P_m / den;
}

double gamma_closed_form(const CMat& B, const CMat& Sigma_hat, int k, double P_m) {
  if (k < 1 || !(P_m > 0.0)) {
    throw ConfigError("closed-form regularization needs k >= 1 and P_m > 0");
  }
  const double leak = (B.adjoint() * Sigma_hat * B).trace().real();
  return k / P_m + std::max(leak, 0.0) / k;
}

double regularization_objective(const RVec& lambda, const RVec& sigma, int k, double P_m,
                                double gamma) {
  const double base = k / P_m;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    const double l = lambda(i);
    const double d = l + gamma;
    sum += -2.0 * l / d + (l * l + sigma(i) * l + base * l) / (d * d);
  }
  return sum;
}

double cluster_error_matrix_form(const CMat& G, const CMat& L, int k, double P_m, double gamma) {
  const Eigen::Index dim = G.rows();
  CMat reg = G;
  reg.diagonal().array() += gamma;
  const CMat inv = reg.inverse();
  const CMat a = inv * G;  // (G + gI)^{-1} G
  const double power_per_t = (inv * G * inv).trace().real();
  const double t = P_m / power_per_t;
  const double err = static_cast<double>(dim) - 2.0 * a.trace().real() +
                     (inv * (G + L) * inv * G).trace().real() + static_cast<double>(k) / t;
  return err;
}

std::vector<double> geometric_grid(double lo, double hi, int points) {
  if (points < 2 || !(lo > 0.0) || !(hi > lo)) {
    throw ConfigError("geometric grid needs points >= 2 and 0 < lo < hi");
  }
  std::vector<double> grid(static_cast<size_t>(points));
  const double step = std::log(hi / lo) / (points - 1);
  for (int i = 0; i < points; ++i) {
    grid[static_cast<size_t>(i)] = lo * std::exp(step * i);
  }
  grid.back() = hi;
  return grid;
}

double gamma_oracle_grid(const CMat& H_mm, const CMat& B, const CMat& Sigma, int k, double P_m,
                         int grid_points) {
  if (grid_points < 100) {
    throw ConfigError("oracle grid needs at least 100 points");
  }
  const OracleSetup s = oracle_setup(H_mm, B, Sigma, k, P_m);
  double best_gamma = s.lo;
  double best = std::numeric_limits<double>::infinity();
  for (double g : geometric_grid(s.lo, s.hi, grid_points)) {
    const double v = cluster_error_matrix_form(s.G, s.L, k, P_m, g);
    if (v < best) {
      best = v;
      best_gamma = g;
    }
  }
  return best_gamma;
}

double gamma_oracle_grid_ratio(const CMat& H_mm, const CMat& B, const CMat& Sigma, int k,
                               double P_m, int grid_points) {
  const OracleSetup s = oracle_setup(H_mm, B, Sigma, k, P_m);
  return std::exp(std::log(s.hi / s.lo) / (grid_points - 1));
}

}  // namespace mgsat
