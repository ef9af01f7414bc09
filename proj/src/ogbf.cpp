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

#include "mgsat/ogbf.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "mgsat/linalg.hpp"

namespace mgsat {
namespace {

constexpr int kMaxBisection = 200;
constexpr int kMaxBracketDoublings = 2000;

}  // namespace

QuadraticSubproblem build_subproblem(const ChannelRealization& ch,
                                     const std::vector<ReceiverGains>& D, int m, double power) {
  const int M = ch.clusters();
  const int n = ch.feeds_per_cluster();
  QuadraticSubproblem sub;
  sub.A = CMat::Zero(n, n);
  sub.P = power;
  for (int p = 0; p < M; ++p) {
    const CMat dh = D[static_cast<size_t>(p)].asDiagonal() * cluster_block(ch, p, m);
    sub.A.noalias() += dh.adjoint() * dh;
  }
  sub.A = hermitize(sub.A);
  sub.X = cluster_block(ch, m, m).adjoint() * D[static_cast<size_t>(m)].conjugate().asDiagonal();
  return sub;
}

double phi(double nu, const RVec& eigvals, const CMat& Xt) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < eigvals.size(); ++i) {
    const double num = Xt.row(i).squaredNorm();
    if (num == 0.0) {
      continue;
    }
    const double den = eigvals(i) + nu;
    if (den <= 0.0) {
      return std::numeric_limits<double>::infinity();
    }
    sum += num / (den * den);
  }
  return sum;
}

MultiplierSolution find_multiplier(const QuadraticSubproblem& sub) {
  if (!(sub.P > 0.0)) {
    throw ConfigError("power budget must be positive");
  }
  const HermitianEigen eig = hermitian_eig(sub.A);
  RVec gam = eig.values;
  const double top = gam.size() > 0 ? std::max(gam(0), 0.0) : 0.0;
  for (Eigen::Index i = 0; i < gam.size(); ++i) {
    if (gam(i) <= kRankTolerance * top) {
      gam(i) = 0.0;
    }
  }
  const CMat& U = eig.vectors;
  const CMat Xt = U.adjoint() * sub.X;

  auto solution_for = [&](double nu) {
    CMat Ft(Xt.rows(), Xt.cols());
    for (Eigen::Index i = 0; i < gam.size(); ++i) {
      const double den = gam(i) + nu;
      Ft.row(i) = den > 0.0 ? (Xt.row(i) / den).eval() : Eigen::RowVectorXcd::Zero(Xt.cols());
    }
    return CMat(U * Ft);
  };

  // Pseudo-inverse solution on the retained eigen-subspace.
  double unconstrained_power = 0.0;
  for (Eigen::Index i = 0; i < gam.size(); ++i) {
    if (gam(i) > 0.0) {
      unconstrained_power += Xt.row(i).squaredNorm() / (gam(i) * gam(i));
    }
  }
  if (unconstrained_power <= sub.P * (1.0 + 1e-12)) {
    return {0.0, solution_for(0.0)};
  }

  double lo = 0.0;
  double hi = 1.0;
  int doublings = 0;
  while (phi(hi, gam, Xt) >= sub.P) {
    lo = hi;
    hi *= 2.0;
    if (++doublings > kMaxBracketDoublings) {
      throw NumericalError("multiplier bracket search diverged");
    }
  }
  double nu = hi;
  double value = phi(hi, gam, Xt);
  for (int it = 0; it < kMaxBisection; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double f = phi(mid, gam, Xt);
    if (std::abs(f - sub.P) < std::abs(value - sub.P)) {
      nu = mid;
      value = f;
    }
    if (std::abs(f - sub.P) <= 1e-14 * sub.P || mid <= lo || mid >= hi) {
      break;
    }
    (f > sub.P ? lo : hi) = mid;
  }
  if (!(std::abs(value - sub.P) <= 1e-9 * sub.P)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "multiplier bisection did not converge; final bracket [" << lo << ", " << hi
        << "], phi = " << value << ", P = " << sub.P;
    throw NumericalError(msg.str());
  }
  return {nu, solution_for(nu)};
}

std::vector<ReceiverGains> update_receivers(const ChannelRealization& ch,
                                            const std::vector<CMat>& F) {
  const int M = ch.clusters();
  const int k = ch.users_per_cluster;
  std::vector<ReceiverGains> D(static_cast<size_t>(M));
  for (int m = 0; m < M; ++m) {
    RVec c = RVec::Ones(k);
    for (int p = 0; p < M; ++p) {
      c += (cluster_block(ch, m, p) * F[static_cast<size_t>(p)]).rowwise().squaredNorm();
    }
    const CMat hf = cluster_block(ch, m, m) * F[static_cast<size_t>(m)];
    ReceiverGains d(k);
    for (int j = 0; j < k; ++j) {
      // [G_m]_jj = f_j^H h_j^H = conj(h_j f_j).
      d(j) = std::conj(hf(j, j)) / c(j);
    }
    D[static_cast<size_t>(m)] = d;
  }
  return D;
}

OgbfState ogbf_alternating(const ChannelRealization& ch, const std::vector<double>& cluster_power,
                           double tol, int max_iter) {
  if (!(tol > 0.0) || max_iter < 1) {
    throw ConfigError("ogbf_alternating needs tol > 0 and max_iter >= 1");
  }
  const int M = ch.clusters();
  if (static_cast<int>(cluster_power.size()) != M) {
    throw ConfigError("one power budget per cluster required");
  }
  OgbfState st;
  st.D.assign(static_cast<size_t>(M), ReceiverGains::Ones(ch.users_per_cluster));
  st.F.resize(static_cast<size_t>(M));
  st.nu.assign(static_cast<size_t>(M), 0.0);
  double previous = std::numeric_limits<double>::infinity();
  for (int it = 0; it < max_iter; ++it) {
    for (int m = 0; m < M; ++m) {
      MultiplierSolution sol =
          find_multiplier(build_subproblem(ch, st.D, m, cluster_power[static_cast<size_t>(m)]));
      st.F[static_cast<size_t>(m)] = std::move(sol.F);
      st.nu[static_cast<size_t>(m)] = sol.nu;
    }
    st.smse_history.push_back(smse(ch, st.F, st.D).total);
    st.D = update_receivers(ch, st.F);
    const double current = smse(ch, st.F, st.D).total;
    st.smse_history.push_back(current);
    st.iterations = it + 1;
    if (previous - current < tol * previous) {
      break;
    }
    previous = current;
  }
  return st;
}

CMat ogbf_single_gateway(const ChannelRealization& ch, double total_power) {
  if (!(total_power > 0.0)) {
    throw ConfigError("power budget must be positive");
  }
  const CMat& H = ch.H_tilde;
  const double gamma = static_cast<double>(H.rows()) / total_power;
  // (H^H H + g I)^{-1} H^H = H^H (H H^H + g I)^{-1}; the K x K form stays
  // well conditioned when N > K and g is small.
  CMat gram = H * H.adjoint();
  gram.diagonal().array() += gamma;
  const CMat F0 = H.adjoint() * gram.ldlt().solve(CMat::Identity(H.rows(), H.rows()));
  const double t = total_power / F0.squaredNorm();
  return std::sqrt(t) * F0;
}

}  // namespace mgsat
