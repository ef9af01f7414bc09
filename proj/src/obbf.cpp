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

#include "mgsat/obbf.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mgsat/linalg.hpp"

namespace mgsat {

std::string to_string(BfnMode mode) {
  switch (mode) {
    case BfnMode::adaptive: return "adaptive";
    case BfnMode::nulling: return "nulling";
    case BfnMode::coarse: return "coarse";
    case BfnMode::prefixed: return "prefixed";
  }
  return "unknown";
}

CMat bfn_adaptive(const CMat& H_mm) {
  return leading_eigenvectors(H_mm.adjoint() * H_mm, H_mm.rows(), "intra-cluster channel");
}

NullingBeamformer bfn_nulling(const CMat& H_mm, const CMat& Hbar) {
  const Eigen::Index k = H_mm.rows();
  const Eigen::Index n = H_mm.cols();
  const Eigen::Index k_bar = Hbar.rows();
  if (k_bar > n - k) {
    throw ConfigError("null steering infeasible: k_bar > n - k");
  }
  if (k_bar > 0 && Hbar.cols() != n) {
    throw ConfigError("protected-user channel must have n columns");
  }
  NullingBeamformer out;
  out.Hbar = k_bar > 0 ? Hbar : CMat(0, n);
  if (k_bar == 0) {
    out.Vbar0 = CMat::Identity(n, n);
  } else {
    Eigen::JacobiSVD<CMat> svd(Hbar, Eigen::ComputeFullV);
    const RVec& s = svd.singularValues();
    if (!(s(k_bar - 1) > kRankTolerance * s(0))) {
      throw NumericalError("protected-user channel rank-deficient");
    }
    out.Vbar0 = svd.matrixV().rightCols(n - k_bar);
  }
  out.Q = H_mm * out.Vbar0;
  out.B0 = bfn_adaptive(out.Q);
  out.B = out.Vbar0 * out.B0;
  return out;
}

CMat bfn_coarse(const CMat& G_expected, int k) {
  return leading_eigenvectors(G_expected, k, "expected intra-cluster Gramian");
}

CMat bfn_prefixed(const CMat& B_given) { return orthonormal_columns(B_given); }

void effective_gram_eig(const CMat& B, const CMat& H_mm, CMat& U, RVec& lambda) {
  const CMat HB = H_mm * B;
  HermitianEigen eig = hermitian_eig(HB.adjoint() * HB);
  lambda = eig.values.cwiseMax(0.0);
  U = std::move(eig.vectors);
}

ClusterPrecoder precoder_Tm(const CMat& B, const CMat& H_mm, double gamma, double P_m) {
  if (!(gamma >= 0.0) || !(P_m > 0.0)) {
    throw ConfigError("precoder needs gamma >= 0 and P_m > 0");
  }
  ClusterPrecoder out;
  out.gamma = gamma;
  effective_gram_eig(B, H_mm, out.U, out.lambda);
  const Eigen::Index k = B.cols();
  const double top = out.lambda.size() > 0 ? out.lambda(0) : 0.0;
  if (!(top > 0.0)) {
    throw NumericalError("zero channel");
  }
  if (gamma == 0.0 && !(out.lambda(k - 1) > kRankTolerance * top)) {
    throw NumericalError("zero-forcing precoder on a singular effective channel");
  }
  const CMat HB = H_mm * B;
  CMat reg = HB.adjoint() * HB;
  reg = hermitize(reg);
  reg.diagonal().array() += gamma;
  const CMat T0 = reg.ldlt().solve(HB.adjoint());
  out.t = P_m / T0.squaredNorm();
  out.T = std::sqrt(out.t) * T0;
  return out;
}

CMat build_sigma_hat(const ExpectedGramians& gramians, int m) {
  const int M = static_cast<int>(gramians.gram.size());
  if (m < 0 || m >= M) {
    throw ConfigError("cluster index out of range");
  }
  CMat sigma = CMat::Zero(gramians.at(m, m).rows(), gramians.at(m, m).cols());
  for (int p = 0; p < M; ++p) {
    if (p != m) {
      sigma += gramians.at(p, m);
    }
  }
  return sigma;
}

CMat build_sigma_instantaneous(const ChannelRealization& ch, int m) {
  const int M = ch.clusters();
  if (m < 0 || m >= M) {
    throw ConfigError("cluster index out of range");
  }
  const int n = ch.feeds_per_cluster();
  CMat sigma = CMat::Zero(n, n);
  for (int p = 0; p < M; ++p) {
    if (p != m) {
      const CMat h = cluster_block(ch, p, m);
      sigma.noalias() += h.adjoint() * h;
    }
  }
  return hermitize(sigma);
}

std::vector<int> protected_users(const Scenario& s, int m) {
  Point2 centroid;
  for (int u = s.first_user(m); u < s.first_user(m) + s.k; ++u) {
    centroid.x += s.beam_centers[static_cast<size_t>(u)].x / s.k;
    centroid.y += s.beam_centers[static_cast<size_t>(u)].y / s.k;
  }
  std::vector<int> others;
  for (int u = 0; u < s.K; ++u) {
    if (s.cluster_of_user(u) != m) {
      others.push_back(u);
    }
  }
  std::stable_sort(others.begin(), others.end(), [&](int a, int b) {
    return squared_distance(s.beam_centers[static_cast<size_t>(a)], centroid) <
           squared_distance(s.beam_centers[static_cast<size_t>(b)], centroid);
  });
  if (static_cast<int>(others.size()) < s.k_bar) {
    throw ConfigError("not enough off-cluster users to protect");
  }
  others.resize(static_cast<size_t>(s.k_bar));
  return others;
}

CMat protected_channel(const ChannelRealization& ch, const std::vector<int>& users, int m) {
  const FeedSet& feeds = ch.feed_sets[static_cast<size_t>(m)];
  CMat out(static_cast<Eigen::Index>(users.size()), static_cast<Eigen::Index>(feeds.size()));
  for (size_t r = 0; r < users.size(); ++r) {
    for (size_t c = 0; c < feeds.size(); ++c) {
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = ch.H_tilde(users[r], feeds[c]);
    }
  }
  return out;
}

}  // namespace mgsat
