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
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "mgsat/linalg.hpp"
#include "mgsat/obbf.hpp"
#include "mgsat/regularization.hpp"
#include "test_support.hpp"

using namespace mgsat;

namespace {

RegularizationInputs inputs(RVec lambda, RVec sigma, int k, double P) {
  RegularizationInputs inp;
  inp.lambda = std::move(lambda);
  inp.sigma = std::move(sigma);
  inp.k = k;
  inp.P_m = P;
  return inp;
}

// Sign-change bisection on the root equation over a wide bracket that does
// not assume the interval the solver uses.
double oracle_root(const RegularizationInputs& inp) {
  auto f = [&](double g) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < inp.lambda.size(); ++i) {
      const double l = inp.lambda(i);
      s += l / std::pow(l + g, 3) * (g - inp.sigma(i) - inp.k / inp.P_m);
    }
    return s;
  };
  double lo = 0.0, hi = 1e4;
  for (int i = 0; i < 300; ++i) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

RegularizationInputs random_inputs(Rng& rng, int k) {
  RVec lambda(k), sigma(k);
  for (int i = 0; i < k; ++i) {
    lambda(i) = rng.uniform(0.05, 10.0);
    sigma(i) = rng.uniform(0.0, 3.0);
  }
  std::sort(lambda.data(), lambda.data() + k, std::greater<>());
  return inputs(lambda, sigma, k, rng.uniform(0.2, 50.0));
}

}  // namespace

TEST_CASE("sigma_diagonal") {
  Rng rng(1);
  const CMat B = random_semi_unitary(rng, 5, 3);
  const CMat U = random_semi_unitary(rng, 3, 3);
  SUBCASE("no leakage") { CHECK(sigma_diagonal(U, B, CMat::Zero(5, 5)).norm() == 0.0); }
  SUBCASE("isotropic leakage") {
    const RVec s = sigma_diagonal(U, B, 2.5 * CMat::Identity(5, 5));
    for (int i = 0; i < 3; ++i) CHECK(s(i) == doctest::Approx(2.5).epsilon(1e-13));
  }
  SUBCASE("quadratic-form oracle") {
    const CMat Sigma = test::random_psd(rng, 5, 4);
    const RVec s = sigma_diagonal(U, B, Sigma);
    const CMat L = B.adjoint() * Sigma * B;
    for (int i = 0; i < 3; ++i) {
      cd q = 0.0;
      for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) q += std::conj(U(a, i)) * L(a, b) * U(b, i);
      }
      CHECK(s(i) == doctest::Approx(q.real()).epsilon(1e-12));
      CHECK(std::abs(q.imag()) < 1e-12 * std::abs(q.real()));
    }
  }
}

TEST_CASE("solve_gamma: worked examples") {
  SUBCASE("no leakage gives k / P") {
    CHECK(solve_gamma(inputs(RVec{{3.0, 1.0}}, RVec::Zero(2), 2, 1.0)) == 2.0);
  }
  SUBCASE("uniform leakage adds its level") {
    CHECK(solve_gamma(inputs(RVec{{3.0, 1.0, 0.2}}, RVec::Constant(3, 0.7), 3, 2.0)) ==
          doctest::Approx(1.5 + 0.7).epsilon(1e-15));
  }
  SUBCASE("two-user instance") {
    const RegularizationInputs inp = inputs(RVec{{2.0, 1.0}}, RVec{{1.0, 0.0}}, 2, 2.0);
    const double g = solve_gamma(inp);
    CHECK(g == doctest::Approx(oracle_root(inp)).epsilon(1e-10));
    CHECK(g == doctest::Approx(1.415).epsilon(1e-3));
  }
}

TEST_CASE("solve_gamma: bracket, residual and sensitivity properties") {
  Rng rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    const int k = 1 + static_cast<int>(rng.next() % 6);
    RegularizationInputs inp = random_inputs(rng, k);
    const double base = inp.k / inp.P_m;
    const double smax = inp.sigma.maxCoeff();
    const double g = solve_gamma(inp);
    CHECK(g >= base);
    CHECK(g <= base + smax);
    double scale = 0.0;
    for (int i = 0; i < k; ++i) scale += inp.lambda(i) / std::pow(inp.lambda(i) + g, 3);
    CHECK(std::abs(gamma_root_function(inp, g)) <= 1e-9 * scale * (base + smax));

    const double delta = rng.uniform(0.01, 2.0);
    RegularizationInputs shifted = inp;
    shifted.sigma.array() += delta;
    const double g2 = solve_gamma(shifted);
    CHECK(g2 > g);
    CHECK(g2 <= (base + smax + delta) * (1.0 + 1e-12));
    CHECK(g2 == doctest::Approx(oracle_root(shifted)).epsilon(1e-9));
  }
}

TEST_CASE("solve_gamma: a common leakage shift can move the root by more than the shift") {
  // Raising gamma shifts the root-equation weights lambda/(lambda+gamma)^3
  // towards the strong eigenmode, which here carries the larger leakage.
  const RegularizationInputs inp = inputs(RVec{{2.0, 0.1}}, RVec{{3.0, 0.0}}, 2, 4.0);
  RegularizationInputs shifted = inp;
  shifted.sigma.array() += 1.0;
  const double g = solve_gamma(inp);
  const double g2 = solve_gamma(shifted);
  CHECK(g == doctest::Approx(oracle_root(inp)).epsilon(1e-10));
  CHECK(g2 == doctest::Approx(oracle_root(shifted)).epsilon(1e-10));
  CHECK(g2 - g > 1.1);
}

TEST_CASE("solve_gamma: negative roundoff in sigma is clipped") {
  const double g = solve_gamma(inputs(RVec{{2.0, 1.0}}, RVec{{-1e-15, 0.0}}, 2, 4.0));
  CHECK(g == 0.5);
}

TEST_CASE("scaling_tm") {
  CHECK(scaling_tm(RVec{{1.0}}, 1.0, 1.0) == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(scaling_tm(RVec{{1.0}}, 1e6, 1.0) > 1e11);
  CHECK_THROWS_WITH_AS(scaling_tm(RVec::Zero(2), 1.0, 1.0), "zero channel", NumericalError);
  // Matrix-form oracle P / trace{(S + g I)^{-1} S (S + g I)^{-1}}.
  const double g = 1.415;
  CMat S = CMat::Zero(2, 2);
  S(0, 0) = 2.0;
  S(1, 1) = 1.0;
  const CMat inv = (S + g * CMat::Identity(2, 2)).inverse();
  const double expected = 2.0 / (inv * S * inv).trace().real();
  CHECK(scaling_tm(RVec{{2.0, 1.0}}, g, 2.0) == doctest::Approx(expected).epsilon(1e-13));
}

TEST_CASE("gamma_closed_form") {
  Rng rng(3);
  const CMat B = random_semi_unitary(rng, 6, 3);
  CHECK(gamma_closed_form(B, CMat::Zero(6, 6), 3, 2.0) == 1.5);
  CHECK(gamma_closed_form(B, 0.4 * CMat::Identity(6, 6), 3, 2.0) ==
        doctest::Approx(1.9).epsilon(1e-14));
  for (int i = 0; i < 10; ++i) {
    const CMat Sigma = test::random_psd(rng, 6, 6);
    const CMat U = random_semi_unitary(rng, 3, 3);
    const double g = gamma_closed_form(B, Sigma, 3, 2.0);
    CHECK(g >= 1.5);
    CHECK(g == doctest::Approx(1.5 + sigma_diagonal(U, B, Sigma).mean()).epsilon(1e-12));
  }
}

TEST_CASE("closed form equals the root when leakage is isotropic in the eigenbasis") {
  Rng rng(4);
  const CMat H = random_complex_matrix(rng, 3, 5);
  const CMat B = bfn_adaptive(H);
  const CMat Sigma = 0.8 * CMat::Identity(5, 5);
  CMat U;
  RVec lambda;
  effective_gram_eig(B, H, U, lambda);
  const double root = solve_gamma(inputs(lambda, sigma_diagonal(U, B, Sigma), 3, 1.5));
  CHECK(root == doctest::Approx(gamma_closed_form(B, Sigma, 3, 1.5)).epsilon(1e-14));
}

TEST_CASE("summand objective equals the matrix-form error") {
  Rng rng(5);
  for (int i = 0; i < 20; ++i) {
    const CMat H = random_complex_matrix(rng, 3, 5);
    const CMat B = random_semi_unitary(rng, 5, 3);
    const CMat Sigma = test::random_psd(rng, 5, 5);
    CMat U;
    RVec lambda;
    effective_gram_eig(B, H, U, lambda);
    const RVec sigma = sigma_diagonal(U, B, Sigma);
    const CMat G = B.adjoint() * H.adjoint() * H * B;
    const CMat L = B.adjoint() * Sigma * B;
    for (double g : {0.05, 0.7, 3.0, 40.0}) {
      CHECK(cluster_error_matrix_form(G, L, 3, 2.0, g) ==
            doctest::Approx(3.0 + regularization_objective(lambda, sigma, 3, 2.0, g))
                .epsilon(1e-10));
    }
  }
}

TEST_CASE("gamma_oracle_grid: known optima and agreement with the root") {
  Rng rng(6);
  const int k = 3, n = 5;
  const double P = 2.0;
  const CMat H = random_complex_matrix(rng, k, n);
  const CMat B = bfn_adaptive(H);
  SUBCASE("no leakage") {
    const CMat zero = CMat::Zero(n, n);
    const double g = gamma_oracle_grid(H, B, zero, k, P);
    const double step = gamma_oracle_grid_ratio(H, B, zero, k, P);
    CHECK(g / (k / P) <= step * (1.0 + 1e-12));
    CHECK((k / P) / g <= step * (1.0 + 1e-12));
  }
  SUBCASE("uniform leakage") {
    const CMat iso = 0.6 * CMat::Identity(n, n);
    const double g = gamma_oracle_grid(H, B, iso, k, P);
    const double step = gamma_oracle_grid_ratio(H, B, iso, k, P);
    const double want = k / P + 0.6;
    CHECK(std::max(g / want, want / g) <= step * (1.0 + 1e-12));
  }
  SUBCASE("random leakage") {
    for (int i = 0; i < 10; ++i) {
      const CMat Hi = random_complex_matrix(rng, k, n);
      const CMat Bi = random_semi_unitary(rng, n, k);
      const CMat Sigma = test::random_psd(rng, n, 4);
      CMat U;
      RVec lambda;
      effective_gram_eig(Bi, Hi, U, lambda);
      const double root = solve_gamma(inputs(lambda, sigma_diagonal(U, Bi, Sigma), k, P));
      const double g = gamma_oracle_grid(Hi, Bi, Sigma, k, P);
      const double step = gamma_oracle_grid_ratio(Hi, Bi, Sigma, k, P);
      CHECK(std::max(g / root, root / g) <= step * (1.0 + 1e-12));
    }
  }
  SUBCASE("grid size floor") { CHECK_THROWS_AS(gamma_oracle_grid(H, B, H.adjoint() * H, k, P, 50), ConfigError); }
}

TEST_CASE("geometric_grid") {
  const auto g = geometric_grid(0.1, 10.0, 3);
  REQUIRE(g.size() == 3);
  CHECK(g[0] == 0.1);
  CHECK(g[1] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(g[2] == 10.0);
  CHECK_THROWS_AS(geometric_grid(0.0, 1.0, 10), ConfigError);
}
