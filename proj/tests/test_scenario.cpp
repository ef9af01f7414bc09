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
#include <set>

#include "mgsat/linalg.hpp"
#include "mgsat/scenario.hpp"
#include "test_support.hpp"

using namespace mgsat;
using mgsat::test::desk_config;

namespace {

ScenarioConfig dims(int N, int M, int k, int n) {
  ScenarioConfig c;
  c.N = N;
  c.M = M;
  c.k = k;
  c.n = n;
  return c;
}

void check_feed_sets(const Scenario& s) {
  REQUIRE(static_cast<int>(s.feed_sets.size()) == s.M);
  for (const FeedSet& set : s.feed_sets) {
    REQUIRE(static_cast<int>(set.size()) == s.n);
    CHECK(std::is_sorted(set.begin(), set.end()));
    CHECK(std::adjacent_find(set.begin(), set.end()) == set.end());
    CHECK(set.front() >= 0);
    CHECK(set.back() < s.N);
  }
}

}  // namespace

TEST_CASE("build_scenario: full-size system") {
  ScenarioConfig c = dims(155, 10, 10, 30);
  const Scenario s = build_scenario(c);
  CHECK(s.K == 100);
  CHECK(s.P == doctest::Approx(100.0));
  CHECK(s.beam_centers.size() == 100);
  CHECK(s.feed_positions.size() == 155);
  double total = 0.0;
  for (double p : s.cluster_power) total += p;
  CHECK(total == doctest::Approx(s.P).epsilon(1e-14));
  check_feed_sets(s);
}

TEST_CASE("build_scenario: minimal dimensions are valid") {
  const Scenario s = build_scenario(dims(1, 1, 1, 1));
  CHECK(s.K == 1);
  CHECK(s.feed_sets.at(0) == FeedSet{0});
}

TEST_CASE("build_scenario: dimension violations name the constraint") {
  auto message = [](const ScenarioConfig& c) {
    try {
      build_scenario(c);
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  CHECK(message(dims(4, 2, 2, 1)) == "k > n");
  CHECK(message(dims(4, 2, 2, 5)) == "n > N");
  ScenarioConfig c = dims(10, 2, 2, 4);
  c.k_bar = 3;
  CHECK(message(c) == "k_bar > n - k");
  c.k_bar = 2;
  CHECK(message(c) == "no error");
}

TEST_CASE("scenario file parsing") {
  const ScenarioConfig c = parse_scenario_config(
      R"({"N": 28, "M": 4, "k": 4, "n": 10, "k_bar": 2, "P": 8.5, "alpha": 0.3,
          "gramian_samples": 50, "gramian_seed": 99, "phase_model": "iid"})");
  CHECK(c.N == 28);
  CHECK(c.k_bar == 2);
  CHECK(*c.P == 8.5);
  CHECK(*c.alpha == 0.3);
  CHECK(c.gramian_samples == 50);
  CHECK(c.gramian_seed == 99);
  CHECK(c.phase_model == PhaseModel::iid);

  CHECK_THROWS_AS(parse_scenario_config(R"({"N": 4, "M": 1, "k": 1, "n": 1, "beams": 3})"),
                  ConfigError);
  CHECK_THROWS_AS(parse_scenario_config(R"({"N": 4, "M": 1, "k": 1})"), ConfigError);
  CHECK_THROWS_AS(parse_scenario_config(R"({"N": "four", "M": 1, "k": 1, "n": 1})"),
                  ConfigError);
  CHECK_THROWS_AS(parse_scenario_config("[1, 2]"), ConfigError);
  CHECK_THROWS_AS(parse_scenario_config("{"), ConfigError);
  CHECK_THROWS_AS(load_scenario_config("/nonexistent/scenario.json"), IoError);
}

TEST_CASE("default roll-off halves the power at one beam radius") {
  const double r = 1.7;
  const double alpha = default_alpha(r);
  const double amp = std::exp(-alpha * r * r);
  CHECK(amp * amp == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("sample_channel is a pure function of the seed") {
  const Scenario s = build_scenario(desk_config());
  const ChannelRealization a = sample_channel(s, 42);
  const ChannelRealization b = sample_channel(s, 42);
  const ChannelRealization c = sample_channel(s, 43);
  CHECK(a.H_tilde == b.H_tilde);
  CHECK(a.H_tilde != c.H_tilde);
  CHECK(a.feed_sets == s.feed_sets);
}

TEST_CASE("sample_channel: alpha = 0 gives unit-gain magnitudes") {
  for (PhaseModel model : {PhaseModel::geometric, PhaseModel::iid}) {
    ScenarioConfig c = desk_config();
    c.alpha = 0.0;
    c.g0 = 1.5;
    c.phase_model = model;
    const ChannelRealization ch = sample_channel(build_scenario(c), 7);
    CHECK(ch.H_tilde.cwiseAbs().maxCoeff() == doctest::Approx(1.5).epsilon(1e-14));
    CHECK(ch.H_tilde.cwiseAbs().minCoeff() == doctest::Approx(1.5).epsilon(1e-14));
  }
}

TEST_CASE("sample_channel: shape, magnitude bound and amplitude law") {
  const Scenario s = build_scenario(dims(155, 10, 10, 30));
  const ChannelRealization ch = sample_channel(s, 2026);
  REQUIRE(ch.H_tilde.rows() == 100);
  REQUIRE(ch.H_tilde.cols() == 155);
  CHECK(ch.H_tilde.allFinite());
  CHECK(ch.H_tilde.cwiseAbs().maxCoeff() <= s.g0);
  for (int u = 0; u < s.K; ++u) {
    CHECK(ch.H_tilde.row(u).norm() > 0.0);
    // Users stay inside their beam disc.
    CHECK(squared_distance(ch.user_positions[u], s.beam_centers[u]) <=
          s.beam_radius * s.beam_radius * (1.0 + 1e-12));
  }
  // Spot check the amplitude of a few entries against the roll-off law.
  for (int u : {0, 37, 99}) {
    for (int j : {0, 80, 154}) {
      const double d2 = squared_distance(ch.user_positions[u], s.feed_positions[j]);
      CHECK(std::abs(ch.H_tilde(u, j)) ==
            doctest::Approx(s.g0 * std::exp(-s.alpha * d2)).epsilon(1e-13));
    }
  }
}

TEST_CASE("sample_channel: geometric phase follows the steering law") {
  ScenarioConfig c = desk_config();
  c.phase_scale = 0.75;
  const Scenario s = build_scenario(c);
  const ChannelRealization ch = sample_channel(s, 5);
  for (int u = 0; u < s.K; u += 5) {
    for (int j = 0; j < s.N; j += 3) {
      const Point2 x = ch.user_positions[u];
      const Point2 f = s.feed_positions[j];
      const cd expected = std::polar(1.0, 0.75 * (x.x * f.x + x.y * f.y));
      const cd got = ch.H_tilde(u, j) / std::abs(ch.H_tilde(u, j));
      CHECK(std::abs(got - expected) < 1e-12);
    }
  }
}

TEST_CASE("top_scoring_feeds") {
  SUBCASE("top-2 selection reported sorted") {
    CHECK(top_scoring_feeds(RVec{{5.0, 3.0, 9.0, 1.0}}, 2) == FeedSet{0, 2});
  }
  SUBCASE("ties go to the lower index") {
    CHECK(top_scoring_feeds(RVec::Constant(6, 2.0), 3) == FeedSet{0, 1, 2});
    CHECK(top_scoring_feeds(RVec{{1.0, 4.0, 4.0, 4.0}}, 2) == FeedSet{1, 2});
  }
  SUBCASE("insufficient coverage") {
    CHECK_THROWS_WITH_AS(top_scoring_feeds(RVec{{1.0, 0.0, 0.0}}, 2), "insufficient coverage",
                         ConfigError);
  }
}

TEST_CASE("select_feeds: scores are cluster sums of the mean gain") {
  const Scenario s = build_scenario(desk_config());
  const RMat g = mean_gain_matrix(s);
  REQUIRE(g.rows() == s.K);
  REQUIRE(g.cols() == s.N);
  const auto sets = select_feeds(s, g);
  CHECK(sets == s.feed_sets);
  for (int m = 0; m < s.M; ++m) {
    // Brute force: every selected feed outscores (or ties with a higher
    // index than) every rejected one.
    std::vector<double> score(s.N, 0.0);
    for (int u = m * s.k; u < (m + 1) * s.k; ++u) {
      for (int j = 0; j < s.N; ++j) score[j] += g(u, j);
    }
    const std::set<int> chosen(sets[m].begin(), sets[m].end());
    for (int a : chosen) {
      for (int b = 0; b < s.N; ++b) {
        if (chosen.count(b)) continue;
        CHECK((score[a] > score[b] || (score[a] == score[b] && a < b)));
      }
    }
  }
  check_feed_sets(s);
}

TEST_CASE("select_feeds: sets may overlap across clusters") {
  // Two clusters choosing 6 of 8 feeds must share at least 4.
  const Scenario s = build_scenario(dims(8, 2, 2, 6));
  std::vector<int> common;
  std::set_intersection(s.feed_sets[0].begin(), s.feed_sets[0].end(), s.feed_sets[1].begin(),
                        s.feed_sets[1].end(), std::back_inserter(common));
  CHECK(common.size() >= 4);
  check_feed_sets(s);
}

TEST_CASE("cluster_block: identity partition") {
  const ChannelRealization ch =
      test::make_channel(CMat::Identity(4, 4), {FeedSet{0, 1}, FeedSet{2, 3}}, 2);
  CHECK(cluster_block(ch, 0, 0) == CMat::Identity(2, 2));
  CHECK(cluster_block(ch, 0, 1) == CMat::Zero(2, 2));
  CHECK(cluster_block(ch, 1, 1) == CMat::Identity(2, 2));
  CHECK_THROWS_AS(cluster_block(ch, 2, 0), ConfigError);
  CHECK_THROWS_AS(cluster_block(ch, 0, -1), ConfigError);
}

TEST_CASE("cluster_block: overlapping feed sets against direct indexing") {
  Rng rng(11);
  const CMat H = random_complex_matrix(rng, 4, 6);
  const std::vector<FeedSet> sets{{0, 2, 3}, {1, 2, 5}};
  const ChannelRealization ch = test::make_channel(H, sets, 2);
  for (int m = 0; m < 2; ++m) {
    for (int p = 0; p < 2; ++p) {
      const CMat block = cluster_block(ch, m, p);
      REQUIRE(block.rows() == 2);
      REQUIRE(block.cols() == 3);
      for (int r = 0; r < 2; ++r) {
        for (int c = 0; c < 3; ++c) {
          CHECK(block(r, c) == H(2 * m + r, sets[p][c]));
        }
      }
    }
  }
  // Column 2 is shared by both gateways.
  CHECK(cluster_block(ch, 0, 0).col(1) == cluster_block(ch, 0, 1).col(1));
}

TEST_CASE("estimate_expected_gramians: a single sample is one draw") {
  const Scenario s = build_scenario(desk_config());
  const ExpectedGramians g = estimate_expected_gramians(s, 1, 77);
  CHECK(g.sample_count == 1);
  const ChannelRealization ch = sample_channel(s, stable_hash({77, 0}));
  for (int p = 0; p < s.M; ++p) {
    for (int m = 0; m < s.M; ++m) {
      const CMat h = cluster_block(ch, p, m);
      CHECK(test::rel_fro(g.at(p, m), h.adjoint() * h) < 1e-14);
    }
  }
}

TEST_CASE("estimate_expected_gramians: deterministic amplitudes survive averaging") {
  for (PhaseModel model : {PhaseModel::geometric, PhaseModel::iid}) {
    ScenarioConfig c = desk_config();
    c.alpha = 0.0;
    c.jitter = 0.0;
    c.phase_model = model;
    const Scenario s = build_scenario(c);
    const ExpectedGramians g = estimate_expected_gramians(s, 40, 3);
    const ChannelRealization one = sample_channel(s, 1);
    for (int m = 0; m < s.M; ++m) {
      const CMat h = cluster_block(one, m, m);
      const CMat single = h.adjoint() * h;
      CHECK(test::rel_diff(g.at(m, m).diagonal().real().sum(), single.diagonal().real().sum()) <
            1e-13);
      for (int i = 0; i < s.n; ++i) {
        CHECK(std::abs(g.at(m, m)(i, i)) == doctest::Approx(std::abs(single(i, i))));
      }
    }
  }
}

TEST_CASE("estimate_expected_gramians: Hermitian PSD and converging") {
  const Scenario s = build_scenario(desk_config());
  const ExpectedGramians a = estimate_expected_gramians(s, 500, 1);
  const ExpectedGramians b = estimate_expected_gramians(s, 5000, 2);
  for (int p = 0; p < s.M; ++p) {
    for (int m = 0; m < s.M; ++m) {
      const CMat& g = a.at(p, m);
      REQUIRE(g.rows() == s.n);
      CHECK((g - g.adjoint()).norm() <= 1e-12 * g.norm());
      const RVec ev = hermitian_eig(g).values;
      CHECK(ev.minCoeff() >= -1e-10 * ev.maxCoeff());
      if (p != m) continue;
      for (int i = 0; i < s.n; ++i) {
        CHECK(test::rel_diff(g(i, i).real(), b.at(p, m)(i, i).real()) < 0.05);
      }
    }
  }
  const ExpectedGramians again = estimate_expected_gramians(s, 500, 1);
  CHECK(again.at(1, 2) == a.at(1, 2));
}

TEST_CASE("geometric phase gives structured expected Gramians") {
  // Independent phases average the off-diagonal of E[H^H H] away; the
  // geometric model keeps coherent structure between neighbouring feeds.
  ScenarioConfig c = desk_config();
  auto off_diag_ratio = [](const CMat& g) {
    const double total = g.norm();
    const double diag = g.diagonal().norm();
    return std::sqrt(std::max(total * total - diag * diag, 0.0)) / total;
  };
  c.phase_model = PhaseModel::iid;
  const double iid = off_diag_ratio(estimate_expected_gramians(build_scenario(c), 2000, 4).at(0, 0));
  c.phase_model = PhaseModel::geometric;
  const double geo = off_diag_ratio(estimate_expected_gramians(build_scenario(c), 2000, 4).at(0, 0));
  CHECK(iid < 0.1);
  CHECK(geo > 0.3);
}
