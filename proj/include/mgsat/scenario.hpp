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

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mgsat/types.hpp"

namespace mgsat {

/// How the phase of [H]_{uj} is generated.
///  - geometric: theta_uj = phase_scale * <x_u, f_j>, a steering phase that
///    is a deterministic function of the user and feed positions, so the
///    only randomness comes from where users fall inside their beams.
///  - iid: theta_uj uniform on [0, 2 pi), independent per entry and draw.
enum class PhaseModel { geometric, iid };

std::string to_string(PhaseModel model);
PhaseModel parse_phase_model(const std::string& name);

/// Raw system description as read from a scenario file. Missing optional
/// fields take the defaults documented next to them.
struct ScenarioConfig {
  int N = 0;      // feeds on the satellite
  int M = 0;      // gateways, one cluster each
  int k = 0;      // users (beams) per cluster
  int n = 0;      // feeds per cluster
  int k_bar = 0;  // protected off-cluster users for null steering
  std::optional<double> P;      // total power; defaults to K
  double beam_radius = 1.0;
  double g0 = 1.0;              // peak amplitude gain
  std::optional<double> alpha;  // defaults to -3 dB power gain at one beam radius
  int gramian_samples = 500;
  std::uint64_t gramian_seed = 0x5eedULL;
  /// Radius of the user disc as a fraction of the beam radius. Zero pins
  /// every user to its beam center. Not exposed in the file format.
  double jitter = 1.0;
  PhaseModel phase_model = PhaseModel::geometric;
  std::optional<double> phase_scale;  // radians per squared length unit
};

/// Parses the JSON scenario format. Unknown keys and wrongly-typed values
/// raise ConfigError naming the offending field.
ScenarioConfig parse_scenario_config(const std::string& json_text);
ScenarioConfig load_scenario_config(const std::string& path);

/// Roll-off giving half power at one beam radius.
double default_alpha(double beam_radius);

/// Default steering-phase gradient for the geometric phase model.
double default_phase_scale(double beam_radius);

struct Scenario {
  int N = 0;
  int M = 0;
  int k = 0;
  int n = 0;
  int K = 0;
  int k_bar = 0;
  double P = 0.0;
  std::vector<double> cluster_power;  // P_m, sums to P
  double beam_radius = 1.0;
  double g0 = 1.0;
  double alpha = 0.0;
  double jitter = 1.0;
  PhaseModel phase_model = PhaseModel::geometric;
  double phase_scale = 0.0;
  int gramian_samples = 500;
  std::uint64_t gramian_seed = 0;
  std::vector<Point2> beam_centers;    // K entries, row-major hexagonal layout
  std::vector<Point2> feed_positions;  // N entries
  std::vector<FeedSet> feed_sets;      // M sets of n feeds

  int cluster_of_user(int u) const { return u / k; }
  int first_user(int m) const { return m * k; }

  /// Same geometry with total power P split evenly over the clusters.
  Scenario with_total_power(double total_power) const;
};

/// Lays out beams and feeds and assigns feeds to clusters.
Scenario build_scenario(const ScenarioConfig& config);

/// Expected |[H]_{uj}|^2 with every user at its beam center (K x N).
RMat mean_gain_matrix(const Scenario& scenario);

/// Indices of the `count` largest scores, ties to the lower index, returned
/// sorted ascending. Throws ConfigError("insufficient coverage") when fewer
/// than `count` scores are positive.
FeedSet top_scoring_feeds(const RVec& scores, int count);

/// Per cluster, the n feeds with the largest summed mean gain over the
/// cluster's users. Sets may overlap between clusters.
std::vector<FeedSet> select_feeds(const Scenario& scenario, const RMat& mean_gain);

/// One draw of the user-link channel.
struct ChannelRealization {
  CMat H_tilde;                       // K x N
  std::vector<FeedSet> feed_sets;     // M sets
  int users_per_cluster = 0;
  std::vector<Point2> user_positions;
  std::uint64_t trial_seed = 0;

  int clusters() const { return static_cast<int>(feed_sets.size()); }
  int users() const { return static_cast<int>(H_tilde.rows()); }
  int feeds_per_cluster() const {
    return feed_sets.empty() ? 0 : static_cast<int>(feed_sets.front().size());
  }
};

/// Users placed uniformly in their beam discs; amplitudes follow the
/// Gaussian roll-off g0 exp(-alpha d^2) and phases the scenario's phase
/// model. A pure function of (scenario, trial_seed).
ChannelRealization sample_channel(const Scenario& scenario, std::uint64_t trial_seed);

/// H_mp: the rows of cluster m's users restricted to the feeds of gateway p.
CMat cluster_block(const ChannelRealization& ch, int m, int p);

/// All K users in one cluster served from all N feeds.
ChannelRealization single_cluster_view(const ChannelRealization& ch);

/// Sample means of H_pm^H H_pm (indexed gram[p][m]).
struct ExpectedGramians {
  std::vector<std::vector<CMat>> gram;
  int sample_count = 0;
  std::uint64_t seed = 0;

  /// E[H_pm^H H_pm], n x n.
  const CMat& at(int p, int m) const { return gram[static_cast<size_t>(p)][static_cast<size_t>(m)]; }
};

ExpectedGramians estimate_expected_gramians(const Scenario& scenario, int samples,
                                            std::uint64_t seed);

}  // namespace mgsat
