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
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "mgsat/scenario.hpp"
#include "mgsat/types.hpp"

namespace mgsat {

/// Diagonal receiver gains d_j^{(m)} of one cluster.
using ReceiverGains = CVec;

/// Per-trial record produced by the harness.
struct TrialResult {
  std::string scheme;
  std::string regularizer;
  double snr_db = 0.0;
  int trial = 0;
  std::uint64_t seed = 0;
  double smse = 0.0;
  std::vector<double> trace_Em;  // M
  std::vector<double> sinr_db;   // K
  std::vector<double> sir_db;    // K, on-board schemes only; +inf when interference-free
  std::vector<double> t;         // M, on-board schemes only
  std::vector<double> gamma;     // M, on-board schemes only
  std::vector<double> nu;        // M, on-ground schemes only
  double tm_dispersion = std::numeric_limits<double>::quiet_NaN();
  int iterations = 0;            // alternating sweeps, on-ground schemes only
};

struct SmseBreakdown {
  double total = 0.0;
  std::vector<double> per_cluster;
};

/// Closed-form sum MSE for joint precoders F_m (n x k, on the feeds of
/// gateway m) and diagonal receivers D_m, unit-variance symbols and noise.
SmseBreakdown smse(const ChannelRealization& ch, const std::vector<CMat>& F,
                   const std::vector<ReceiverGains>& D);

/// K x K matrix whose (u, v) entry is the gain from symbol v to user u.
CMat effective_channel(const ChannelRealization& ch, const std::vector<CMat>& F);

/// SINR_u = |W_uu|^2 / (sum_{v != u} |W_uv|^2 + noise), linear.
std::vector<double> sinr_from_effective(const CMat& W, double noise_variance = 1.0);

/// Linear per-user SINR with unit noise variance.
std::vector<double> sinr_per_user(const ChannelRealization& ch, const std::vector<CMat>& F);

/// Linear per-user SIR with equal-power, unprecoded streams through the
/// beamformers B_m. Interference-free users report +infinity.
std::vector<double> sir_no_precoding(const ChannelRealization& ch, const std::vector<CMat>& B,
                                     std::span<const double> cluster_power);

/// E[trace((H H^H)^2) / trace(H H^H)] over the given channels, which is the
/// received power per unit transmit power of the matched-filter reference.
double matched_filter_gain(std::span<const CMat> channels);

/// Total power P giving the target linear SNR for the matched-filter
/// reference F = sqrt(P / trace(H^H H)) H^H, averaged over `channels`.
double calibrate_power_from(std::span<const CMat> channels, double snr_target);

/// As above over `samples` fresh draws of the full K x N channel.
double calibrate_power(const Scenario& scenario, int samples, std::uint64_t seed,
                       double snr_target);

/// max(t) / min(t). Throws ConfigError on a nonpositive entry.
double tm_dispersion(std::span<const double> t);

inline double to_db(double linear) { return 10.0 * std::log10(linear); }
inline double from_db(double db) { return std::pow(10.0, db / 10.0); }

/// Fixed-width dB histogram: one bin per dB over [lo, hi) plus an underflow
/// and an overflow bin. Non-finite values are skipped.
struct Histogram {
  double lo_db = -10.0;
  double hi_db = 40.0;
  std::vector<long> counts;  // [underflow, lo..hi bins, overflow]
  long skipped = 0;
};

Histogram db_histogram(std::span<const double> values_db, double lo_db = -10.0,
                       double hi_db = 40.0);

/// CSV with header bin_low_db,bin_high_db,count.
std::string histogram_csv(const Histogram& h);

}  // namespace mgsat
