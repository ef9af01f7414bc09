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

#include "mgsat/metrics.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "mgsat/random.hpp"

namespace mgsat {

SmseBreakdown smse(const ChannelRealization& ch, const std::vector<CMat>& F,
                   const std::vector<ReceiverGains>& D) {
  const int M = ch.clusters();
  const int k = ch.users_per_cluster;
  SmseBreakdown out;
  out.per_cluster.reserve(static_cast<size_t>(M));
  for (int m = 0; m < M; ++m) {
    const CMat& Fm = F[static_cast<size_t>(m)];
    const ReceiverGains& Dm = D[static_cast<size_t>(m)];
    // trace{D H F} contributes twice through the two cross terms.
    const cd cross = (Dm.asDiagonal() * (cluster_block(ch, m, m) * Fm)).trace();
    double leakage = 0.0;
    for (int p = 0; p < M; ++p) {
      leakage += (D[static_cast<size_t>(p)].asDiagonal() * (cluster_block(ch, p, m) * Fm))
                     .squaredNorm();
    }
    const double em = static_cast<double>(k) - 2.0 * cross.real() + leakage + Dm.squaredNorm();
    out.per_cluster.push_back(em);
    out.total += em;
  }
  return out;
}

CMat effective_channel(const ChannelRealization& ch, const std::vector<CMat>& F) {
  const int M = ch.clusters();
  const int k = ch.users_per_cluster;
  CMat W = CMat::Zero(ch.users(), static_cast<Eigen::Index>(M) * k);
  for (int m = 0; m < M; ++m) {
    const FeedSet& feeds = ch.feed_sets[static_cast<size_t>(m)];
    const CMat& Fm = F[static_cast<size_t>(m)];
    for (size_t j = 0; j < feeds.size(); ++j) {
      W.middleCols(static_cast<Eigen::Index>(m) * k, k).noalias() +=
          ch.H_tilde.col(feeds[j]) * Fm.row(static_cast<Eigen::Index>(j));
    }
  }
  return W;
}

std::vector<double> sinr_from_effective(const CMat& W, double noise_variance) {
  std::vector<double> out(static_cast<size_t>(W.rows()));
  for (Eigen::Index u = 0; u < W.rows(); ++u) {
    const double signal = std::norm(W(u, u));
    const double interference = W.row(u).squaredNorm() - signal;
    const double den = std::max(interference, 0.0) + noise_variance;
    out[static_cast<size_t>(u)] =
        den > 0.0 ? signal / den : std::numeric_limits<double>::infinity();
  }
  return out;
}

std::vector<double> sinr_per_user(const ChannelRealization& ch, const std::vector<CMat>& F) {
  return sinr_from_effective(effective_channel(ch, F), 1.0);
}

std::vector<double> sir_no_precoding(const ChannelRealization& ch, const std::vector<CMat>& B,
                                     std::span<const double> cluster_power) {
  const int k = ch.users_per_cluster;
  std::vector<CMat> F;
  F.reserve(B.size());
  for (size_t m = 0; m < B.size(); ++m) {
    F.push_back(std::sqrt(cluster_power[m] / k) * B[m]);
  }
  return sinr_from_effective(effective_channel(ch, F), 0.0);
}

double matched_filter_gain(std::span<const CMat> channels) {
  if (channels.empty()) {
    throw ConfigError("at least one channel sample required");
  }
  double acc = 0.0;
  for (const CMat& H : channels) {
    const CMat g = H * H.adjoint();
    acc += g.squaredNorm() / g.trace().real();
  }
  return acc / static_cast<double>(channels.size());
}

double calibrate_power_from(std::span<const CMat> channels, double snr_target) {
  if (!(snr_target > 0.0)) {
    throw ConfigError("SNR target must be positive");
  }
  const double users = static_cast<double>(channels.front().rows());
  return snr_target * users / matched_filter_gain(channels);
}

double calibrate_power(const Scenario& scenario, int samples, std::uint64_t seed,
                       double snr_target) {
  if (samples < 1) {
    throw ConfigError("samples must be at least 1");
  }
  std::vector<CMat> channels;
  channels.reserve(static_cast<size_t>(samples));
  for (int s = 0; s < samples; ++s) {
    channels.push_back(
        sample_channel(scenario, stable_hash({seed, static_cast<std::uint64_t>(s)})).H_tilde);
  }
  return calibrate_power_from(channels, snr_target);
}

double tm_dispersion(std::span<const double> t) {
  if (t.empty()) {
    throw ConfigError("tm_dispersion of an empty list");
  }
  double lo = t.front();
  double hi = t.front();
  for (double v : t) {
    if (!(v > 0.0)) {
      throw ConfigError("tm_dispersion requires positive scalings");
    }
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return hi / lo;
}

Histogram db_histogram(std::span<const double> values_db, double lo_db, double hi_db) {
  Histogram h;
  h.lo_db = lo_db;
  h.hi_db = hi_db;
  const int bins = static_cast<int>(std::lround(hi_db - lo_db));
  h.counts.assign(static_cast<size_t>(bins) + 2, 0);
  for (double v : values_db) {
    if (!std::isfinite(v)) {
      ++h.skipped;
      continue;
    }
    size_t slot;
    if (v < lo_db) {
      slot = 0;
    } else if (v >= hi_db) {
      slot = static_cast<size_t>(bins) + 1;
    } else {
      slot = 1 + std::min(static_cast<size_t>(std::floor(v - lo_db)), static_cast<size_t>(bins - 1));
    }
    ++h.counts[slot];
  }
  return h;
}

std::string histogram_csv(const Histogram& h) {
  std::ostringstream out;
  out << "bin_low_db,bin_high_db,count\n";
  const size_t bins = h.counts.size() - 2;
  out << "-inf," << h.lo_db << ',' << h.counts.front() << '\n';
  for (size_t b = 0; b < bins; ++b) {
    out << h.lo_db + static_cast<double>(b) << ',' << h.lo_db + static_cast<double>(b + 1) << ','
        << h.counts[b + 1] << '\n';
  }
  out << h.hi_db << ",inf," << h.counts.back() << '\n';
  return out.str();
}

}  // namespace mgsat
