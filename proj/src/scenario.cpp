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

#include "mgsat/scenario.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <set>
#include <sstream>

#include "mgsat/linalg.hpp"
#include "mgsat/random.hpp"

namespace mgsat {
namespace {

using nlohmann::json;

template <typename T>
T get_field(const json& obj, const char* key) {
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scenario field '") + key + "': " + e.what());
  }
}

void validate(const ScenarioConfig& c) {
  if (c.N < 1 || c.M < 1 || c.k < 1 || c.n < 1) {
    throw ConfigError("N, M, k, n must all be positive");
  }
  if (c.k > c.n) {
    throw ConfigError("k > n");
  }
  if (c.n > c.N) {
    throw ConfigError("n > N");
  }
  if (c.k_bar < 0) {
    throw ConfigError("k_bar < 0");
  }
  if (c.k_bar > c.n - c.k) {
    throw ConfigError("k_bar > n - k");
  }
  if (c.P && !(*c.P > 0.0)) {
    throw ConfigError("P must be positive");
  }
  if (!(c.beam_radius > 0.0)) {
    throw ConfigError("beam_radius must be positive");
  }
  if (!(c.g0 > 0.0)) {
    throw ConfigError("g0 must be positive");
  }
  if (c.alpha && !(*c.alpha >= 0.0)) {
    throw ConfigError("alpha must be nonnegative");
  }
  if (c.gramian_samples < 1) {
    throw ConfigError("gramian_samples must be at least 1");
  }
  if (c.phase_scale && !std::isfinite(*c.phase_scale)) {
    throw ConfigError("phase_scale must be finite");
  }
  if (!(c.jitter >= 0.0 && c.jitter <= 1.0)) {
    throw ConfigError("jitter must lie in [0, 1]");
  }
}

// Row-major hexagonal lattice: odd rows shifted by half a spacing.
std::vector<Point2> hex_lattice(int rows, int cols, double spacing) {
  std::vector<Point2> pts;
  pts.reserve(static_cast<size_t>(rows) * static_cast<size_t>(cols));
  const double row_step = spacing * std::sqrt(3.0) / 2.0;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      pts.push_back({(c + ((r % 2) ? 0.5 : 0.0)) * spacing, r * row_step});
    }
  }
  return pts;
}

std::vector<Point2> layout_beams(int count, double radius) {
  const int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(count))));
  const int rows = (count + cols - 1) / cols;
  std::vector<Point2> pts = hex_lattice(rows, cols, std::sqrt(3.0) * radius);
  pts.resize(static_cast<size_t>(count));
  return pts;
}

// N feeds on a hexagonal lattice whose density matches the beam footprint
// (the beam centers' bounding box grown by one beam radius). The N lattice
// points closest to the footprint center are kept.
std::vector<Point2> layout_feeds(int count, const std::vector<Point2>& beams, double radius) {
  double xmin = beams.front().x, xmax = xmin, ymin = beams.front().y, ymax = ymin;
  for (const auto& b : beams) {
    xmin = std::min(xmin, b.x);
    xmax = std::max(xmax, b.x);
    ymin = std::min(ymin, b.y);
    ymax = std::max(ymax, b.y);
  }
  xmin -= radius;
  xmax += radius;
  ymin -= radius;
  ymax += radius;
  const Point2 center{0.5 * (xmin + xmax), 0.5 * (ymin + ymax)};
  const double area = (xmax - xmin) * (ymax - ymin);
  const double spacing = std::sqrt(2.0 * area / (std::sqrt(3.0) * count));

  // Generous lattice centered on the footprint.
  const int side = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(count)))) * 2 + 4;
  std::vector<Point2> lattice = hex_lattice(side, side, spacing);
  const Point2 lattice_mid{0.5 * (side - 0.5) * spacing,
                           0.5 * (side - 1) * spacing * std::sqrt(3.0) / 2.0};
  for (auto& p : lattice) {
    p.x += center.x - lattice_mid.x;
    p.y += center.y - lattice_mid.y;
  }
  std::vector<size_t> order(lattice.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return squared_distance(lattice[a], center) < squared_distance(lattice[b], center);
  });
  order.resize(static_cast<size_t>(count));
  std::sort(order.begin(), order.end());
  std::vector<Point2> feeds;
  feeds.reserve(order.size());
  for (size_t i : order) {
    feeds.push_back(lattice[i]);
  }
  return feeds;
}

Point2 draw_in_disc(Rng& rng, const Point2& center, double radius) {
  const double r = radius * std::sqrt(rng.uniform());
  const double a = 2.0 * std::numbers::pi * rng.uniform();
  return {center.x + r * std::cos(a), center.y + r * std::sin(a)};
}

}  // namespace

double default_alpha(double beam_radius) {
  return std::log(2.0) / (2.0 * beam_radius * beam_radius);
}

double default_phase_scale(double beam_radius) {
  return 1.0 / (beam_radius * beam_radius);
}

std::string to_string(PhaseModel model) {
  return model == PhaseModel::iid ? "iid" : "geometric";
}

PhaseModel parse_phase_model(const std::string& name) {
  if (name == "geometric") return PhaseModel::geometric;
  if (name == "iid") return PhaseModel::iid;
  throw ConfigError("unknown phase_model '" + name + "'");
}

ScenarioConfig parse_scenario_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("scenario parse error: ") + e.what());
  }
  if (!doc.is_object()) {
    throw ConfigError("scenario file must hold a JSON object");
  }
  static const std::set<std::string> known = {"N", "M", "k", "n", "k_bar", "P",
                                              "beam_radius", "g0", "alpha",
                                              "gramian_samples", "gramian_seed",
                                              "phase_model", "phase_scale"};
  for (const auto& item : doc.items()) {
    if (!known.contains(item.key())) {
      throw ConfigError("unknown scenario field '" + item.key() + "'");
    }
  }
  for (const char* required : {"N", "M", "k", "n"}) {
    if (!doc.contains(required)) {
      throw ConfigError(std::string("missing scenario field '") + required + "'");
    }
  }
  ScenarioConfig c;
  c.N = get_field<int>(doc, "N");
  c.M = get_field<int>(doc, "M");
  c.k = get_field<int>(doc, "k");
  c.n = get_field<int>(doc, "n");
  if (doc.contains("k_bar")) c.k_bar = get_field<int>(doc, "k_bar");
  if (doc.contains("P") && !doc["P"].is_null()) c.P = get_field<double>(doc, "P");
  if (doc.contains("beam_radius")) c.beam_radius = get_field<double>(doc, "beam_radius");
  if (doc.contains("g0")) c.g0 = get_field<double>(doc, "g0");
  if (doc.contains("alpha") && !doc["alpha"].is_null()) c.alpha = get_field<double>(doc, "alpha");
  if (doc.contains("gramian_samples")) c.gramian_samples = get_field<int>(doc, "gramian_samples");
  if (doc.contains("gramian_seed")) c.gramian_seed = get_field<std::uint64_t>(doc, "gramian_seed");
  if (doc.contains("phase_model")) {
    c.phase_model = parse_phase_model(get_field<std::string>(doc, "phase_model"));
  }
  if (doc.contains("phase_scale") && !doc["phase_scale"].is_null()) {
    c.phase_scale = get_field<double>(doc, "phase_scale");
  }
  validate(c);
  return c;
}

ScenarioConfig load_scenario_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open scenario file " + path);
  }
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario_config(buf.str());
}

Scenario Scenario::with_total_power(double total_power) const {
  if (!(total_power > 0.0)) {
    throw ConfigError("total power must be positive");
  }
  Scenario s = *this;
  s.P = total_power;
  s.cluster_power.assign(static_cast<size_t>(M), total_power / M);
  return s;
}

Scenario build_scenario(const ScenarioConfig& config) {
  validate(config);
  Scenario s;
  s.N = config.N;
  s.M = config.M;
  s.k = config.k;
  s.n = config.n;
  s.K = config.k * config.M;
  s.k_bar = config.k_bar;
  s.beam_radius = config.beam_radius;
  s.g0 = config.g0;
  s.alpha = config.alpha.value_or(default_alpha(config.beam_radius));
  s.jitter = config.jitter;
  s.phase_model = config.phase_model;
  s.phase_scale = config.phase_scale.value_or(default_phase_scale(config.beam_radius));
  s.gramian_samples = config.gramian_samples;
  s.gramian_seed = config.gramian_seed;
  s.beam_centers = layout_beams(s.K, s.beam_radius);
  s.feed_positions = layout_feeds(s.N, s.beam_centers, s.beam_radius);
  s = s.with_total_power(config.P.value_or(static_cast<double>(s.K)));
  s.feed_sets = select_feeds(s, mean_gain_matrix(s));
  return s;
}

RMat mean_gain_matrix(const Scenario& s) {
  RMat g(s.K, s.N);
  for (int u = 0; u < s.K; ++u) {
    for (int j = 0; j < s.N; ++j) {
      const double d2 = squared_distance(s.beam_centers[static_cast<size_t>(u)],
                                         s.feed_positions[static_cast<size_t>(j)]);
      g(u, j) = s.g0 * s.g0 * std::exp(-2.0 * s.alpha * d2);
    }
  }
  return g;
}

FeedSet top_scoring_feeds(const RVec& scores, int count) {
  std::vector<int> idx(static_cast<size_t>(scores.size()));
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](int a, int b) { return scores(a) > scores(b); });
  if (count > static_cast<int>(idx.size()) ||
      (count > 0 && !(scores(idx[static_cast<size_t>(count - 1)]) > 0.0))) {
    throw ConfigError("insufficient coverage");
  }
  FeedSet out(idx.begin(), idx.begin() + count);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<FeedSet> select_feeds(const Scenario& s, const RMat& mean_gain) {
  if (mean_gain.rows() != s.K || mean_gain.cols() != s.N) {
    throw ConfigError("mean gain matrix must be K x N");
  }
  std::vector<FeedSet> sets;
  sets.reserve(static_cast<size_t>(s.M));
  for (int m = 0; m < s.M; ++m) {
    const RVec scores = mean_gain.middleRows(s.first_user(m), s.k).colwise().sum().transpose();
    sets.push_back(top_scoring_feeds(scores, s.n));
  }
  return sets;
}

ChannelRealization sample_channel(const Scenario& s, std::uint64_t trial_seed) {
  Rng rng(trial_seed);
  ChannelRealization ch;
  ch.feed_sets = s.feed_sets;
  ch.users_per_cluster = s.k;
  ch.trial_seed = trial_seed;
  ch.user_positions.reserve(static_cast<size_t>(s.K));
  for (int u = 0; u < s.K; ++u) {
    ch.user_positions.push_back(
        draw_in_disc(rng, s.beam_centers[static_cast<size_t>(u)], s.jitter * s.beam_radius));
  }
  ch.H_tilde.resize(s.K, s.N);
  for (int u = 0; u < s.K; ++u) {
    for (int j = 0; j < s.N; ++j) {
      const double d2 = squared_distance(ch.user_positions[static_cast<size_t>(u)],
                                         s.feed_positions[static_cast<size_t>(j)]);
      const double amp = s.g0 * std::exp(-s.alpha * d2);
      const Point2& x = ch.user_positions[static_cast<size_t>(u)];
      const Point2& f = s.feed_positions[static_cast<size_t>(j)];
      const double theta = s.phase_model == PhaseModel::iid
                               ? 2.0 * std::numbers::pi * rng.uniform()
                               : s.phase_scale * (x.x * f.x + x.y * f.y);
      ch.H_tilde(u, j) = std::polar(amp, theta);
    }
  }
  return ch;
}

CMat cluster_block(const ChannelRealization& ch, int m, int p) {
  const int M = ch.clusters();
  if (m < 0 || m >= M || p < 0 || p >= M) {
    throw ConfigError("cluster index out of range");
  }
  const FeedSet& cols = ch.feed_sets[static_cast<size_t>(p)];
  const int k = ch.users_per_cluster;
  CMat block(k, static_cast<Eigen::Index>(cols.size()));
  for (Eigen::Index c = 0; c < block.cols(); ++c) {
    block.col(c) = ch.H_tilde.block(m * k, cols[static_cast<size_t>(c)], k, 1);
  }
  return block;
}

ChannelRealization single_cluster_view(const ChannelRealization& ch) {
  ChannelRealization v;
  v.H_tilde = ch.H_tilde;
  FeedSet all(static_cast<size_t>(ch.H_tilde.cols()));
  std::iota(all.begin(), all.end(), 0);
  v.feed_sets = {all};
  v.users_per_cluster = ch.users();
  v.user_positions = ch.user_positions;
  v.trial_seed = ch.trial_seed;
  return v;
}

ExpectedGramians estimate_expected_gramians(const Scenario& s, int samples, std::uint64_t seed) {
  if (samples < 1) {
    throw ConfigError("samples must be at least 1");
  }
  ExpectedGramians out;
  out.sample_count = samples;
  out.seed = seed;
  out.gram.assign(static_cast<size_t>(s.M),
                  std::vector<CMat>(static_cast<size_t>(s.M), CMat::Zero(s.n, s.n)));
  for (int t = 0; t < samples; ++t) {
    const ChannelRealization ch =
        sample_channel(s, stable_hash({seed, static_cast<std::uint64_t>(t)}));
    for (int p = 0; p < s.M; ++p) {
      for (int m = 0; m < s.M; ++m) {
        const CMat h = cluster_block(ch, p, m);
        out.gram[static_cast<size_t>(p)][static_cast<size_t>(m)].noalias() += h.adjoint() * h;
      }
    }
  }
  for (auto& row : out.gram) {
    for (auto& g : row) {
      g = hermitize(g / static_cast<double>(samples));
    }
  }
  return out;
}

}  // namespace mgsat
