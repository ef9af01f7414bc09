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

#include "mgsat/metrics.hpp"
#include "mgsat/obbf.hpp"
#include "mgsat/scenario.hpp"

namespace mgsat {

enum class Scheme { ogbf, ogbf_single, obbf_adaptive, obbf_nulling, obbf_coarse, obbf_prefixed };
enum class Regularizer { lemma1_expected, lemma1_instantaneous, closed_form, intra_cluster };

std::string to_string(Scheme s);
std::string to_string(Regularizer r);
Scheme parse_scheme(const std::string& name);
Regularizer parse_regularizer(const std::string& name);
bool is_on_board(Scheme s);

struct ExperimentConfig {
  std::string scenario_path;
  std::vector<Scheme> schemes;
  std::vector<double> snr_db_list;
  int trials = 1;
  std::uint64_t master_seed = 1;
  Regularizer regularizer = Regularizer::lemma1_expected;
  std::string output_path;
  int calibration_samples = 200;
  int workers = 1;
};

/// Parses the experiment JSON. Relative scenario/output paths are resolved
/// against `base_dir`. Unknown keys are rejected.
ExperimentConfig parse_experiment_config(const std::string& json_text,
                                         const std::string& base_dir = "");
ExperimentConfig load_config(const std::string& path);

/// Quantities fixed over an experiment: the scenario, the expected channel
/// Gramians and the two fixed on-board beamformers.
struct ExperimentContext {
  Scenario scenario;
  ExpectedGramians gramians;
  std::vector<CMat> coarse_bfn;    // from the expected Gramians
  std::vector<CMat> prefixed_bfn;  // coarse design for a mismatched roll-off
};

/// Estimates Gramians with the scenario's own sample count and seed. The
/// pre-fixed beamformer is the coarse design of the same system with the
/// roll-off coefficient doubled.
ExperimentContext make_context(const Scenario& scenario);

/// The precoders of one on-board trial, exposed for tests and diagnostics.
struct ObbfDesign {
  std::vector<CMat> B;
  std::vector<CMat> T;
  std::vector<double> gamma;
  std::vector<double> t;
  std::vector<CMat> F;               // B_m T_m
  std::vector<ReceiverGains> D;      // (1/sqrt(t_m)) I
};

ObbfDesign design_obbf(const ExperimentContext& ctx, const ChannelRealization& ch, Scheme scheme,
                       Regularizer regularizer, const std::vector<double>& cluster_power);

/// Samples one channel and evaluates one scheme on it at total power P.
TrialResult run_trial(const ExperimentContext& ctx, Scheme scheme, Regularizer regularizer,
                      double total_power, std::uint64_t trial_seed);

std::uint64_t trial_seed(std::uint64_t master_seed, int snr_index, int trial);
std::uint64_t calibration_seed(std::uint64_t master_seed, int snr_index);

struct AggregateRow {
  std::string scheme;
  std::string regularizer;
  double snr_db = 0.0;
  int trials = 0;
  double mean_sinr_db = 0.0;        // dB of the linear mean over trials and users
  double mean_sinr_db_of_db = 0.0;  // mean of per-user dB values
  double mean_smse = 0.0;
  std::optional<double> mean_tm_dispersion;
};

struct ResultTable {
  std::vector<TrialResult> trials;  // sorted by scheme order, SNR index, trial
  std::vector<AggregateRow> aggregates;
  std::vector<double> calibrated_power;  // per SNR point
};

/// Aggregates in the order of first appearance of (scheme, snr) in `trials`.
std::vector<AggregateRow> aggregate(const std::vector<TrialResult>& trials);

/// Runs every (scheme, SNR, trial) combination on `cfg.workers` threads.
/// Output does not depend on the worker count. If a trial fails, completed
/// rows are written to cfg.output_path before the error propagates.
ResultTable run_experiment(const ExperimentConfig& cfg);
ResultTable run_experiment(const ExperimentConfig& cfg, const ExperimentContext& ctx);

struct CurveSummary {
  std::string scheme;
  std::string regularizer;
  std::vector<double> snr_db;
  std::vector<double> mean_sinr_db;
  std::vector<double> mean_sinr_db_of_db;
  std::vector<double> mean_smse;
  bool operator==(const CurveSummary&) const = default;
};

struct ResultSummary {
  int trials_per_point = 0;
  std::vector<double> calibrated_power;
  std::vector<CurveSummary> curves;
  bool operator==(const ResultSummary&) const = default;
};

ResultSummary summarize(const ResultTable& table);
std::string summary_to_json(const ResultSummary& summary);
ResultSummary summary_from_json(const std::string& text);

/// "<output without .csv>.summary.json".
std::string summary_path_for(const std::string& csv_path);

inline constexpr const char* kCsvHeader =
    "scheme,regularizer,snr_db,trial,cluster_or_user_scope,metric,value";

std::string results_csv(const ResultTable& table);
/// Writes the CSV and its JSON summary. Throws IoError.
void write_results(const ResultTable& table, const std::string& path);

struct CsvRow {
  std::string scheme;
  std::string regularizer;
  double snr_db = 0.0;
  std::string trial;
  std::string scope;
  std::string metric;
  double value = 0.0;
};

std::vector<CsvRow> read_results_csv(const std::string& path);

/// Values of `metric` for one scheme at one SNR point (trial rows only).
std::vector<double> select_metric(const std::vector<CsvRow>& rows, const std::string& scheme,
                                  double snr_db, const std::string& metric);

}  // namespace mgsat
