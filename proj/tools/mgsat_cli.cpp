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

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "mgsat/harness.hpp"
#include "mgsat/metrics.hpp"
#include "mgsat/regularization.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitIo = 4;

int run_command(const std::string& config_path, int workers, const std::string& output) {
  mgsat::ExperimentConfig cfg = mgsat::load_config(config_path);
  if (workers > 0) {
    cfg.workers = workers;
  }
  if (!output.empty()) {
    cfg.output_path = output;
  }
  if (cfg.output_path.empty()) {
    throw mgsat::ConfigError("no output_path in config and no --output given");
  }
  const mgsat::ResultTable table = mgsat::run_experiment(cfg);
  mgsat::write_results(table, cfg.output_path);
  for (const auto& a : table.aggregates) {
    std::printf("%-14s %-20s snr=%5.1f dB  mean SINR %7.3f dB  (mean of dB %7.3f)  SMSE %.4f\n",
                a.scheme.c_str(), a.regularizer.c_str(), a.snr_db, a.mean_sinr_db,
                a.mean_sinr_db_of_db, a.mean_smse);
  }
  std::printf("wrote %s and %s\n", cfg.output_path.c_str(),
              mgsat::summary_path_for(cfg.output_path).c_str());
  return 0;
}

int gamma_command(const std::vector<double>& lambda, const std::vector<double>& sigma, int k,
                  double pm) {
  if (lambda.size() != sigma.size()) {
    throw mgsat::ConfigError("--lambda and --sigma must have the same length");
  }
  mgsat::RegularizationInputs inp;
  inp.lambda = Eigen::Map<const mgsat::RVec>(lambda.data(), static_cast<Eigen::Index>(lambda.size()));
  inp.sigma = Eigen::Map<const mgsat::RVec>(sigma.data(), static_cast<Eigen::Index>(sigma.size()));
  inp.k = k;
  inp.P_m = pm;
  const double gamma = mgsat::solve_gamma(inp);
  const double t = mgsat::scaling_tm(inp.lambda, gamma, pm);
  std::printf("gamma %.17g\nt %.17g\n", gamma, t);
  return 0;
}

int histogram_command(const std::string& input, const std::string& scheme, double snr_db,
                      const std::string& metric) {
  const auto rows = mgsat::read_results_csv(input);
  const auto values = mgsat::select_metric(rows, scheme, snr_db, metric);
  if (values.empty()) {
    throw mgsat::ConfigError("no '" + metric + "' rows for scheme " + scheme + " at that SNR");
  }
  std::cout << mgsat::histogram_csv(mgsat::db_histogram(values));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed precoding for multi-gateway multibeam satellites"};
  app.require_subcommand(1);

  std::string config_path;
  std::string output;
  int workers = 0;
  auto* run = app.add_subcommand("run", "Run a Monte Carlo experiment");
  run->add_option("--config", config_path, "Experiment JSON")->required();
  run->add_option("--workers", workers, "Worker threads (overrides the config)");
  run->add_option("--output", output, "Results CSV (overrides the config)");

  std::vector<double> lambda;
  std::vector<double> sigma;
  int k = 0;
  double pm = 0.0;
  auto* gamma = app.add_subcommand("gamma-solve", "Solve for the regularization factor");
  gamma->add_option("--lambda", lambda, "Comma-separated eigenvalues")->required()->delimiter(',');
  gamma->add_option("--sigma", sigma, "Comma-separated leakage diagonal")->required()->delimiter(',');
  gamma->add_option("--k", k, "Users per cluster")->required();
  gamma->add_option("--pm", pm, "Cluster power")->required();

  std::string input;
  std::string scheme;
  double snr_db = 0.0;
  std::string metric = "sinr_db";
  auto* hist = app.add_subcommand("histogram", "dB histogram of per-user results");
  hist->add_option("--input", input, "Results CSV")->required();
  hist->add_option("--scheme", scheme, "Scheme name")->required();
  hist->add_option("--snr-db", snr_db, "SNR point")->required();
  hist->add_option("--metric", metric, "sinr_db (default) or sir_db");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run) return run_command(config_path, workers, output);
    if (*gamma) return gamma_command(lambda, sigma, k, pm);
    if (*hist) return histogram_command(input, scheme, snr_db, metric);
  } catch (const mgsat::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const mgsat::NumericalError& e) {
    std::fprintf(stderr, "numerical error: %s\n", e.what());
    return kExitNumerical;
  } catch (const mgsat::IoError& e) {
    std::fprintf(stderr, "I/O error: %s\n", e.what());
    return kExitIo;
  }
  return 0;
}
