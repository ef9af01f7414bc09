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

#include "mgsat/harness.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "mgsat/linalg.hpp"
#include "mgsat/ogbf.hpp"
#include "mgsat/random.hpp"
#include "mgsat/regularization.hpp"

namespace mgsat {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr double kOgbfTolerance = 1e-8;
constexpr int kOgbfMaxIter = 100;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string resolve(const std::string& path, const std::string& base_dir) {
  if (path.empty() || base_dir.empty() || fs::path(path).is_absolute()) {
    return path;
  }
  return (fs::path(base_dir) / path).lexically_normal().string();
}

template <typename T>
T field(const json& doc, const char* key) {
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config field '") + key + "': " + e.what());
  }
}

std::string with_context(Scheme scheme, int cluster, const std::exception& e) {
  std::string msg = to_string(scheme);
  if (cluster >= 0) {
    msg += " cluster " + std::to_string(cluster);
  }
  return msg + ": " + e.what();
}

}  // namespace

std::string to_string(Scheme s) {
  switch (s) {
    case Scheme::ogbf: return "ogbf";
    case Scheme::ogbf_single: return "ogbf-single";
    case Scheme::obbf_adaptive: return "obbf-adaptive";
    case Scheme::obbf_nulling: return "obbf-nulling";
    case Scheme::obbf_coarse: return "obbf-coarse";
    case Scheme::obbf_prefixed: return "obbf-prefixed";
  }
  return "unknown";
}

std::string to_string(Regularizer r) {
  switch (r) {
    case Regularizer::lemma1_expected: return "lemma1-expected";
    case Regularizer::lemma1_instantaneous: return "lemma1-instantaneous";
    case Regularizer::closed_form: return "closed-form";
    case Regularizer::intra_cluster: return "intra-cluster";
  }
  return "unknown";
}

Scheme parse_scheme(const std::string& name) {
  for (Scheme s : {Scheme::ogbf, Scheme::ogbf_single, Scheme::obbf_adaptive, Scheme::obbf_nulling,
                   Scheme::obbf_coarse, Scheme::obbf_prefixed}) {
    if (to_string(s) == name) {
      return s;
    }
  }
  throw ConfigError("unknown scheme '" + name + "'");
}

Regularizer parse_regularizer(const std::string& name) {
  for (Regularizer r : {Regularizer::lemma1_expected, Regularizer::lemma1_instantaneous,
                        Regularizer::closed_form, Regularizer::intra_cluster}) {
    if (to_string(r) == name) {
      return r;
    }
  }
  throw ConfigError("unknown regularizer '" + name + "'");
}

bool is_on_board(Scheme s) { return s != Scheme::ogbf && s != Scheme::ogbf_single; }

ExperimentConfig parse_experiment_config(const std::string& json_text, const std::string& base_dir) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  if (!doc.is_object()) {
    throw ConfigError("config must hold a JSON object");
  }
  static const std::set<std::string> known = {
      "scenario_path", "schemes", "snr_db_list", "trials", "master_seed", "regularizer",
      "output_path", "calibration_samples", "workers"};
  for (const auto& item : doc.items()) {
    if (!known.contains(item.key())) {
      throw ConfigError("unknown config field '" + item.key() + "'");
    }
  }
  for (const char* required : {"scenario_path", "schemes", "snr_db_list", "trials"}) {
    if (!doc.contains(required)) {
      throw ConfigError(std::string("missing config field '") + required + "'");
    }
  }
  ExperimentConfig cfg;
  cfg.scenario_path = resolve(field<std::string>(doc, "scenario_path"), base_dir);
  for (const auto& name : field<std::vector<std::string>>(doc, "schemes")) {
    cfg.schemes.push_back(parse_scheme(name));
  }
  cfg.snr_db_list = field<std::vector<double>>(doc, "snr_db_list");
  cfg.trials = field<int>(doc, "trials");
  if (doc.contains("master_seed")) cfg.master_seed = field<std::uint64_t>(doc, "master_seed");
  if (doc.contains("regularizer")) {
    cfg.regularizer = parse_regularizer(field<std::string>(doc, "regularizer"));
  }
  if (doc.contains("output_path")) {
    cfg.output_path = resolve(field<std::string>(doc, "output_path"), base_dir);
  }
  if (doc.contains("calibration_samples")) {
    cfg.calibration_samples = field<int>(doc, "calibration_samples");
  }
  if (doc.contains("workers")) cfg.workers = field<int>(doc, "workers");

  if (cfg.schemes.empty()) throw ConfigError("schemes non-empty");
  if (cfg.snr_db_list.empty()) throw ConfigError("snr_db_list non-empty");
  if (cfg.trials < 1) throw ConfigError("trials must be at least 1");
  if (cfg.calibration_samples < 1) throw ConfigError("calibration_samples must be at least 1");
  if (cfg.workers < 1) throw ConfigError("workers must be at least 1");
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open config file " + path);
  }
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_experiment_config(buf.str(), fs::path(path).parent_path().string());
}

ExperimentContext make_context(const Scenario& scenario) {
  ExperimentContext ctx;
  ctx.scenario = scenario;
  ctx.gramians =
      estimate_expected_gramians(scenario, scenario.gramian_samples, scenario.gramian_seed);
  Scenario mismatched = scenario;
  mismatched.alpha *= 2.0;
  const ExpectedGramians mismatched_gramians =
      estimate_expected_gramians(mismatched, scenario.gramian_samples, scenario.gramian_seed);
  for (int m = 0; m < scenario.M; ++m) {
    ctx.coarse_bfn.push_back(bfn_coarse(ctx.gramians.at(m, m), scenario.k));
    ctx.prefixed_bfn.push_back(bfn_prefixed(bfn_coarse(mismatched_gramians.at(m, m), scenario.k)));
  }
  return ctx;
}

ObbfDesign design_obbf(const ExperimentContext& ctx, const ChannelRealization& ch, Scheme scheme,
                       Regularizer regularizer, const std::vector<double>& cluster_power) {
  const Scenario& s = ctx.scenario;
  ObbfDesign d;
  int cluster = -1;
  try {
    for (cluster = 0; cluster < s.M; ++cluster) {
      const int m = cluster;
      const double P_m = cluster_power[static_cast<size_t>(m)];
      const CMat H_mm = cluster_block(ch, m, m);
      CMat B;
      switch (scheme) {
        case Scheme::obbf_adaptive: B = bfn_adaptive(H_mm); break;
        case Scheme::obbf_nulling:
          B = bfn_nulling(H_mm, protected_channel(ch, protected_users(s, m), m)).B;
          break;
        case Scheme::obbf_coarse: B = ctx.coarse_bfn[static_cast<size_t>(m)]; break;
        case Scheme::obbf_prefixed: B = ctx.prefixed_bfn[static_cast<size_t>(m)]; break;
        default: throw ConfigError("not an on-board scheme");
      }
      double gamma = s.k / P_m;
      if (regularizer != Regularizer::intra_cluster) {
        const CMat sigma = regularizer == Regularizer::lemma1_instantaneous
                               ? build_sigma_instantaneous(ch, m)
                               : build_sigma_hat(ctx.gramians, m);
        if (regularizer == Regularizer::closed_form) {
          gamma = gamma_closed_form(B, sigma, s.k, P_m);
        } else {
          RegularizationInputs inp;
          CMat U;
          effective_gram_eig(B, H_mm, U, inp.lambda);
          inp.sigma = sigma_diagonal(U, B, sigma);
          inp.k = s.k;
          inp.P_m = P_m;
          gamma = solve_gamma(inp);
        }
      }
      ClusterPrecoder pre = precoder_Tm(B, H_mm, gamma, P_m);
      d.F.push_back(B * pre.T);
      d.D.push_back(ReceiverGains::Constant(s.k, cd(1.0 / std::sqrt(pre.t), 0.0)));
      d.B.push_back(std::move(B));
      d.T.push_back(std::move(pre.T));
      d.gamma.push_back(gamma);
      d.t.push_back(pre.t);
    }
  } catch (const NumericalError& e) {
    throw NumericalError(with_context(scheme, cluster, e));
  } catch (const ConfigError& e) {
    throw ConfigError(with_context(scheme, cluster, e));
  }
  return d;
}

TrialResult run_trial(const ExperimentContext& ctx, Scheme scheme, Regularizer regularizer,
                      double total_power, std::uint64_t seed) {
  const Scenario s = ctx.scenario.with_total_power(total_power);
  const ChannelRealization ch = sample_channel(s, seed);
  TrialResult r;
  r.scheme = to_string(scheme);
  r.regularizer = is_on_board(scheme) ? to_string(regularizer) : "none";
  r.seed = seed;

  std::vector<double> sinr;
  if (scheme == Scheme::ogbf || scheme == Scheme::ogbf_single) {
    const bool single = scheme == Scheme::ogbf_single;
    const ChannelRealization view = single ? single_cluster_view(ch) : ch;
    const std::vector<double> power = single ? std::vector<double>{s.P} : s.cluster_power;
    OgbfState st;
    try {
      st = ogbf_alternating(view, power, kOgbfTolerance, kOgbfMaxIter);
    } catch (const NumericalError& e) {
      throw NumericalError(with_context(scheme, -1, e));
    }
    const SmseBreakdown e = smse(view, st.F, st.D);
    r.smse = e.total;
    r.trace_Em = e.per_cluster;
    r.nu = st.nu;
    r.iterations = st.iterations;
    sinr = sinr_per_user(view, st.F);
  } else {
    const ObbfDesign d = design_obbf(ctx, ch, scheme, regularizer, s.cluster_power);
    const SmseBreakdown e = smse(ch, d.F, d.D);
    r.smse = e.total;
    r.trace_Em = e.per_cluster;
    r.t = d.t;
    r.gamma = d.gamma;
    r.tm_dispersion = tm_dispersion(d.t);
    sinr = sinr_per_user(ch, d.F);
    for (double v : sir_no_precoding(ch, d.B, s.cluster_power)) {
      r.sir_db.push_back(to_db(v));
    }
  }
  r.sinr_db.reserve(sinr.size());
  for (double v : sinr) {
    r.sinr_db.push_back(to_db(v));
  }
  return r;
}

std::uint64_t trial_seed(std::uint64_t master_seed, int snr_index, int trial) {
  return stable_hash({master_seed, static_cast<std::uint64_t>(snr_index),
                      static_cast<std::uint64_t>(trial)});
}

std::uint64_t calibration_seed(std::uint64_t master_seed, int snr_index) {
  return stable_hash({master_seed, 0xca11b4a7eULL, static_cast<std::uint64_t>(snr_index)});
}

std::vector<AggregateRow> aggregate(const std::vector<TrialResult>& trials) {
  std::vector<AggregateRow> rows;
  struct Acc {
    double lin = 0.0, db = 0.0, smse = 0.0, disp = 0.0;
    long users = 0;
    int count = 0;
    bool has_disp = false;
  };
  std::vector<Acc> accs;
  std::map<std::pair<std::string, double>, size_t> index;
  for (const TrialResult& t : trials) {
    const auto key = std::make_pair(t.scheme, t.snr_db);
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, rows.size()).first;
      AggregateRow row;
      row.scheme = t.scheme;
      row.regularizer = t.regularizer;
      row.snr_db = t.snr_db;
      rows.push_back(row);
      accs.emplace_back();
    }
    Acc& a = accs[it->second];
    for (double v : t.sinr_db) {
      a.lin += from_db(v);
      a.db += v;
      ++a.users;
    }
    a.smse += t.smse;
    if (std::isfinite(t.tm_dispersion)) {
      a.disp += t.tm_dispersion;
      a.has_disp = true;
    }
    ++a.count;
  }
  for (size_t i = 0; i < rows.size(); ++i) {
    const Acc& a = accs[i];
    rows[i].trials = a.count;
    rows[i].mean_sinr_db = to_db(a.lin / static_cast<double>(a.users));
    rows[i].mean_sinr_db_of_db = a.db / static_cast<double>(a.users);
    rows[i].mean_smse = a.smse / a.count;
    if (a.has_disp) {
      rows[i].mean_tm_dispersion = a.disp / a.count;
    }
  }
  return rows;
}

ResultTable run_experiment(const ExperimentConfig& cfg) {
  const Scenario scenario = build_scenario(load_scenario_config(cfg.scenario_path));
  return run_experiment(cfg, make_context(scenario));
}

ResultTable run_experiment(const ExperimentConfig& cfg, const ExperimentContext& ctx) {
  if (cfg.schemes.empty()) throw ConfigError("schemes non-empty");
  if (cfg.snr_db_list.empty()) throw ConfigError("snr_db_list non-empty");
  if (cfg.trials < 1) throw ConfigError("trials must be at least 1");

  ResultTable table;
  for (size_t i = 0; i < cfg.snr_db_list.size(); ++i) {
    table.calibrated_power.push_back(calibrate_power(ctx.scenario, cfg.calibration_samples,
                                                     calibration_seed(cfg.master_seed, static_cast<int>(i)),
                                                     from_db(cfg.snr_db_list[i])));
  }

  struct Task {
    size_t scheme;
    int snr;
    int trial;
  };
  std::vector<Task> tasks;
  for (size_t sc = 0; sc < cfg.schemes.size(); ++sc) {
    for (int i = 0; i < static_cast<int>(cfg.snr_db_list.size()); ++i) {
      for (int t = 0; t < cfg.trials; ++t) {
        tasks.push_back({sc, i, t});
      }
    }
  }
  std::vector<std::optional<TrialResult>> results(tasks.size());
  std::vector<std::exception_ptr> errors(tasks.size());
  std::atomic<size_t> next{0};
  std::atomic<bool> failed{false};
  auto worker = [&] {
    for (size_t i = next++; i < tasks.size() && !failed; i = next++) {
      const Task& task = tasks[i];
      try {
        TrialResult r = run_trial(ctx, cfg.schemes[task.scheme], cfg.regularizer,
                                  table.calibrated_power[static_cast<size_t>(task.snr)],
                                  trial_seed(cfg.master_seed, task.snr, task.trial));
        r.snr_db = cfg.snr_db_list[static_cast<size_t>(task.snr)];
        r.trial = task.trial;
        results[i] = std::move(r);
      } catch (...) {
        errors[i] = std::current_exception();
        failed = true;
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    const int n = std::max(1, std::min<int>(cfg.workers, static_cast<int>(tasks.size())));
    for (int w = 1; w < n; ++w) {
      pool.emplace_back(worker);
    }
    worker();
  }
  // Tasks were enumerated in canonical order already.
  for (auto& r : results) {
    if (r) {
      table.trials.push_back(std::move(*r));
    }
  }
  table.aggregates = aggregate(table.trials);
  for (const auto& e : errors) {
    if (e) {
      if (!cfg.output_path.empty()) {
        write_results(table, cfg.output_path);
      }
      std::rethrow_exception(e);
    }
  }
  return table;
}

ResultSummary summarize(const ResultTable& table) {
  ResultSummary s;
  s.calibrated_power = table.calibrated_power;
  std::map<std::string, size_t> index;
  for (const AggregateRow& a : table.aggregates) {
    auto it = index.find(a.scheme);
    if (it == index.end()) {
      it = index.emplace(a.scheme, s.curves.size()).first;
      s.curves.push_back({a.scheme, a.regularizer, {}, {}, {}, {}});
    }
    CurveSummary& c = s.curves[it->second];
    c.snr_db.push_back(a.snr_db);
    c.mean_sinr_db.push_back(a.mean_sinr_db);
    c.mean_sinr_db_of_db.push_back(a.mean_sinr_db_of_db);
    c.mean_smse.push_back(a.mean_smse);
    s.trials_per_point = a.trials;
  }
  return s;
}

std::string summary_to_json(const ResultSummary& s) {
  json doc;
  doc["trials_per_point"] = s.trials_per_point;
  doc["calibrated_power"] = s.calibrated_power;
  doc["curves"] = json::array();
  for (const CurveSummary& c : s.curves) {
    doc["curves"].push_back({{"scheme", c.scheme},
                             {"regularizer", c.regularizer},
                             {"snr_db", c.snr_db},
                             {"mean_sinr_db", c.mean_sinr_db},
                             {"mean_sinr_db_of_db", c.mean_sinr_db_of_db},
                             {"mean_smse", c.mean_smse}});
  }
  return doc.dump(2) + "\n";
}

ResultSummary summary_from_json(const std::string& text) {
  try {
    const json doc = json::parse(text);
    ResultSummary s;
    s.trials_per_point = doc.at("trials_per_point").get<int>();
    s.calibrated_power = doc.at("calibrated_power").get<std::vector<double>>();
    for (const json& c : doc.at("curves")) {
      s.curves.push_back({c.at("scheme").get<std::string>(),
                          c.at("regularizer").get<std::string>(),
                          c.at("snr_db").get<std::vector<double>>(),
                          c.at("mean_sinr_db").get<std::vector<double>>(),
                          c.at("mean_sinr_db_of_db").get<std::vector<double>>(),
                          c.at("mean_smse").get<std::vector<double>>()});
    }
    return s;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("summary parse error: ") + e.what());
  }
}

std::string summary_path_for(const std::string& csv_path) {
  fs::path p(csv_path);
  if (p.extension() == ".csv") {
    p.replace_extension();
  }
  return p.string() + ".summary.json";
}

std::string results_csv(const ResultTable& table) {
  std::ostringstream out;
  out << kCsvHeader << '\n';
  auto row = [&](const std::string& scheme, const std::string& reg, double snr,
                 const std::string& trial, const std::string& scope, const char* metric,
                 double value) {
    out << scheme << ',' << reg << ',' << fmt(snr) << ',' << trial << ',' << scope << ','
        << metric << ',' << fmt(value) << '\n';
  };
  for (const TrialResult& t : table.trials) {
    const std::string trial = std::to_string(t.trial);
    auto put = [&](const std::string& scope, const char* metric, double v) {
      row(t.scheme, t.regularizer, t.snr_db, trial, scope, metric, v);
    };
    put("all", "smse", t.smse);
    for (size_t m = 0; m < t.trace_Em.size(); ++m) {
      put("cluster:" + std::to_string(m), "trace_Em", t.trace_Em[m]);
    }
    for (size_t u = 0; u < t.sinr_db.size(); ++u) {
      put("user:" + std::to_string(u), "sinr_db", t.sinr_db[u]);
    }
    for (size_t u = 0; u < t.sir_db.size(); ++u) {
      put("user:" + std::to_string(u), "sir_db", t.sir_db[u]);
    }
    for (size_t m = 0; m < t.t.size(); ++m) {
      put("cluster:" + std::to_string(m), "t_m", t.t[m]);
    }
    for (size_t m = 0; m < t.gamma.size(); ++m) {
      put("cluster:" + std::to_string(m), "gamma_m", t.gamma[m]);
    }
    for (size_t m = 0; m < t.nu.size(); ++m) {
      put("cluster:" + std::to_string(m), "nu_m", t.nu[m]);
    }
    if (std::isfinite(t.tm_dispersion)) {
      put("all", "tm_dispersion", t.tm_dispersion);
    } else {
      put("all", "iterations", t.iterations);
    }
  }
  for (const AggregateRow& a : table.aggregates) {
    row(a.scheme, a.regularizer, a.snr_db, "mean", "all", "mean_sinr_db", a.mean_sinr_db);
    row(a.scheme, a.regularizer, a.snr_db, "mean", "all", "mean_sinr_db_of_db",
        a.mean_sinr_db_of_db);
    row(a.scheme, a.regularizer, a.snr_db, "mean", "all", "mean_smse", a.mean_smse);
    if (a.mean_tm_dispersion) {
      row(a.scheme, a.regularizer, a.snr_db, "mean", "all", "mean_tm_dispersion",
          *a.mean_tm_dispersion);
    }
  }
  return out.str();
}

void write_results(const ResultTable& table, const std::string& path) {
  auto write_file = [](const std::string& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw IoError("cannot write " + p);
    }
    out << content;
    if (!out) {
      throw IoError("write failed for " + p);
    }
  };
  write_file(path, results_csv(table));
  write_file(summary_path_for(path), summary_to_json(summarize(table)));
}

std::vector<CsvRow> read_results_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open results file " + path);
  }
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) {
    throw ConfigError("results file " + path + " lacks the expected header");
  }
  std::vector<CsvRow> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) {
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      cells.push_back(cell);
    }
    if (cells.size() != 7) {
      throw ConfigError("results line " + std::to_string(line_no) + ": expected 7 columns");
    }
    CsvRow r;
    r.scheme = cells[0];
    r.regularizer = cells[1];
    r.snr_db = std::strtod(cells[2].c_str(), nullptr);
    r.trial = cells[3];
    r.scope = cells[4];
    r.metric = cells[5];
    r.value = std::strtod(cells[6].c_str(), nullptr);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<double> select_metric(const std::vector<CsvRow>& rows, const std::string& scheme,
                                  double snr_db, const std::string& metric) {
  std::vector<double> out;
  for (const CsvRow& r : rows) {
    if (r.scheme == scheme && r.metric == metric && r.trial != "mean" &&
        std::abs(r.snr_db - snr_db) <= 1e-9 * std::max(1.0, std::abs(snr_db))) {
      out.push_back(r.value);
    }
  }
  return out;
}

}  // namespace mgsat
