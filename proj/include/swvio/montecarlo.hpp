/*
 * Copyright 2026 swvio authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include "swvio/config.hpp"
#include "swvio/metrics.hpp"

namespace swvio {

struct ModelAggregate {
  double pos_rmse_m = 0.0;
  double ori_rmse_deg = 0.0;
  double pos_rmse_std = 0.0;
  std::map<double, double> odo_err_m;
  double nees_mean = 0.0;
  int diverged_runs = 0;
};

struct BenchmarkReport {
  ScenarioConfig config;
  /// model name → per-run metrics, runs in index order.
  std::map<std::string, std::vector<RunMetrics>> per_run;
  std::map<std::string, ModelAggregate> aggregate;
  /// Mean NEES over runs at each step (per model), for band checks.
  std::map<std::string, std::vector<double>> mean_nees_per_step;
  double wall_clock_synthesis_s = 0.0;
  double wall_clock_estimation_s = 0.0;
};

/// Runs the Monte-Carlo comparison: for every seeded run a single dataset is
/// synthesized and fed identically to every model's estimator. Trials run
/// concurrently; results are deterministic given (config, seed).
BenchmarkReport run_monte_carlo(const ScenarioConfig& cfg);

/// errors_<model>.csv per model plus summary.json; byte-identical across
/// reruns with the same config.
void write_outputs(const BenchmarkReport& report, const std::string& out_dir);

std::string summary_json(const BenchmarkReport& report);

}  // namespace swvio
