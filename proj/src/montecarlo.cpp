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

#include "swvio/montecarlo.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <thread>

#include <json.hpp>

#include "swvio/estimator.hpp"

namespace swvio {

namespace {

// Stream ids for sub-seed derivation (documented counter scheme).
enum SeedStream : uint64_t {
  kSeedImu = 1,
  kSeedFeatures = 2,
  kSeedRelPose = 3,
};

struct RunOutput {
  std::map<std::string, RunMetrics> by_model;
};

RunOutput execute_run(const ScenarioConfig& cfg, int run_index) {
  RunOutput out;
  const AnalyticTrajectory traj(cfg.trajectory);

  const ImuData imu = synthesize_imu(
      traj, cfg.imu_rate_hz, cfg.noise, cfg.init_bias_gyro,
      cfg.init_bias_accel, derive_seed(cfg.seed, kSeedImu, run_index));

  FeatureData features;
  RelativePoseSeq relposes;
  const int frames =
      static_cast<int>(std::floor(cfg.trajectory.duration * cfg.cam_rate_hz));
  if (cfg.mode == EstimatorMode::kTightlyCoupled) {
    features = synthesize_features(
        traj, cfg.feature_count, cfg.cam_rate_hz, cfg.pixel_sigma, cfg.rig,
        derive_seed(cfg.seed, kSeedFeatures, run_index));
  } else {
    std::vector<double> times;
    for (int f = 0; f <= frames; ++f) times.push_back(f / cfg.cam_rate_hz);
    Eigen::Matrix<double, 6, 6> cov = Eigen::Matrix<double, 6, 6>::Zero();
    cov.topLeftCorner<3, 3>() = std::pow(cfg.relpose_sigma_rot, 2) * Mat3::Identity();
    cov.bottomRightCorner<3, 3>() = std::pow(cfg.relpose_sigma_pos, 2) * Mat3::Identity();
    relposes = synthesize_relative_poses(
        traj, times, cov, derive_seed(cfg.seed, kSeedRelPose, run_index));
  }

  // Identical measurement streams are fed to every model.
  for (PreintModel model : cfg.models) {
    VioEstimator est(cfg.estimator_config(model));

    ImuState x0 = traj.state_at(0.0);
    x0.bg = Vec3::Zero();
    x0.ba = Vec3::Zero();
    est.initialize(0.0, x0);

    std::vector<TimedPose> est_poses, truth_poses;
    std::vector<double> nees;
    est_poses.push_back({0.0, pose_of(x0)});
    truth_poses.push_back({0.0, pose_of(traj.state_at(0.0))});
    bool diverged = false;

    const double cam_dt = 1.0 / cfg.cam_rate_hz;
    const int samples_per_frame =
        static_cast<int>(std::round(cfg.imu_rate_hz / cfg.cam_rate_hz));
    for (int f = 1; f <= frames; ++f) {
      const double t = f * cam_dt;
      const int i0 = (f - 1) * samples_per_frame;
      const int i1 = f * samples_per_frame;
      if (i1 >= static_cast<int>(imu.samples.size())) break;
      const std::span<const ImuSample> span(imu.samples.data() + i0,
                                            i1 - i0 + 1);

      const FrameFeatures* ff = nullptr;
      if (cfg.mode == EstimatorMode::kTightlyCoupled &&
          f < static_cast<int>(features.frames.size()))
        ff = &features.frames[f];
      const RelativePoseMeas* rp = nullptr;
      if (cfg.mode == EstimatorMode::kLooselyCoupled &&
          f - 1 < static_cast<int>(relposes.meas.size()))
        rp = &relposes.meas[f - 1];

      const auto res = est.process_frame(t, span, ff, rp);
      if (!res.estimate.p.allFinite() ||
          res.status == SolveStatus::kRankDeficient) {
        diverged = true;
        break;
      }

      est_poses.push_back({t, pose_of(res.estimate)});
      ImuState truth = traj.state_at(t);
      truth.bg = imu.bg_true[std::min<size_t>(i1, imu.bg_true.size() - 1)];
      truth.ba = imu.ba_true[std::min<size_t>(i1, imu.ba_true.size() - 1)];
      truth_poses.push_back({t, pose_of(truth)});

      if (res.has_covariance) {
        const VecX dx = ImuState::boxminus(res.estimate, truth);
        const double v = dx.dot(res.covariance.ldlt().solve(dx));
        nees.push_back(v);
      }
    }

    RunMetrics m;
    if (est_poses.size() >= 2 && !diverged) {
      m = compute_metrics(est_poses, truth_poses, cfg.segment_lengths_m,
                          nees);
    }
    m.diverged = diverged;
    out.by_model[to_string(model)] = std::move(m);
  }
  return out;
}

}  // namespace

BenchmarkReport run_monte_carlo(const ScenarioConfig& cfg) {
  BenchmarkReport report;
  report.config = cfg;

  const auto t0 = std::chrono::steady_clock::now();
  std::vector<RunOutput> outputs(cfg.runs);
  std::atomic<int> next_run{0};
  const unsigned n_threads =
      std::max(1u, std::min(std::thread::hardware_concurrency(),
                            static_cast<unsigned>(cfg.runs)));
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < n_threads; ++w) {
    pool.emplace_back([&]() {
      while (true) {
        const int r = next_run.fetch_add(1);
        if (r >= cfg.runs) break;
        outputs[r] = execute_run(cfg, r);
      }
    });
  }
  for (auto& th : pool) th.join();
  const auto t1 = std::chrono::steady_clock::now();
  report.wall_clock_estimation_s =
      std::chrono::duration<double>(t1 - t0).count();

  // Deterministic aggregation in run order.
  for (PreintModel model : cfg.models) {
    const std::string name = to_string(model);
    auto& runs = report.per_run[name];
    for (int r = 0; r < cfg.runs; ++r)
      runs.push_back(outputs[r].by_model.at(name));

    ModelAggregate agg;
    std::vector<double> rmse_list;
    double nees_sum = 0.0;
    int nees_count = 0;
    size_t max_steps = 0;
    for (const RunMetrics& m : runs) {
      if (m.diverged) {
        agg.diverged_runs += 1;
        continue;
      }
      rmse_list.push_back(m.pos_rmse_m);
      agg.pos_rmse_m += m.pos_rmse_m;
      agg.ori_rmse_deg += m.ori_rmse_deg;
      for (const auto& [seg, err] : m.odo_err_m) agg.odo_err_m[seg] += err;
      if (!m.nees.empty()) {
        nees_sum += m.nees_mean;
        nees_count += 1;
      }
      max_steps = std::max(max_steps, m.nees.size());
    }
    const int good = static_cast<int>(rmse_list.size());
    if (good > 0) {
      agg.pos_rmse_m /= good;
      agg.ori_rmse_deg /= good;
      for (auto& [seg, err] : agg.odo_err_m) err /= good;
      double var = 0.0;
      for (double v : rmse_list) var += (v - agg.pos_rmse_m) * (v - agg.pos_rmse_m);
      agg.pos_rmse_std = good > 1 ? std::sqrt(var / (good - 1)) : 0.0;
      if (nees_count > 0) agg.nees_mean = nees_sum / nees_count;
    }
    report.aggregate[name] = agg;

    // Per-step mean NEES across runs.
    std::vector<double>& mean_nees = report.mean_nees_per_step[name];
    mean_nees.assign(max_steps, 0.0);
    std::vector<int> counts(max_steps, 0);
    for (const RunMetrics& m : runs) {
      if (m.diverged) continue;
      for (size_t i = 0; i < m.nees.size(); ++i) {
        mean_nees[i] += m.nees[i];
        counts[i] += 1;
      }
    }
    for (size_t i = 0; i < max_steps; ++i)
      if (counts[i] > 0) mean_nees[i] /= counts[i];
  }
  return report;
}

std::string summary_json(const BenchmarkReport& report) {
  nlohmann::ordered_json j;
  j["config"] = nlohmann::ordered_json::parse(report.config.to_json_text());
  for (const auto& [name, agg] : report.aggregate) {
    nlohmann::ordered_json m;
    m["pos_rmse_m"] = agg.pos_rmse_m;
    m["ori_rmse_deg"] = agg.ori_rmse_deg;
    m["pos_rmse_std"] = agg.pos_rmse_std;
    nlohmann::ordered_json odo;
    for (const auto& [seg, err] : agg.odo_err_m) {
      char key[32];
      std::snprintf(key, sizeof(key), "%g", seg);
      odo[key] = err;
    }
    m["odo_err_m"] = odo;
    m["nees_mean"] = agg.nees_mean;
    m["diverged_runs"] = agg.diverged_runs;
    j["models"][name] = m;
  }
  j["wall_clock"] = {{"synthesis_s", report.wall_clock_synthesis_s},
                     {"estimation_s", 0.0}};  // excluded: not reproducible
  return j.dump(2) + "\n";
}

void write_outputs(const BenchmarkReport& report, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  for (const auto& [name, runs] : report.per_run) {
    std::ofstream csv(out_dir + "/errors_" + name + ".csv",
                      std::ios::binary);
    csv << "run,t,pos_err_m,ori_err_deg,nees\n";
    char line[256];
    for (size_t r = 0; r < runs.size(); ++r) {
      const RunMetrics& m = runs[r];
      for (size_t i = 0; i < m.t.size(); ++i) {
        const double nees = i < m.nees.size() ? m.nees[i] : -1.0;
        std::snprintf(line, sizeof(line), "%zu,%.9f,%.17g,%.17g,%.17g\n", r,
                      m.t[i], m.pos_err_m[i], m.ori_err_deg[i], nees);
        csv << line;
      }
    }
  }
  std::ofstream js(out_dir + "/summary.json", std::ios::binary);
  js << summary_json(report);
}

}  // namespace swvio
