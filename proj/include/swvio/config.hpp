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

#include <string>

#include "swvio/estimator.hpp"

namespace swvio {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Full benchmark scenario. Parsed from a single JSON document with
/// sections {trajectory, imu, camera, estimator, models, runs, seed};
/// unknown keys are rejected.
struct ScenarioConfig {
  TrajectoryConfig trajectory;

  double imu_rate_hz = 100.0;
  ImuNoiseSpec noise{1.6968e-4, 2.0e-3, 1.9393e-5, 3.0e-3};
  Vec3 init_bias_gyro = Vec3::Zero();
  Vec3 init_bias_accel = Vec3::Zero();

  double cam_rate_hz = 10.0;
  int feature_count = 80;
  double pixel_sigma = 1.0;
  StereoRig rig = StereoRig::standard();

  EstimatorMode mode = EstimatorMode::kTightlyCoupled;
  WindowPolicy window;
  int max_iterations = 8;
  RobustKind visual_robust = RobustKind::kCauchy;
  double visual_robust_k = 1.0;
  double relpose_sigma_rot = 0.01;  ///< rad, loosely-coupled synthesis
  double relpose_sigma_pos = 0.02;  ///< m

  std::vector<PreintModel> models = {PreintModel::kModel1,
                                     PreintModel::kModel2,
                                     PreintModel::kDiscrete};
  int runs = 50;
  uint64_t seed = 42;
  std::vector<double> segment_lengths_m = {7.0, 14.0, 21.0, 28.0, 35.0};

  EstimatorConfig estimator_config(PreintModel model) const;

  static ScenarioConfig from_json_text(const std::string& text);
  static ScenarioConfig from_json_file(const std::string& path);
  std::string to_json_text() const;
};

PreintModel model_from_string(const std::string& s);

}  // namespace swvio
