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

#include <map>

#include "swvio/state.hpp"

namespace swvio {

struct TimedPose {
  double t = 0.0;
  Pose pose;
};

struct RunMetrics {
  std::vector<double> t;
  std::vector<double> pos_err_m;
  std::vector<double> ori_err_deg;
  std::vector<double> nees;  ///< empty when no covariance was exported
  double pos_rmse_m = 0.0;
  double ori_rmse_deg = 0.0;
  std::map<double, double> odo_err_m;  ///< segment length → mean end error
  double nees_mean = 0.0;
  bool diverged = false;
};

/// Per-step position/orientation errors, their RMSE, odometric error over
/// fixed-length segments (each segment's start pose aligned to truth), and
/// the mean NEES when per-step values are supplied.
RunMetrics compute_metrics(const std::vector<TimedPose>& estimate,
                           const std::vector<TimedPose>& truth,
                           const std::vector<double>& segment_lengths_m,
                           const std::vector<double>& nees = {});

}  // namespace swvio
