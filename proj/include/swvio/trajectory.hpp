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

#include "swvio/state.hpp"

namespace swvio {

/// Circle-sinusoid trajectory family. Position follows a horizontal circle
/// with a vertical sinusoid; yaw follows the velocity direction and a
/// sinusoidal roll/pitch is superimposed to exercise the rotating-frame
/// terms. All derivatives are analytic.
struct TrajectoryConfig {
  double radius = 5.0;          ///< m
  double angular_rate = 0.8;    ///< rad/s around the circle
  double vertical_amp = 1.0;    ///< m
  double vertical_freq = 1.0;   ///< Hz
  double rollpitch_amp = 0.3;   ///< rad
  double rollpitch_freq = 0.5;  ///< Hz
  double duration = 60.0;       ///< s
  Vec3 center = Vec3::Zero();
  double gravity_mag = 9.81;

  Vec3 gravity() const { return Vec3(0.0, 0.0, gravity_mag); }
};

struct TrajectorySample {
  UnitQuaternion q;   ///< q(I←G)
  Vec3 p, v, a;       ///< global position, velocity, acceleration
  Vec3 omega_body;    ///< true body angular velocity, rad/s
  Vec3 accel_meas;    ///< ideal specific-force reading R(I←G)(a + g)
};

class AnalyticTrajectory {
 public:
  explicit AnalyticTrajectory(TrajectoryConfig cfg) : cfg_(cfg) {}

  TrajectorySample eval(double t) const;
  const TrajectoryConfig& config() const { return cfg_; }

  ImuState state_at(double t) const {
    const TrajectorySample s = eval(t);
    ImuState x;
    x.q = s.q;
    x.v = s.v;
    x.p = s.p;
    return x;
  }

 private:
  TrajectoryConfig cfg_;
};

}  // namespace swvio
