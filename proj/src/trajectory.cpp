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

#include "swvio/trajectory.hpp"

#include <stdexcept>

namespace swvio {

namespace {

Mat3 rot_x(double a) {
  Mat3 r;
  r << 1, 0, 0, 0, std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a);
  return r;
}
Mat3 rot_y(double a) {
  Mat3 r;
  r << std::cos(a), 0, std::sin(a), 0, 1, 0, -std::sin(a), 0, std::cos(a);
  return r;
}
Mat3 rot_z(double a) {
  Mat3 r;
  r << std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a), 0, 0, 0, 1;
  return r;
}

}  // namespace

TrajectorySample AnalyticTrajectory::eval(double t) const {
  if (t < 0.0 || t > cfg_.duration)
    throw std::out_of_range("trajectory_eval: t outside configured duration");

  const double om = cfg_.angular_rate;
  const double wz = 2.0 * M_PI * cfg_.vertical_freq;
  const double wr = 2.0 * M_PI * cfg_.rollpitch_freq;

  TrajectorySample s;
  s.p = cfg_.center + Vec3(cfg_.radius * std::cos(om * t),
                           cfg_.radius * std::sin(om * t),
                           cfg_.vertical_amp * std::sin(wz * t));
  s.v = Vec3(-cfg_.radius * om * std::sin(om * t),
             cfg_.radius * om * std::cos(om * t),
             cfg_.vertical_amp * wz * std::cos(wz * t));
  s.a = Vec3(-cfg_.radius * om * om * std::cos(om * t),
             -cfg_.radius * om * om * std::sin(om * t),
             -cfg_.vertical_amp * wz * wz * std::sin(wz * t));

  // ZYX Euler: yaw tracks the horizontal velocity heading (exact for the
  // circle), pitch and roll oscillate in quadrature.
  const double yaw = om * t + M_PI / 2.0;
  const double pitch = cfg_.rollpitch_amp * std::sin(wr * t);
  const double roll = cfg_.rollpitch_amp * std::cos(wr * t);
  const double dyaw = om;
  const double dpitch = cfg_.rollpitch_amp * wr * std::cos(wr * t);
  const double droll = -cfg_.rollpitch_amp * wr * std::sin(wr * t);

  const Mat3 r_g_i = rot_z(yaw) * rot_y(pitch) * rot_x(roll);  // I → G
  s.q = UnitQuaternion::from_rotation(r_g_i.transpose());

  // Body rates for the ZYX chain.
  s.omega_body =
      Vec3(droll, 0.0, 0.0) +
      rot_x(roll).transpose() * Vec3(0.0, dpitch, 0.0) +
      rot_x(roll).transpose() * rot_y(pitch).transpose() * Vec3(0.0, 0.0, dyaw);

  s.accel_meas = r_g_i.transpose() * (s.a + cfg_.gravity());
  return s;
}

}  // namespace swvio
