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

#include <Eigen/Core>

#include <cmath>

namespace swvio {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using VecX = Eigen::VectorXd;
using Mat3 = Eigen::Matrix3d;
using MatX = Eigen::MatrixXd;

// Trig coefficient branches switch to Taylor series below this angle (rad).
inline constexpr double kSmallAngle = 1e-7;

inline Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
  return m;
}

/// SO(3) exponential map (Rodrigues).
inline Mat3 exp_so3(const Vec3& phi) {
  const double th = phi.norm();
  const Mat3 w = skew(phi);
  if (th < kSmallAngle) {
    return Mat3::Identity() + w + 0.5 * w * w;
  }
  const double th2 = th * th;
  return Mat3::Identity() + (std::sin(th) / th) * w +
         ((1.0 - std::cos(th)) / th2) * (w * w);
}

inline Vec3 log_so3(const Mat3& r) {
  double c = 0.5 * (r.trace() - 1.0);
  c = std::clamp(c, -1.0, 1.0);
  const double th = std::acos(c);
  const Vec3 v(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
  if (th < kSmallAngle) return 0.5 * v;
  if (th > M_PI - 1e-6) {
    // near π: fall back to the symmetric part
    Mat3 k = 0.5 * (r + Mat3::Identity());
    Vec3 axis = k.diagonal().cwiseMax(0.0).cwiseSqrt();
    // fix signs from off-diagonals
    if (axis.x() > axis.y() && axis.x() > axis.z()) {
      axis.y() = std::copysign(axis.y(), r(0, 1) + r(1, 0));
      axis.z() = std::copysign(axis.z(), r(0, 2) + r(2, 0));
    } else if (axis.y() > axis.z()) {
      axis.x() = std::copysign(axis.x(), r(0, 1) + r(1, 0));
      axis.z() = std::copysign(axis.z(), r(1, 2) + r(2, 1));
    } else {
      axis.x() = std::copysign(axis.x(), r(0, 2) + r(2, 0));
      axis.y() = std::copysign(axis.y(), r(1, 2) + r(2, 1));
    }
    axis.normalize();
    if (v.dot(axis) < 0.0) axis = -axis;
    return th * axis;
  }
  return (0.5 * th / std::sin(th)) * v;
}

// (1 - cos θ)/θ² with series branch.
inline double so3_f1(double th) {
  if (th < kSmallAngle) {
    const double t2 = th * th;
    return 0.5 - t2 / 24.0 + t2 * t2 / 720.0;
  }
  return (1.0 - std::cos(th)) / (th * th);
}

// (θ - sin θ)/θ³ with series branch.
inline double so3_f2(double th) {
  if (th < kSmallAngle) {
    const double t2 = th * th;
    return 1.0 / 6.0 - t2 / 120.0 + t2 * t2 / 5040.0;
  }
  return (th - std::sin(th)) / (th * th * th);
}

/// Right Jacobian of SO(3): Exp(φ + δ) ≈ Exp(φ) Exp(J_r(φ) δ).
inline Mat3 right_jacobian(const Vec3& phi) {
  const double th = phi.norm();
  const Mat3 w = skew(phi);
  return Mat3::Identity() - so3_f1(th) * w + so3_f2(th) * (w * w);
}

}  // namespace swvio
