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

#include "swvio/so3.hpp"

namespace swvio {

/// Unit quaternion, JPL convention. Storage is [qx qy qz q4] with the vector
/// part first and the scalar part last. Composition satisfies
/// R(q ⊗ p) = R(q) R(p), so frame chains read the same way as rotation
/// matrix products: q(c←a) = q(c←b) ⊗ q(b←a).
class UnitQuaternion {
 public:
  UnitQuaternion() : q_(0.0, 0.0, 0.0, 1.0) {}

  // Normalizes and canonicalizes (q4 >= 0) so boxminus returns the short arc.
  explicit UnitQuaternion(const Vec4& q) : q_(q) { canonicalize(); }
  UnitQuaternion(double x, double y, double z, double w) : q_(x, y, z, w) {
    canonicalize();
  }

  static UnitQuaternion identity() { return UnitQuaternion(); }

  /// Quaternion whose rotation matrix is Exp(-θ); this is the JPL small
  /// rotation [θ/‖θ‖ sin(‖θ‖/2); cos(‖θ‖/2)], exact for any θ.
  static UnitQuaternion from_theta(const Vec3& theta) {
    const double th = theta.norm();
    Vec4 q;
    if (th < kSmallAngle) {
      q.head<3>() = 0.5 * theta;
      q(3) = 1.0;
    } else {
      q.head<3>() = (std::sin(0.5 * th) / th) * theta;
      q(3) = std::cos(0.5 * th);
    }
    return UnitQuaternion(q);
  }

  static UnitQuaternion from_rotation(const Mat3& r) {
    // Shepperd's method on the JPL parameterization.
    Vec4 q;
    const double tr = r.trace();
    if (tr > 0.0) {
      double s = std::sqrt(tr + 1.0) * 2.0;
      q(3) = 0.25 * s;
      q(0) = (r(1, 2) - r(2, 1)) / s;
      q(1) = (r(2, 0) - r(0, 2)) / s;
      q(2) = (r(0, 1) - r(1, 0)) / s;
    } else if (r(0, 0) > r(1, 1) && r(0, 0) > r(2, 2)) {
      double s = std::sqrt(1.0 + r(0, 0) - r(1, 1) - r(2, 2)) * 2.0;
      q(0) = 0.25 * s;
      q(3) = (r(1, 2) - r(2, 1)) / s;
      q(1) = (r(0, 1) + r(1, 0)) / s;
      q(2) = (r(0, 2) + r(2, 0)) / s;
    } else if (r(1, 1) > r(2, 2)) {
      double s = std::sqrt(1.0 + r(1, 1) - r(0, 0) - r(2, 2)) * 2.0;
      q(1) = 0.25 * s;
      q(3) = (r(2, 0) - r(0, 2)) / s;
      q(0) = (r(0, 1) + r(1, 0)) / s;
      q(2) = (r(1, 2) + r(2, 1)) / s;
    } else {
      double s = std::sqrt(1.0 + r(2, 2) - r(0, 0) - r(1, 1)) * 2.0;
      q(2) = 0.25 * s;
      q(3) = (r(0, 1) - r(1, 0)) / s;
      q(0) = (r(0, 2) + r(2, 0)) / s;
      q(1) = (r(1, 2) + r(2, 1)) / s;
    }
    return UnitQuaternion(q);
  }

  const Vec4& coeffs() const { return q_; }
  Vec3 vec() const { return q_.head<3>(); }
  double w() const { return q_(3); }

  /// q ⊗ p = R(p) q = L(q) p.
  UnitQuaternion operator*(const UnitQuaternion& p) const {
    const Vec3 qv = vec();
    const Vec3 pv = p.vec();
    Vec4 out;
    out.head<3>() = w() * pv + p.w() * qv - qv.cross(pv);
    out(3) = w() * p.w() - qv.dot(pv);
    return UnitQuaternion(out);
  }

  UnitQuaternion inverse() const {
    return UnitQuaternion(Vec4(-q_(0), -q_(1), -q_(2), q_(3)));
  }

  /// Rotation matrix of this quaternion (for q = q(b←a), maps a-frame
  /// vectors into frame b).
  Mat3 rotation() const {
    const Vec3 v = vec();
    const double s = w();
    return (2.0 * s * s - 1.0) * Mat3::Identity() - 2.0 * s * skew(v) +
           2.0 * (v * v.transpose());
  }

  /// Zeroth-order integrator step: orientation after holding body rate ω
  /// for dt, q(t+dt) = from_theta(ω dt) ⊗ q(t).
  static UnitQuaternion step(const Vec3& omega, double dt) {
    return from_theta(omega * dt);
  }

  UnitQuaternion boxplus(const Vec3& dtheta) const {
    return from_theta(dtheta) * (*this);
  }

  /// 2 vec(q2 ⊗ q1⁻¹), the short-arc rotation taking q1 to q2.
  static Vec3 boxminus(const UnitQuaternion& q2, const UnitQuaternion& q1) {
    return 2.0 * (q2 * q1.inverse()).vec();
  }

 private:
  void canonicalize() {
    q_.normalize();
    if (q_(3) < 0.0) q_ = -q_;
  }

  Vec4 q_;
};

/// L(q) such that q ⊗ p = L(q) p.
inline Eigen::Matrix4d quat_left_matrix(const UnitQuaternion& q) {
  Eigen::Matrix4d l;
  l.topLeftCorner<3, 3>() = q.w() * Mat3::Identity() - skew(q.vec());
  l.topRightCorner<3, 1>() = q.vec();
  l.bottomLeftCorner<1, 3>() = -q.vec().transpose();
  l(3, 3) = q.w();
  return l;
}

/// R(p) such that q ⊗ p = R(p) q.
inline Eigen::Matrix4d quat_right_matrix(const UnitQuaternion& p) {
  Eigen::Matrix4d r;
  r.topLeftCorner<3, 3>() = p.w() * Mat3::Identity() + skew(p.vec());
  r.topRightCorner<3, 1>() = p.vec();
  r.bottomLeftCorner<1, 3>() = -p.vec().transpose();
  r(3, 3) = p.w();
  return r;
}

}  // namespace swvio
