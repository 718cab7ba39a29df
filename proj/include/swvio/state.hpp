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

#include <stdexcept>

#include "swvio/quat.hpp"

namespace swvio {

/// Full IMU navigation state. The 15-dof error ordering is
/// [δθ, δb_ω, δv, δb_a, δp]; all covariances use the same ordering.
struct ImuState {
  UnitQuaternion q;  ///< q(I←G): global-to-local orientation
  Vec3 bg = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  Vec3 ba = Vec3::Zero();
  Vec3 p = Vec3::Zero();

  static constexpr int kDof = 15;

  Mat3 rot() const { return q.rotation(); }  // R(I←G)

  ImuState boxplus(const Eigen::Ref<const VecX>& dx) const {
    if (dx.size() != kDof) throw std::invalid_argument("ImuState::boxplus: need 15-dof error");
    ImuState out;
    out.q = q.boxplus(dx.segment<3>(0));
    out.bg = bg + dx.segment<3>(3);
    out.v = v + dx.segment<3>(6);
    out.ba = ba + dx.segment<3>(9);
    out.p = p + dx.segment<3>(12);
    return out;
  }

  static VecX boxminus(const ImuState& x2, const ImuState& x1) {
    VecX dx(kDof);
    dx.segment<3>(0) = UnitQuaternion::boxminus(x2.q, x1.q);
    dx.segment<3>(3) = x2.bg - x1.bg;
    dx.segment<3>(6) = x2.v - x1.v;
    dx.segment<3>(9) = x2.ba - x1.ba;
    dx.segment<3>(12) = x2.p - x1.p;
    return dx;
  }
};

/// Orientation + position clone kept in the pose window after the velocity
/// and biases of a state have been marginalized. Error ordering [δθ, δp].
struct Pose {
  UnitQuaternion q;  ///< q(I←G)
  Vec3 p = Vec3::Zero();

  static constexpr int kDof = 6;

  Mat3 rot() const { return q.rotation(); }

  Pose boxplus(const Eigen::Ref<const VecX>& dx) const {
    if (dx.size() != kDof) throw std::invalid_argument("Pose::boxplus: need 6-dof error");
    Pose out;
    out.q = q.boxplus(dx.segment<3>(0));
    out.p = p + dx.segment<3>(3);
    return out;
  }

  static VecX boxminus(const Pose& x2, const Pose& x1) {
    VecX dx(kDof);
    dx.segment<3>(0) = UnitQuaternion::boxminus(x2.q, x1.q);
    dx.segment<3>(3) = x2.p - x1.p;
    return dx;
  }
};

inline Pose pose_of(const ImuState& x) { return Pose{x.q, x.p}; }

/// Inverse-depth feature in its anchor camera: normalized coordinates
/// (α, β) and inverse depth ρ ≥ 0 (ρ = 0 encodes a point at infinity).
struct FeatureInvDepth {
  double alpha = 0.0;
  double beta = 0.0;
  double rho = 0.0;
  long anchor_node = -1;  ///< node id of the anchoring state
  int anchor_cam = 0;     ///< anchoring camera index (left = 0)

  static constexpr int kDof = 3;

  Vec3 coords() const { return Vec3(alpha, beta, rho); }

  FeatureInvDepth boxplus(const Eigen::Ref<const VecX>& dx) const {
    if (dx.size() != kDof) throw std::invalid_argument("FeatureInvDepth::boxplus: need 3-dof error");
    FeatureInvDepth out = *this;
    out.alpha += dx(0);
    out.beta += dx(1);
    out.rho += dx(2);
    return out;
  }

  static VecX boxminus(const FeatureInvDepth& f2, const FeatureInvDepth& f1) {
    return f2.coords() - f1.coords();
  }
};

}  // namespace swvio
