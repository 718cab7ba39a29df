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

#include <utility>
#include <vector>

#include "swvio/preint.hpp"

namespace swvio {

using NodeId = long;

enum class RobustKind { kNone, kHuber, kCauchy };

/// Linearized residual: e(x̂), per-node Jacobians ∂e/∂δx, and the
/// information matrix Λ applied in the energy norm.
struct ResidualBlock {
  VecX e;
  std::vector<std::pair<NodeId, MatX>> jacobians;
  MatX information;
  RobustKind robust = RobustKind::kNone;
  double robust_k = 1.0;
  bool valid = true;

  double squared_norm() const { return e.dot(information * e); }
};

/// Rigid IMU-to-camera extrinsics: R(C←I) and the IMU position expressed in
/// the camera frame.
struct ExtrinsicCalib {
  Mat3 r_c_i = Mat3::Identity();
  Vec3 p_i_in_c = Vec3::Zero();
};

struct RelativePoseMeas {
  UnitQuaternion q;  ///< q(j←k)
  Vec3 p;            ///< position of j expressed in frame k
  Eigen::Matrix<double, 6, 6> cov;  ///< order [δθ, δp]
};

/// Robust cost γ(v) and IRLS weight dγ/dv for squared normalized residual v.
std::pair<double, double> robust_weight(RobustKind kind, double v, double k);

ResidualBlock imu_factor_model1(NodeId id_k, const ImuState& x_k,
                                NodeId id_k1, const ImuState& x_k1,
                                const PreintegratedFactor& f,
                                const Vec3& gravity);

ResidualBlock imu_factor_model2(NodeId id_k, const ImuState& x_k,
                                NodeId id_k1, const ImuState& x_k1,
                                const PreintegratedFactor& f);

enum class InvDepthCase {
  kAnchor,          ///< same time, anchoring camera
  kAnchorOtherCam,  ///< same time, other (stereo) camera
  kCross            ///< different time
};

/// Inverse-depth reprojection factor. Jacobians are emitted for the feature
/// (2×3) and, in the cross-time case, for both poses (2×6, order [δθ, δp]).
/// A projection with h₃ ≤ 1e-8 marks the block invalid.
ResidualBlock inverse_depth_factor(InvDepthCase c, NodeId id_feat,
                                   const FeatureInvDepth& feat, NodeId id_a,
                                   const Pose& pose_a, NodeId id_k,
                                   const Pose& pose_k,
                                   const ExtrinsicCalib& calib_i,
                                   const ExtrinsicCalib& calib_j,
                                   const Vec2& z, const Eigen::Matrix2d& info);

ResidualBlock relative_pose_factor(NodeId id_k, const Pose& pose_k,
                                   NodeId id_j, const Pose& pose_j,
                                   const RelativePoseMeas& m);

/// ∂(boxminus)/∂δθ for a quaternion block of a marginal prior:
/// q̃₄ I + ⌊q̃⌋ with q̃ = q̂ ⊗ q̆⁻¹.
Mat3 boxminus_jacobian_quat(const UnitQuaternion& q_hat,
                            const UnitQuaternion& q_bar);

}  // namespace swvio
