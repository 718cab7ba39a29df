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
#include <memory>
#include <vector>

#include "swvio/factors.hpp"

namespace swvio {

enum class NodeKind { kImuState, kPose, kFeature, kVector };

/// Tagged union of the state kinds a graph node can hold.
struct Node {
  NodeKind kind = NodeKind::kVector;
  ImuState xi;
  Pose xp;
  FeatureInvDepth xf;
  VecX xv;

  int dof() const;
  void boxplus(const Eigen::Ref<const VecX>& dx);
  VecX boxminus_from(const Node& ref) const;  ///< this ⊟ ref
  Pose pose() const;  ///< valid for kImuState and kPose

  /// ∂((x̂ ⊞ δx) ⊟ x̆)/∂δx at δx = 0: identity except for quaternion blocks.
  MatX boxminus_jacobian(const Node& ref) const;

  static Node make(const ImuState& x);
  static Node make(const Pose& x);
  static Node make(const FeatureInvDepth& f);
  static Node make(const VecX& v);
};

class FactorGraph;

class Factor {
 public:
  virtual ~Factor() = default;
  virtual ResidualBlock linearize(const FactorGraph& g) const = 0;
  virtual const std::vector<NodeId>& nodes() const = 0;
  virtual const char* name() const = 0;
  /// Whether this factor constrains the velocity/bias block of the node
  /// (pose-only factors survive a velocity/bias marginalization).
  virtual bool touches_velocity_bias(NodeId) const { return true; }
};

class FactorGraph {
 public:
  NodeId add_node(Node n);
  void remove_node(NodeId id);
  bool has_node(NodeId id) const { return nodes_.count(id) != 0; }
  Node& node(NodeId id);
  const Node& node(NodeId id) const;
  /// Replaces an IMU state by its pose clone, keeping the id.
  void demote_to_pose(NodeId id);

  void add_factor(std::shared_ptr<Factor> f) { factors_.push_back(std::move(f)); }
  void remove_factors(const std::vector<const Factor*>& dead);

  const std::map<NodeId, Node>& nodes() const { return nodes_; }
  const std::vector<std::shared_ptr<Factor>>& factors() const { return factors_; }

  int total_dof() const;

 private:
  std::map<NodeId, Node> nodes_;
  std::vector<std::shared_ptr<Factor>> factors_;
  NodeId next_id_ = 0;
};

/// Preintegrated IMU factor between two full IMU states.
class ImuPreintFactor : public Factor {
 public:
  ImuPreintFactor(NodeId k, NodeId k1, PreintegratedFactor f, Vec3 gravity)
      : ids_{k, k1}, f_(std::move(f)), gravity_(std::move(gravity)) {}
  ResidualBlock linearize(const FactorGraph& g) const override;
  const std::vector<NodeId>& nodes() const override { return ids_; }
  const char* name() const override { return "imu"; }
  const PreintegratedFactor& measurement() const { return f_; }

 private:
  std::vector<NodeId> ids_;
  PreintegratedFactor f_;
  Vec3 gravity_;
};

/// Inverse-depth reprojection factor; the case is resolved from the anchor
/// and observing (node, camera) pair.
class VisualFactor : public Factor {
 public:
  VisualFactor(NodeId feat, NodeId anchor, int anchor_cam, NodeId obs,
               int obs_cam, Vec2 z, Eigen::Matrix2d info,
               ExtrinsicCalib calib_anchor, ExtrinsicCalib calib_obs,
               RobustKind robust = RobustKind::kNone, double robust_k = 1.0)
      : ids_{feat, anchor, obs},
        anchor_cam_(anchor_cam),
        obs_cam_(obs_cam),
        z_(std::move(z)),
        info_(std::move(info)),
        calib_anchor_(std::move(calib_anchor)),
        calib_obs_(std::move(calib_obs)),
        robust_(robust),
        robust_k_(robust_k) {}
  ResidualBlock linearize(const FactorGraph& g) const override;
  const std::vector<NodeId>& nodes() const override { return ids_; }
  const char* name() const override { return "visual"; }
  bool touches_velocity_bias(NodeId) const override { return false; }

 private:
  std::vector<NodeId> ids_;  // [feature, anchor, observer]
  int anchor_cam_, obs_cam_;
  Vec2 z_;
  Eigen::Matrix2d info_;
  ExtrinsicCalib calib_anchor_, calib_obs_;
  RobustKind robust_;
  double robust_k_;
};

class RelPoseFactor : public Factor {
 public:
  RelPoseFactor(NodeId k, NodeId j, RelativePoseMeas m,
                RobustKind robust = RobustKind::kNone, double robust_k = 1.0)
      : ids_{k, j}, m_(std::move(m)), robust_(robust), robust_k_(robust_k) {}
  ResidualBlock linearize(const FactorGraph& g) const override;
  const std::vector<NodeId>& nodes() const override { return ids_; }
  const char* name() const override { return "relpose"; }
  bool touches_velocity_bias(NodeId) const override { return false; }

 private:
  std::vector<NodeId> ids_;
  RelativePoseMeas m_;
  RobustKind robust_;
  double robust_k_;
};

/// e = Σ_i A_i x_i − b on vector nodes.
class LinearFactor : public Factor {
 public:
  LinearFactor(std::vector<NodeId> ids, std::vector<MatX> a, VecX b, MatX info)
      : ids_(std::move(ids)), a_(std::move(a)), b_(std::move(b)),
        info_(std::move(info)) {}
  ResidualBlock linearize(const FactorGraph& g) const override;
  const std::vector<NodeId>& nodes() const override { return ids_; }
  const char* name() const override { return "linear"; }

 private:
  std::vector<NodeId> ids_;
  std::vector<MatX> a_;
  VecX b_;
  MatX info_;
};

/// Square-root prior replacing marginalized measurements:
/// e = A_m (x̂_r ⊟ x̆_r) + b_m, Λ = I.
struct MarginalPrior {
  MatX a_m;
  VecX b_m;
  std::vector<NodeId> retained;
  std::vector<Node> lin_point;   // parallel to retained
  std::vector<int> col_offset;   // parallel to retained
  int cols = 0;
  bool regularized = false;
};

class MarginalPriorFactor : public Factor {
 public:
  explicit MarginalPriorFactor(MarginalPrior p) : prior_(std::move(p)) {
    ids_ = prior_.retained;
  }
  ResidualBlock linearize(const FactorGraph& g) const override;
  const std::vector<NodeId>& nodes() const override { return ids_; }
  const char* name() const override { return "prior"; }
  const MarginalPrior& prior() const { return prior_; }

 private:
  MarginalPrior prior_;
  std::vector<NodeId> ids_;
};

/// Diagonal prior on a single node, used to anchor the first state.
std::shared_ptr<MarginalPriorFactor> make_diagonal_prior(NodeId id,
                                                         const Node& value,
                                                         const VecX& sigmas);

}  // namespace swvio
