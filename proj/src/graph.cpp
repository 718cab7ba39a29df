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

#include "swvio/graph.hpp"

#include <algorithm>

namespace swvio {

int Node::dof() const {
  switch (kind) {
    case NodeKind::kImuState: return ImuState::kDof;
    case NodeKind::kPose: return Pose::kDof;
    case NodeKind::kFeature: return FeatureInvDepth::kDof;
    case NodeKind::kVector: return static_cast<int>(xv.size());
  }
  return 0;
}

void Node::boxplus(const Eigen::Ref<const VecX>& dx) {
  switch (kind) {
    case NodeKind::kImuState: xi = xi.boxplus(dx); break;
    case NodeKind::kPose: xp = xp.boxplus(dx); break;
    case NodeKind::kFeature: xf = xf.boxplus(dx); break;
    case NodeKind::kVector: xv += dx; break;
  }
}

VecX Node::boxminus_from(const Node& ref) const {
  if (ref.kind != kind)
    throw std::invalid_argument("Node::boxminus_from: kind mismatch");
  switch (kind) {
    case NodeKind::kImuState: return ImuState::boxminus(xi, ref.xi);
    case NodeKind::kPose: return Pose::boxminus(xp, ref.xp);
    case NodeKind::kFeature: return FeatureInvDepth::boxminus(xf, ref.xf);
    case NodeKind::kVector: return xv - ref.xv;
  }
  return VecX();
}

Pose Node::pose() const {
  switch (kind) {
    case NodeKind::kImuState: return pose_of(xi);
    case NodeKind::kPose: return xp;
    default: throw std::invalid_argument("Node::pose: node has no pose");
  }
}

MatX Node::boxminus_jacobian(const Node& ref) const {
  MatX j = MatX::Identity(dof(), dof());
  switch (kind) {
    case NodeKind::kImuState:
      j.block<3, 3>(0, 0) = boxminus_jacobian_quat(xi.q, ref.xi.q);
      break;
    case NodeKind::kPose:
      j.block<3, 3>(0, 0) = boxminus_jacobian_quat(xp.q, ref.xp.q);
      break;
    default:
      break;
  }
  return j;
}

Node Node::make(const ImuState& x) {
  Node n;
  n.kind = NodeKind::kImuState;
  n.xi = x;
  return n;
}
Node Node::make(const Pose& x) {
  Node n;
  n.kind = NodeKind::kPose;
  n.xp = x;
  return n;
}
Node Node::make(const FeatureInvDepth& f) {
  Node n;
  n.kind = NodeKind::kFeature;
  n.xf = f;
  return n;
}
Node Node::make(const VecX& v) {
  Node n;
  n.kind = NodeKind::kVector;
  n.xv = v;
  return n;
}

NodeId FactorGraph::add_node(Node n) {
  const NodeId id = next_id_++;
  nodes_.emplace(id, std::move(n));
  return id;
}

void FactorGraph::remove_node(NodeId id) { nodes_.erase(id); }

Node& FactorGraph::node(NodeId id) {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw std::invalid_argument("unknown node id");
  return it->second;
}

const Node& FactorGraph::node(NodeId id) const {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw std::invalid_argument("unknown node id");
  return it->second;
}

void FactorGraph::demote_to_pose(NodeId id) {
  Node& n = node(id);
  if (n.kind != NodeKind::kImuState)
    throw std::invalid_argument("demote_to_pose: not an IMU state");
  const Pose p = pose_of(n.xi);
  n = Node::make(p);
}

void FactorGraph::remove_factors(const std::vector<const Factor*>& dead) {
  factors_.erase(std::remove_if(factors_.begin(), factors_.end(),
                                [&](const std::shared_ptr<Factor>& f) {
                                  return std::find(dead.begin(), dead.end(),
                                                   f.get()) != dead.end();
                                }),
                 factors_.end());
}

int FactorGraph::total_dof() const {
  int n = 0;
  for (const auto& [id, node] : nodes_) n += node.dof();
  return n;
}

namespace {

// Scatters a [δθ, δp] pose Jacobian into the node's error coordinates.
MatX scatter_pose_jacobian(const MatX& j_pose, const Node& n) {
  if (n.kind == NodeKind::kPose) return j_pose;
  if (n.kind == NodeKind::kImuState) {
    MatX j = MatX::Zero(j_pose.rows(), ImuState::kDof);
    j.leftCols<3>() = j_pose.leftCols<3>();
    j.middleCols<3>(12) = j_pose.rightCols<3>();
    return j;
  }
  throw std::invalid_argument("pose jacobian on non-pose node");
}

}  // namespace

ResidualBlock ImuPreintFactor::linearize(const FactorGraph& g) const {
  const ImuState& xk = g.node(ids_[0]).xi;
  const ImuState& xk1 = g.node(ids_[1]).xi;
  if (f_.model == PreintModel::kModel2)
    return imu_factor_model2(ids_[0], xk, ids_[1], xk1, f_);
  return imu_factor_model1(ids_[0], xk, ids_[1], xk1, f_, gravity_);
}

ResidualBlock VisualFactor::linearize(const FactorGraph& g) const {
  const Node& anchor = g.node(ids_[1]);
  const Node& obs = g.node(ids_[2]);
  const FeatureInvDepth& feat = g.node(ids_[0]).xf;

  InvDepthCase c;
  if (ids_[1] == ids_[2]) {
    c = (anchor_cam_ == obs_cam_) ? InvDepthCase::kAnchor
                                  : InvDepthCase::kAnchorOtherCam;
  } else {
    c = InvDepthCase::kCross;
  }
  ResidualBlock rb = inverse_depth_factor(
      c, ids_[0], feat, ids_[1], anchor.pose(), ids_[2], obs.pose(),
      calib_anchor_, calib_obs_, z_, info_);
  rb.robust = robust_;
  rb.robust_k = robust_k_;
  if (!rb.valid) return rb;
  // Map [δθ, δp] blocks onto the incident nodes' error coordinates.
  for (auto& [id, j] : rb.jacobians) {
    if (id == ids_[0]) continue;
    j = scatter_pose_jacobian(j, g.node(id));
  }
  return rb;
}

ResidualBlock RelPoseFactor::linearize(const FactorGraph& g) const {
  const Node& nk = g.node(ids_[0]);
  const Node& nj = g.node(ids_[1]);
  ResidualBlock rb =
      relative_pose_factor(ids_[0], nk.pose(), ids_[1], nj.pose(), m_);
  rb.robust = robust_;
  rb.robust_k = robust_k_;
  for (auto& [id, j] : rb.jacobians) j = scatter_pose_jacobian(j, g.node(id));
  return rb;
}

ResidualBlock LinearFactor::linearize(const FactorGraph& g) const {
  ResidualBlock rb;
  rb.e = -b_;
  for (size_t i = 0; i < ids_.size(); ++i) {
    rb.e += a_[i] * g.node(ids_[i]).xv;
    rb.jacobians.emplace_back(ids_[i], a_[i]);
  }
  rb.information = info_;
  return rb;
}

ResidualBlock MarginalPriorFactor::linearize(const FactorGraph& g) const {
  VecX dx(prior_.cols);
  for (size_t i = 0; i < prior_.retained.size(); ++i) {
    const Node& current = g.node(prior_.retained[i]);
    dx.segment(prior_.col_offset[i], current.dof()) =
        current.boxminus_from(prior_.lin_point[i]);
  }
  ResidualBlock rb;
  rb.e = prior_.a_m * dx + prior_.b_m;
  for (size_t i = 0; i < prior_.retained.size(); ++i) {
    const Node& current = g.node(prior_.retained[i]);
    const MatX cols =
        prior_.a_m.middleCols(prior_.col_offset[i], current.dof());
    rb.jacobians.emplace_back(
        prior_.retained[i],
        cols * current.boxminus_jacobian(prior_.lin_point[i]));
  }
  rb.information = MatX::Identity(rb.e.size(), rb.e.size());
  return rb;
}

std::shared_ptr<MarginalPriorFactor> make_diagonal_prior(NodeId id,
                                                         const Node& value,
                                                         const VecX& sigmas) {
  if (sigmas.size() != value.dof())
    throw std::invalid_argument("make_diagonal_prior: sigma size mismatch");
  MarginalPrior p;
  p.cols = value.dof();
  p.a_m = sigmas.cwiseInverse().asDiagonal();
  p.b_m = VecX::Zero(value.dof());
  p.retained = {id};
  p.lin_point = {value};
  p.col_offset = {0};
  return std::make_shared<MarginalPriorFactor>(std::move(p));
}

}  // namespace swvio
