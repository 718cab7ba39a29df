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

#include "swvio/estimator.hpp"

#include <algorithm>

namespace swvio {

EstimatorConfig::EstimatorConfig() {
  init_prior_sigmas = VecX(15);
  init_prior_sigmas << 1e-4, 1e-4, 1e-4,   // θ
      1e-3, 1e-3, 1e-3,                    // b_ω
      1e-3, 1e-3, 1e-3,                    // v
      1e-2, 1e-2, 1e-2,                    // b_a
      1e-4, 1e-4, 1e-4;                    // p
}

VioEstimator::VioEstimator(EstimatorConfig cfg)
    : cfg_(std::move(cfg)), window_(cfg_.window) {}

void VioEstimator::initialize(double t0, const ImuState& x0) {
  if (initialized_) throw std::logic_error("estimator already initialized");
  prev_node_ = graph_.add_node(Node::make(x0));
  graph_.add_factor(make_diagonal_prior(prev_node_, Node::make(x0),
                                        cfg_.init_prior_sigmas));
  window_.push_state(prev_node_);
  prev_time_ = t0;
  initialized_ = true;
}

double VioEstimator::measurement_info() const {
  const double sigma_n =
      std::max(cfg_.pixel_sigma, 1e-3) / cfg_.rig.focal_px;
  return 1.0 / (sigma_n * sigma_n);
}

void VioEstimator::add_visual_factor(NodeId feat_node, NodeId anchor,
                                     NodeId obs, int cam, const Vec2& uv) {
  const Eigen::Matrix2d info =
      measurement_info() * Eigen::Matrix2d::Identity();
  graph_.add_factor(std::make_shared<VisualFactor>(
      feat_node, anchor, 0, obs, cam, uv, info, cfg_.rig.left,
      cam == 0 ? cfg_.rig.left : cfg_.rig.right, cfg_.visual_robust,
      cfg_.visual_robust_k));
}

void VioEstimator::try_activate(long feat_id, Track& track) {
  if (track.feat_node >= 0) return;
  if (track.frames_seen < cfg_.min_track_frames) return;
  if (track.pending.empty()) return;

  // Anchor at the first pending left-camera observation.
  auto anchor_it =
      std::find_if(track.pending.begin(), track.pending.end(),
                   [](const PendingObs& o) { return o.cam == 0; });
  if (anchor_it == track.pending.end()) return;
  const NodeId anchor = anchor_it->node;
  const Vec2 anchor_uv = anchor_it->uv;

  FeatureInvDepth feat;
  feat.alpha = anchor_uv.x();
  feat.beta = anchor_uv.y();
  feat.anchor_node = anchor;
  feat.anchor_cam = 0;

  // Inverse depth from the stereo partner at the anchor time when present,
  // otherwise a mid-range starting value.
  feat.rho = 0.1;
  for (const PendingObs& o : track.pending) {
    if (o.node != anchor || o.cam != 1) continue;
    const Mat3 r_j_i =
        cfg_.rig.right.r_c_i * cfg_.rig.left.r_c_i.transpose();
    const Vec3 av = r_j_i * Vec3(feat.alpha, feat.beta, 1.0);
    const Vec3 bv = cfg_.rig.right.p_i_in_c -
                    r_j_i * cfg_.rig.left.p_i_in_c;
    // Least squares over both rows of Π(a + ρ b) = z.
    double num = 0.0, den = 0.0;
    for (int r = 0; r < 2; ++r) {
      const double ar = av(r) - o.uv(r) * av(2);
      const double br = bv(r) - o.uv(r) * bv(2);
      num += ar * br;
      den += br * br;
    }
    if (den > 1e-12) feat.rho = std::max(0.0, -num / den);
    break;
  }

  track.feat_node = graph_.add_node(Node::make(feat));
  track.anchor_node = anchor;
  for (const PendingObs& o : track.pending)
    add_visual_factor(track.feat_node, anchor, o.node, o.cam, o.uv);
  track.pending.clear();
}

void VioEstimator::add_frame_observations(NodeId node,
                                          const FrameFeatures& feats) {
  std::map<long, bool> seen_this_frame;
  for (const FeatureObs& o : feats.obs) {
    Track& track = tracks_[o.feature_id];
    if (!seen_this_frame.count(o.feature_id)) {
      track.frames_seen += 1;
      track.last_frame_node = node;
      seen_this_frame[o.feature_id] = true;
    }
    if (track.feat_node >= 0) {
      add_visual_factor(track.feat_node, track.anchor_node, node, o.cam,
                        o.uv);
    } else {
      track.pending.push_back({node, o.cam, o.uv});
    }
  }
  for (auto& [id, seen] : seen_this_frame) try_activate(id, tracks_[id]);
}

VioEstimator::FrameResult VioEstimator::process_frame(
    double t, std::span<const ImuSample> imu, const FrameFeatures* features,
    const RelativePoseMeas* relpose) {
  if (!initialized_) throw std::logic_error("estimator not initialized");
  if (imu.size() < 2)
    throw std::invalid_argument("process_frame: need at least two samples");

  const ImuState prev = graph_.node(prev_node_).xi;

  BiasLinearization lin;
  lin.bg = prev.bg;
  lin.ba = prev.ba;
  if (cfg_.model == PreintModel::kModel2) lin.q_star = prev.q;
  PreintState ps = preint_begin(cfg_.model, lin, cfg_.noise);
  for (size_t i = 0; i + 1 < imu.size(); ++i) {
    const double dt = imu[i + 1].t - imu[i].t;
    preint_step(ps, imu[i], dt, cfg_.gravity);
  }
  const PreintegratedFactor factor = preint_finalize(ps);

  const ImuState predicted = predict_state(prev, factor, cfg_.gravity);
  const NodeId node = graph_.add_node(Node::make(predicted));
  graph_.add_factor(std::make_shared<ImuPreintFactor>(prev_node_, node,
                                                      factor, cfg_.gravity));

  if (cfg_.mode == EstimatorMode::kTightlyCoupled && features != nullptr) {
    add_frame_observations(node, *features);
  }
  if (cfg_.mode == EstimatorMode::kLooselyCoupled && relpose != nullptr) {
    graph_.add_factor(
        std::make_shared<RelPoseFactor>(prev_node_, node, *relpose));
  }

  const SolveResult solved = solve(graph_, cfg_.solver);

  FrameResult out;
  out.node = node;
  out.estimate = graph_.node(node).xi;
  out.status = solved.status;
  out.final_cost = solved.final_cost;
  if (solved.status == SolveStatus::kConverged ||
      solved.status == SolveStatus::kMaxIterations) {
    out.covariance = solved.covariance_of(node);
    out.has_covariance = true;
  }

  // Window maintenance: demote/marginalize after the solve so the prior is
  // built at the current estimates.
  const AdvanceResult adv = window_.push_state(node);
  if (!adv.empty()) {
    std::vector<NodeId> marg_feats;
    if (adv.marg_pose) {
      for (auto& [fid, track] : tracks_) {
        if (track.feat_node >= 0 && track.anchor_node == *adv.marg_pose)
          marg_feats.push_back(track.feat_node);
        // Pending tracks anchored at the dying pose lose those entries.
        if (track.feat_node < 0) {
          std::erase_if(track.pending, [&](const PendingObs& o) {
            return o.node == *adv.marg_pose;
          });
        }
      }
    }
    marginalize(graph_, adv.to_marg_spec(marg_feats));
    if (adv.marg_pose) {
      for (auto it = tracks_.begin(); it != tracks_.end();) {
        if (it->second.feat_node >= 0 &&
            it->second.anchor_node == *adv.marg_pose)
          it = tracks_.erase(it);
        else
          ++it;
      }
    }
  }

  prev_node_ = node;
  prev_time_ = t;
  return out;
}

}  // namespace swvio
