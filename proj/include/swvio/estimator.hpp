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

#include <span>

#include "swvio/sim.hpp"
#include "swvio/solver.hpp"
#include "swvio/window.hpp"

namespace swvio {

enum class EstimatorMode { kTightlyCoupled, kLooselyCoupled };

struct EstimatorConfig {
  PreintModel model = PreintModel::kModel1;
  EstimatorMode mode = EstimatorMode::kTightlyCoupled;
  WindowPolicy window;
  ImuNoiseSpec noise;
  StereoRig rig;
  Vec3 gravity = Vec3(0.0, 0.0, 9.81);
  double pixel_sigma = 1.0;  ///< px, 0 allowed (floored internally)
  RobustKind visual_robust = RobustKind::kCauchy;
  double visual_robust_k = 1.0;
  SolverConfig solver;
  int min_track_frames = 2;
  /// 1σ of the prior anchoring the first state, order [θ, b_ω, v, b_a, p].
  VecX init_prior_sigmas;

  EstimatorConfig();
};

/// Sliding-window visual-inertial estimator: preintegrated IMU factors
/// between the inertial-window states, inverse-depth features (tightly
/// coupled) or relative-pose measurements (loosely coupled), and a marginal
/// prior maintained by Schur-complement marginalization.
class VioEstimator {
 public:
  explicit VioEstimator(EstimatorConfig cfg);

  void initialize(double t0, const ImuState& x0);

  struct FrameResult {
    NodeId node = -1;
    ImuState estimate;
    Eigen::Matrix<double, 15, 15> covariance;
    bool has_covariance = false;
    SolveStatus status = SolveStatus::kConverged;
    double final_cost = 0.0;
  };

  /// `imu` spans the window [t_prev, t]: sample i is held over
  /// [t_i, t_{i+1}], the final sample marks the interval end.
  FrameResult process_frame(double t, std::span<const ImuSample> imu,
                            const FrameFeatures* features,
                            const RelativePoseMeas* relpose);

  const FactorGraph& graph() const { return graph_; }
  NodeId current_node() const { return prev_node_; }
  const ImuState& current_estimate() const {
    return graph_.node(prev_node_).xi;
  }

 private:
  struct PendingObs {
    NodeId node;
    int cam;
    Vec2 uv;
  };
  struct Track {
    std::vector<PendingObs> pending;  // buffered until activation
    NodeId feat_node = -1;
    NodeId anchor_node = -1;
    int frames_seen = 0;
    NodeId last_frame_node = -1;
  };

  void add_frame_observations(NodeId node, const FrameFeatures& feats);
  void try_activate(long feat_id, Track& track);
  void add_visual_factor(NodeId feat_node, NodeId anchor, NodeId obs, int cam,
                         const Vec2& uv);
  double measurement_info() const;

  EstimatorConfig cfg_;
  FactorGraph graph_;
  WindowManager window_;
  NodeId prev_node_ = -1;
  double prev_time_ = 0.0;
  std::map<long, Track> tracks_;
  bool initialized_ = false;
};

}  // namespace swvio
