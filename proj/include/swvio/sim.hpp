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

#include <cstdint>
#include <random>
#include <string>

#include "swvio/factors.hpp"
#include "swvio/trajectory.hpp"

namespace swvio {

/// Deterministic sub-seed derivation: every random stream is addressed by
/// (master seed, stream id, counter) through splitmix64.
uint64_t derive_seed(uint64_t master, uint64_t stream, uint64_t counter);

struct ImuData {
  std::vector<ImuSample> samples;
  std::vector<Vec3> bg_true;  ///< gyro bias at each sample time
  std::vector<Vec3> ba_true;
  double dt = 0.0;
};

/// Synthesizes IMU readings along the trajectory: exact kinematic truth plus
/// discrete white noise σ/√Δt·N(0,1) and a bias random walk σ_w·√Δt·N(0,1).
ImuData synthesize_imu(const AnalyticTrajectory& traj, double rate_hz,
                       const ImuNoiseSpec& noise, const Vec3& bg0,
                       const Vec3& ba0, uint64_t seed);

struct StereoRig {
  ExtrinsicCalib left;
  ExtrinsicCalib right;
  double focal_px = 450.0;
  int width = 752, height = 480;

  /// VI-Sensor-like rig: cameras fronted along body x, 0.11 m baseline.
  static StereoRig standard();
};

struct FeatureObs {
  long feature_id;
  int cam;  ///< 0 = left, 1 = right
  Vec2 uv;  ///< normalized image coordinates
};

struct FrameFeatures {
  double t = 0.0;
  std::vector<FeatureObs> obs;
};

struct FeatureData {
  std::vector<FrameFeatures> frames;
  std::vector<Vec3> world_points;  ///< truth, indexed by feature id
};

/// Maintains `count` visible features in a shell around the trajectory,
/// re-spawning any that leave both fields of view. Pixel noise is mapped
/// through the focal length onto the normalized coordinates.
FeatureData synthesize_features(const AnalyticTrajectory& traj, int count,
                                double cam_rate_hz, double pixel_sigma,
                                const StereoRig& rig, uint64_t seed);

struct RelativePoseSeq {
  std::vector<double> t_from, t_to;
  std::vector<RelativePoseMeas> meas;
};

/// True relative poses between consecutive keyframe times, perturbed through
/// boxplus with N(0, Σ).
RelativePoseSeq synthesize_relative_poses(
    const AnalyticTrajectory& traj, const std::vector<double>& keyframe_times,
    const Eigen::Matrix<double, 6, 6>& cov, uint64_t seed);

/// Ground-truth export, one row per sample:
/// t,qx,qy,qz,qw,px,py,pz,vx,vy,vz,bwx,bwy,bwz,bax,bay,baz
std::string trajectory_csv(const AnalyticTrajectory& traj,
                           const ImuData& imu);

}  // namespace swvio
