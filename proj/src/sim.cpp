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

#include "swvio/sim.hpp"

#include <cstdio>

namespace swvio {

uint64_t derive_seed(uint64_t master, uint64_t stream, uint64_t counter) {
  // splitmix64 over the combined address
  uint64_t z = master + 0x9e3779b97f4a7c15ULL * (stream + 1) +
               0xbf58476d1ce4e5b9ULL * (counter + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

ImuData synthesize_imu(const AnalyticTrajectory& traj, double rate_hz,
                       const ImuNoiseSpec& noise, const Vec3& bg0,
                       const Vec3& ba0, uint64_t seed) {
  if (rate_hz <= 0.0) throw std::invalid_argument("synthesize_imu: rate");
  ImuData out;
  const double dt = 1.0 / rate_hz;
  out.dt = dt;
  const int n = static_cast<int>(std::floor(traj.config().duration * rate_hz)) + 1;
  out.samples.reserve(n);
  out.bg_true.reserve(n);
  out.ba_true.reserve(n);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto draw3 = [&]() { return Vec3(gauss(rng), gauss(rng), gauss(rng)); };

  const double sg = noise.sigma_g / std::sqrt(dt);
  const double sa = noise.sigma_a / std::sqrt(dt);
  const double swg = noise.sigma_wg * std::sqrt(dt);
  const double swa = noise.sigma_wa * std::sqrt(dt);

  Vec3 bg = bg0, ba = ba0;
  for (int k = 0; k < n; ++k) {
    const double t = k * dt;
    const TrajectorySample s = traj.eval(std::min(t, traj.config().duration));
    ImuSample z;
    z.t = t;
    z.omega = s.omega_body + bg + sg * draw3();
    z.accel = s.accel_meas + ba + sa * draw3();
    out.samples.push_back(z);
    out.bg_true.push_back(bg);
    out.ba_true.push_back(ba);
    bg += swg * draw3();
    ba += swa * draw3();
  }
  return out;
}

StereoRig StereoRig::standard() {
  StereoRig rig;
  // Camera looks along body x: camera z forward, x right (body -y),
  // y down (body -z).
  Mat3 r_c_i;
  r_c_i << 0, -1, 0, 0, 0, -1, 1, 0, 0;
  rig.left.r_c_i = r_c_i;
  rig.left.p_i_in_c = Vec3::Zero();
  rig.right.r_c_i = r_c_i;
  // Baseline 0.11 m along camera x: the IMU sits at -baseline on the right
  // camera's x axis relative to the left.
  rig.right.p_i_in_c = Vec3(-0.11, 0.0, 0.0);
  return rig;
}

namespace {

bool project(const StereoRig& rig, const ExtrinsicCalib& cam, const Pose& pose,
             const Vec3& pt_world, Vec2* uv) {
  const Vec3 in_cam =
      cam.r_c_i * pose.rot() * (pt_world - pose.p) + cam.p_i_in_c;
  if (in_cam.z() < 0.2) return false;
  const Vec2 n(in_cam.x() / in_cam.z(), in_cam.y() / in_cam.z());
  const double cx = 0.5 * rig.width / rig.focal_px;
  const double cy = 0.5 * rig.height / rig.focal_px;
  if (std::abs(n.x()) > cx || std::abs(n.y()) > cy) return false;
  *uv = n;
  return true;
}

}  // namespace

FeatureData synthesize_features(const AnalyticTrajectory& traj, int count,
                                double cam_rate_hz, double pixel_sigma,
                                const StereoRig& rig, uint64_t seed) {
  FeatureData out;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> uni(0.0, 1.0);

  const Vec3 centroid = traj.config().center;
  auto spawn_near = [&](const Pose& pose) {
    // Uniform shell between 2 and 15 m, biased into the camera frustum by
    // rejection; falls back to any shell point.
    for (int attempt = 0; attempt < 64; ++attempt) {
      const double r = 2.0 + (15.0 - 2.0) * uni(rng);
      Vec3 dir(gauss(rng), gauss(rng), gauss(rng));
      dir.normalize();
      const Vec3 pt = centroid + r * dir;
      Vec2 uv;
      if (project(rig, rig.left, pose, pt, &uv)) return pt;
    }
    Vec3 dir(gauss(rng), gauss(rng), gauss(rng));
    dir.normalize();
    return Vec3(centroid + 8.0 * dir);
  };

  const double noise_n = pixel_sigma / rig.focal_px;
  const int n_frames =
      static_cast<int>(std::floor(traj.config().duration * cam_rate_hz)) + 1;

  std::vector<long> active_ids(count, -1);
  std::vector<Vec3> pts(count);
  long next_id = 0;

  for (int f = 0; f < n_frames; ++f) {
    const double t = f / cam_rate_hz;
    const TrajectorySample s = traj.eval(std::min(t, traj.config().duration));
    const Pose pose{s.q, s.p};
    FrameFeatures frame;
    frame.t = t;
    for (int i = 0; i < count; ++i) {
      Vec2 uv_l, uv_r;
      bool vis_l = active_ids[i] >= 0 &&
                   project(rig, rig.left, pose, pts[i], &uv_l);
      bool vis_r = active_ids[i] >= 0 &&
                   project(rig, rig.right, pose, pts[i], &uv_r);
      if (!vis_l && !vis_r) {
        pts[i] = spawn_near(pose);
        active_ids[i] = next_id++;
        out.world_points.push_back(pts[i]);
        vis_l = project(rig, rig.left, pose, pts[i], &uv_l);
        vis_r = project(rig, rig.right, pose, pts[i], &uv_r);
      }
      if (vis_l)
        frame.obs.push_back(
            {active_ids[i], 0,
             uv_l + noise_n * Vec2(gauss(rng), gauss(rng))});
      if (vis_r)
        frame.obs.push_back(
            {active_ids[i], 1,
             uv_r + noise_n * Vec2(gauss(rng), gauss(rng))});
    }
    out.frames.push_back(std::move(frame));
  }
  return out;
}

RelativePoseSeq synthesize_relative_poses(
    const AnalyticTrajectory& traj, const std::vector<double>& keyframe_times,
    const Eigen::Matrix<double, 6, 6>& cov, uint64_t seed) {
  RelativePoseSeq out;
  if (keyframe_times.size() < 2) return out;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  Eigen::LLT<Eigen::Matrix<double, 6, 6>> llt(cov);
  Eigen::Matrix<double, 6, 6> sqrt_cov = Eigen::Matrix<double, 6, 6>::Zero();
  if (cov.norm() > 0.0) {
    if (llt.info() != Eigen::Success)
      throw std::invalid_argument("synthesize_relative_poses: bad covariance");
    sqrt_cov = llt.matrixL();
  }

  for (size_t i = 0; i + 1 < keyframe_times.size(); ++i) {
    const TrajectorySample a = traj.eval(keyframe_times[i]);
    const TrajectorySample b = traj.eval(keyframe_times[i + 1]);
    RelativePoseMeas m;
    m.q = b.q * a.q.inverse();                // q(j←k)
    m.p = a.q.rotation() * (b.p - a.p);       // position of j in frame k
    m.cov = cov;
    Eigen::Matrix<double, 6, 1> n;
    for (int d = 0; d < 6; ++d) n(d) = gauss(rng);
    const Eigen::Matrix<double, 6, 1> delta = sqrt_cov * n;
    m.q = m.q.boxplus(delta.head<3>());
    m.p += delta.tail<3>();
    out.t_from.push_back(keyframe_times[i]);
    out.t_to.push_back(keyframe_times[i + 1]);
    out.meas.push_back(std::move(m));
  }
  return out;
}

std::string trajectory_csv(const AnalyticTrajectory& traj,
                           const ImuData& imu) {
  std::string csv =
      "t,qx,qy,qz,qw,px,py,pz,vx,vy,vz,bwx,bwy,bwz,bax,bay,baz\n";
  char line[512];
  for (size_t k = 0; k < imu.samples.size(); ++k) {
    const double t = imu.samples[k].t;
    const TrajectorySample s = traj.eval(std::min(t, traj.config().duration));
    const Vec4& q = s.q.coeffs();
    std::snprintf(line, sizeof(line),
                  "%.9f,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,"
                  "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  t, q(0), q(1), q(2), q(3), s.p.x(), s.p.y(), s.p.z(),
                  s.v.x(), s.v.y(), s.v.z(), imu.bg_true[k].x(),
                  imu.bg_true[k].y(), imu.bg_true[k].z(), imu.ba_true[k].x(),
                  imu.ba_true[k].y(), imu.ba_true[k].z());
    csv += line;
  }
  return csv;
}

}  // namespace swvio
