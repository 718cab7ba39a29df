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

#include "swvio/metrics.hpp"

#include <stdexcept>

namespace swvio {

RunMetrics compute_metrics(const std::vector<TimedPose>& estimate,
                           const std::vector<TimedPose>& truth,
                           const std::vector<double>& segment_lengths_m,
                           const std::vector<double>& nees) {
  if (estimate.empty() || estimate.size() != truth.size())
    throw std::invalid_argument("compute_metrics: empty or mismatched series");

  RunMetrics m;
  double pos_sq = 0.0, ori_sq = 0.0;
  for (size_t i = 0; i < estimate.size(); ++i) {
    m.t.push_back(estimate[i].t);
    const double pe = (estimate[i].pose.p - truth[i].pose.p).norm();
    const Vec3 dth =
        UnitQuaternion::boxminus(estimate[i].pose.q, truth[i].pose.q);
    const double oe = dth.norm() * 180.0 / M_PI;
    m.pos_err_m.push_back(pe);
    m.ori_err_deg.push_back(oe);
    pos_sq += pe * pe;
    ori_sq += oe * oe;
  }
  m.pos_rmse_m = std::sqrt(pos_sq / estimate.size());
  m.ori_rmse_deg = std::sqrt(ori_sq / estimate.size());

  // Cumulative path length over the ground truth.
  std::vector<double> path(truth.size(), 0.0);
  for (size_t i = 1; i < truth.size(); ++i)
    path[i] = path[i - 1] + (truth[i].pose.p - truth[i - 1].pose.p).norm();

  for (double seg : segment_lengths_m) {
    double sum = 0.0;
    int count = 0;
    for (size_t i = 0; i < truth.size(); ++i) {
      size_t j = i;
      while (j < truth.size() && path[j] - path[i] < seg) ++j;
      if (j >= truth.size()) break;
      // Align the estimated segment start onto the true start pose, then
      // measure the end-position error.
      const Mat3 r_align =
          truth[i].pose.rot().transpose() * estimate[i].pose.rot();
      const Vec3 end_aligned =
          truth[i].pose.p +
          r_align * (estimate[j].pose.p - estimate[i].pose.p);
      sum += (end_aligned - truth[j].pose.p).norm();
      ++count;
    }
    if (count > 0) m.odo_err_m[seg] = sum / count;
  }

  if (!nees.empty()) {
    m.nees = nees;
    double s = 0.0;
    for (double v : nees) s += v;
    m.nees_mean = s / nees.size();
  }
  return m;
}

}  // namespace swvio
