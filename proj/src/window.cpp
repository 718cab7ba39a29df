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

#include "swvio/window.hpp"

namespace swvio {

AdvanceResult WindowManager::push_state(NodeId id) {
  AdvanceResult res;
  inertial_.push_back(id);
  if (static_cast<int>(inertial_.size()) > policy_.inertial_size) {
    const NodeId oldest = inertial_.front();
    inertial_.pop_front();
    res.marg_velocity_bias = oldest;
    poses_.push_back(oldest);
  }
  if (static_cast<int>(poses_.size()) > policy_.pose_size) {
    res.marg_pose = poses_.front();
    poses_.pop_front();
  }
  return res;
}

}  // namespace swvio
