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

#include <deque>
#include <optional>

#include "swvio/marginalize.hpp"

namespace swvio {

struct WindowPolicy {
  int inertial_size = 6;
  int pose_size = 8;
};

/// Graph edits requested by one window advance. The velocity/bias item
/// demotes the state to a pose clone; the pose item removes the oldest
/// clone entirely (the caller adds the features bound to it).
struct AdvanceResult {
  std::optional<NodeId> marg_velocity_bias;
  std::optional<NodeId> marg_pose;

  MargSpec to_marg_spec(const std::vector<NodeId>& features) const {
    MargSpec spec;
    if (marg_velocity_bias) spec.items.push_back({*marg_velocity_bias, true});
    if (marg_pose) spec.items.push_back({*marg_pose, false});
    for (NodeId f : features) spec.items.push_back({f, false});
    return spec;
  }

  bool empty() const { return !marg_velocity_bias && !marg_pose; }
};

/// Tracks the two sub-windows: recent full IMU states and older pose-only
/// clones.
class WindowManager {
 public:
  explicit WindowManager(WindowPolicy policy = {}) : policy_(policy) {}

  /// Registers a freshly added IMU state node and reports what must be
  /// marginalized to restore the window sizes.
  AdvanceResult push_state(NodeId id);

  const std::deque<NodeId>& inertial_window() const { return inertial_; }
  const std::deque<NodeId>& pose_window() const { return poses_; }
  const WindowPolicy& policy() const { return policy_; }

 private:
  WindowPolicy policy_;
  std::deque<NodeId> inertial_;
  std::deque<NodeId> poses_;
};

}  // namespace swvio
