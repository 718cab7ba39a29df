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

#include "swvio/graph.hpp"

namespace swvio {

/// One marginalization target: a whole node, or only the velocity/bias
/// sub-block of an IMU state (whose pose is then demoted to a pose clone).
struct MargItem {
  NodeId id = -1;
  bool velocity_bias_only = false;
};

struct MargSpec {
  std::vector<MargItem> items;
};

/// Λ_marg = Λ_rr − Λ_rm Λ_mm⁻¹ Λ_mr, g_marg = g_r − Λ_rm Λ_mm⁻¹ g_m,
/// with the retained block leading (first r_dim rows/cols). A singular
/// Λ_mm is regularized by 1e-9·I; `regularized` reports that.
std::pair<MatX, VecX> schur_marginalize(const MatX& lambda, const VecX& g,
                                        int r_dim,
                                        bool* regularized = nullptr);

/// Removes the marginalized states and every incident absorbed factor from
/// the graph, inserting the square-root marginal prior in their place.
/// Velocity/bias-only items leave a demoted pose clone behind (same id).
MarginalPrior marginalize(FactorGraph& g, const MargSpec& spec);

}  // namespace swvio
