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

struct SolverConfig {
  int max_iterations = 10;
  double cost_decrease_tol = 1e-10;  ///< relative cost decrease
  double dx_tol = 1e-10;
  bool use_lm = true;
  double lm_lambda0 = 1e-4;
  double lm_up = 10.0;
  double lm_down = 0.1;
  double lm_max = 1e10;
  double rank_tol = 1e-12;
};

enum class SolveStatus {
  kConverged,
  kMaxIterations,
  kLambdaLimit,   ///< cost would not decrease; best-so-far kept
  kRankDeficient  ///< normal equations singular; see unconstrained_nodes
};

struct IterationStat {
  double cost = 0.0;
  double lambda = 0.0;
  double dx_norm = 0.0;
  bool accepted = false;
};

struct SolveResult {
  SolveStatus status = SolveStatus::kConverged;
  double initial_cost = 0.0;
  double final_cost = 0.0;
  int iterations = 0;
  std::vector<IterationStat> history;
  std::vector<NodeId> unconstrained_nodes;

  /// Feature-marginal information of the non-feature states at the final
  /// estimate, with `state_col` giving each state's column offset.
  MatX state_information;
  std::map<NodeId, int> state_col;

  /// Marginal covariance block of one non-feature node (Σ = Λ⁻¹ block).
  MatX covariance_of(NodeId id) const;
};

/// Iterates linearize → normal equations (features eliminated by Schur
/// complement) → boxplus until convergence.
SolveResult solve(FactorGraph& g, const SolverConfig& cfg);

}  // namespace swvio
