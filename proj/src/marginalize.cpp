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

#include "swvio/marginalize.hpp"

#include <Eigen/Dense>

#include <set>

namespace swvio {

std::pair<MatX, VecX> schur_marginalize(const MatX& lambda, const VecX& g,
                                        int r_dim, bool* regularized) {
  const int n = static_cast<int>(lambda.rows());
  const int m_dim = n - r_dim;
  if (m_dim <= 0) return {lambda, g};
  const MatX l_rr = lambda.topLeftCorner(r_dim, r_dim);
  const MatX l_rm = lambda.topRightCorner(r_dim, m_dim);
  MatX l_mm = lambda.bottomRightCorner(m_dim, m_dim);
  const VecX g_r = g.head(r_dim);
  const VecX g_m = g.tail(m_dim);

  Eigen::LDLT<MatX> ldlt(l_mm);
  const double dmax = ldlt.vectorD().cwiseAbs().maxCoeff();
  if (ldlt.info() != Eigen::Success || !(dmax > 0.0) ||
      ldlt.vectorD().minCoeff() < 1e-12 * dmax) {
    l_mm += 1e-9 * MatX::Identity(m_dim, m_dim);
    ldlt.compute(l_mm);
    if (regularized) *regularized = true;
  }
  const MatX sol = ldlt.solve(l_rm.transpose());  // Λ_mm⁻¹ Λ_mr
  MatX l_marg = l_rr - l_rm * sol;
  l_marg = 0.5 * (l_marg + l_marg.transpose()).eval();
  const VecX g_marg = g_r - l_rm * ldlt.solve(g_m);
  return {l_marg, g_marg};
}

namespace {

// Per-node split of error coordinates into retained/marginalized index sets.
struct NodeSplit {
  NodeId id;
  std::vector<int> retained_idx;  // node-local error indices kept
  std::vector<int> marg_idx;      // node-local error indices removed
  bool demote = false;            // ImU state -> pose clone afterwards
  bool remove = false;            // node disappears entirely
};

}  // namespace

MarginalPrior marginalize(FactorGraph& g, const MargSpec& spec) {
  std::map<NodeId, MargItem> marg_of;
  for (const auto& item : spec.items) {
    if (!g.has_node(item.id))
      throw std::invalid_argument("marginalize: unknown node id");
    if (item.velocity_bias_only &&
        g.node(item.id).kind != NodeKind::kImuState)
      throw std::invalid_argument(
          "marginalize: velocity/bias split requires an IMU state");
    marg_of[item.id] = item;
  }

  // Absorb every factor that constrains a marginalized coordinate.
  std::vector<const Factor*> absorbed;
  std::set<NodeId> involved;
  for (const auto& f : g.factors()) {
    bool hit = false;
    for (NodeId id : f->nodes()) {
      auto it = marg_of.find(id);
      if (it == marg_of.end()) continue;
      if (!it->second.velocity_bias_only || f->touches_velocity_bias(id)) {
        hit = true;
        break;
      }
    }
    if (!hit) continue;
    absorbed.push_back(f.get());
    for (NodeId id : f->nodes()) involved.insert(id);
  }
  for (const auto& item : spec.items) involved.insert(item.id);

  // Column layout: retained coordinates first, marginalized last.
  std::vector<NodeSplit> splits;
  int r_dim = 0, m_dim = 0;
  for (NodeId id : involved) {
    const Node& n = g.node(id);
    NodeSplit s;
    s.id = id;
    auto it = marg_of.find(id);
    if (it == marg_of.end()) {
      for (int i = 0; i < n.dof(); ++i) s.retained_idx.push_back(i);
    } else if (it->second.velocity_bias_only) {
      // ImU state error order [θ, b_ω, v, b_a, p]: keep θ and p.
      s.retained_idx = {0, 1, 2, 12, 13, 14};
      for (int i = 3; i < 12; ++i) s.marg_idx.push_back(i);
      s.demote = true;
    } else {
      for (int i = 0; i < n.dof(); ++i) s.marg_idx.push_back(i);
      s.remove = true;
    }
    r_dim += static_cast<int>(s.retained_idx.size());
    m_dim += static_cast<int>(s.marg_idx.size());
    splits.push_back(std::move(s));
  }

  // Global column of each (node, local error index).
  std::map<NodeId, std::vector<int>> col_of;
  int rc = 0, mc = r_dim;
  for (const auto& s : splits) {
    std::vector<int> cols(g.node(s.id).dof(), -1);
    for (int i : s.retained_idx) cols[i] = rc++;
    for (int i : s.marg_idx) cols[i] = mc++;
    col_of[s.id] = std::move(cols);
  }

  const int n_all = r_dim + m_dim;
  MatX lambda = MatX::Zero(n_all, n_all);
  VecX grad = VecX::Zero(n_all);
  for (const Factor* f : absorbed) {
    ResidualBlock rb = f->linearize(g);
    if (!rb.valid) continue;
    double w = 1.0;
    if (rb.robust != RobustKind::kNone)
      w = robust_weight(rb.robust, rb.squared_norm(), rb.robust_k).second;
    const MatX we = w * (rb.information * rb.e);
    for (const auto& [id_a, j_a] : rb.jacobians) {
      const auto& cols_a = col_of.at(id_a);
      const MatX jt_info = j_a.transpose() * rb.information;
      const VecX gi = j_a.transpose() * we;
      for (int c = 0; c < j_a.cols(); ++c) grad(cols_a[c]) += gi(c);
      for (const auto& [id_b, j_b] : rb.jacobians) {
        const auto& cols_b = col_of.at(id_b);
        const MatX h = w * (jt_info * j_b);
        for (int ca = 0; ca < h.rows(); ++ca)
          for (int cb = 0; cb < h.cols(); ++cb)
            lambda(cols_a[ca], cols_b[cb]) += h(ca, cb);
      }
    }
  }

  bool regularized = false;
  auto [l_marg, g_marg] = schur_marginalize(lambda, grad, r_dim, &regularized);

  // Square root by eigendecomposition with rank truncation; Λ_marg can be
  // PSD-singular when the absorbed set under-constrains some direction.
  Eigen::SelfAdjointEigenSolver<MatX> eig(l_marg);
  const VecX evals = eig.eigenvalues();
  const double emax = std::max(evals.maxCoeff(), 0.0);
  std::vector<int> keep;
  for (int i = 0; i < evals.size(); ++i)
    if (evals(i) > 1e-10 * emax && evals(i) > 0.0) keep.push_back(i);
  const int rank = static_cast<int>(keep.size());

  MarginalPrior prior;
  prior.regularized = regularized;
  prior.cols = r_dim;
  prior.a_m = MatX::Zero(rank, r_dim);
  prior.b_m = VecX::Zero(rank);
  for (int i = 0; i < rank; ++i) {
    const double sq = std::sqrt(evals(keep[i]));
    prior.a_m.row(i) = sq * eig.eigenvectors().col(keep[i]).transpose();
    prior.b_m(i) =
        eig.eigenvectors().col(keep[i]).dot(g_marg) / sq;
  }

  // Retained layout must follow the same rc ordering used above.
  int off = 0;
  for (const auto& s : splits) {
    if (s.remove) continue;
    const Node& n = g.node(s.id);
    prior.retained.push_back(s.id);
    prior.col_offset.push_back(off);
    if (s.demote) {
      prior.lin_point.push_back(Node::make(pose_of(n.xi)));
      off += Pose::kDof;
    } else {
      prior.lin_point.push_back(n);
      off += n.dof();
    }
  }

  // Graph edits: drop absorbed factors, remove/demote states, insert prior.
  g.remove_factors(absorbed);
  for (const auto& s : splits) {
    if (s.remove) g.remove_node(s.id);
    else if (s.demote) g.demote_to_pose(s.id);
  }
  if (rank > 0 && !prior.retained.empty())
    g.add_factor(std::make_shared<MarginalPriorFactor>(prior));
  return prior;
}

}  // namespace swvio
