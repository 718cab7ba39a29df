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

#include "swvio/solver.hpp"

#include <Eigen/Dense>

namespace swvio {

namespace {

struct Layout {
  std::map<NodeId, int> col;       // state (non-feature) columns
  std::vector<NodeId> state_ids;   // in column order
  std::map<NodeId, int> feat_col;  // feature columns (within feature block)
  std::vector<NodeId> feat_ids;
  int n_state = 0;
  int n_feat = 0;

  bool is_feature(NodeId id) const { return feat_col.count(id) != 0; }
};

Layout make_layout(const FactorGraph& g) {
  Layout l;
  for (const auto& [id, node] : g.nodes()) {
    if (node.kind == NodeKind::kFeature) {
      l.feat_col[id] = l.n_feat;
      l.feat_ids.push_back(id);
      l.n_feat += node.dof();
    } else {
      l.col[id] = l.n_state;
      l.state_ids.push_back(id);
      l.n_state += node.dof();
    }
  }
  return l;
}

struct LinearizedSystem {
  double cost = 0.0;
  MatX h_ss;
  MatX h_sf;  // n_state × n_feat
  MatX h_ff;  // block diagonal, stored dense
  VecX g_s, g_f;
};

double evaluate_cost(const FactorGraph& g) {
  double cost = 0.0;
  for (const auto& f : g.factors()) {
    const ResidualBlock rb = f->linearize(g);
    if (!rb.valid || rb.e.size() == 0) continue;
    const double v = rb.squared_norm();
    if (rb.robust == RobustKind::kNone) {
      cost += 0.5 * v;
    } else {
      cost += 0.5 * robust_weight(rb.robust, v, rb.robust_k).first;
    }
  }
  return cost;
}

LinearizedSystem build_system(const FactorGraph& g, const Layout& l) {
  LinearizedSystem sys;
  sys.h_ss = MatX::Zero(l.n_state, l.n_state);
  sys.h_sf = MatX::Zero(l.n_state, l.n_feat);
  sys.h_ff = MatX::Zero(l.n_feat, l.n_feat);
  sys.g_s = VecX::Zero(l.n_state);
  sys.g_f = VecX::Zero(l.n_feat);

  for (const auto& f : g.factors()) {
    const ResidualBlock rb = f->linearize(g);
    if (!rb.valid || rb.e.size() == 0) continue;
    const double v = rb.squared_norm();
    double w = 1.0;
    if (rb.robust == RobustKind::kNone) {
      sys.cost += 0.5 * v;
    } else {
      const auto [c, wgt] = robust_weight(rb.robust, v, rb.robust_k);
      sys.cost += 0.5 * c;
      w = wgt;
    }

    const VecX we = w * (rb.information * rb.e);
    for (const auto& [id_a, j_a] : rb.jacobians) {
      const bool fa = l.is_feature(id_a);
      const int ca = fa ? l.feat_col.at(id_a) : l.col.at(id_a);
      const VecX gi = j_a.transpose() * we;
      if (fa) sys.g_f.segment(ca, j_a.cols()) += gi;
      else sys.g_s.segment(ca, j_a.cols()) += gi;

      const MatX jt_info_w = w * (j_a.transpose() * rb.information);
      for (const auto& [id_b, j_b] : rb.jacobians) {
        const bool fb = l.is_feature(id_b);
        const int cb = fb ? l.feat_col.at(id_b) : l.col.at(id_b);
        const MatX h = jt_info_w * j_b;
        if (!fa && !fb) sys.h_ss.block(ca, cb, h.rows(), h.cols()) += h;
        else if (!fa && fb) sys.h_sf.block(ca, cb, h.rows(), h.cols()) += h;
        else if (fa && !fb)
          sys.h_sf.block(cb, ca, h.cols(), h.rows()) += h.transpose();
        else sys.h_ff.block(ca, cb, h.rows(), h.cols()) += h;
      }
    }
  }
  sys.h_ss = (0.5 * (sys.h_ss + sys.h_ss.transpose())).eval();
  return sys;
}

// Schur-reduced normal equations over the states; features are eliminated
// first and recovered by back-substitution.
void reduce(const LinearizedSystem& sys, const Layout& l, double lambda,
            MatX& h_red, VecX& g_red, std::vector<Mat3>& h_ff_inv) {
  h_red = sys.h_ss;
  g_red = sys.g_s;
  if (lambda > 0.0) h_red.diagonal() += lambda * sys.h_ss.diagonal();
  h_ff_inv.assign(l.feat_ids.size(), Mat3::Zero());
  for (size_t i = 0; i < l.feat_ids.size(); ++i) {
    const int c = l.feat_col.at(l.feat_ids[i]);
    Mat3 hff = sys.h_ff.block<3, 3>(c, c);
    if (lambda > 0.0) hff.diagonal() += lambda * hff.diagonal();
    h_ff_inv[i] = hff.inverse();
    const MatX hsf = sys.h_sf.middleCols<3>(c);
    h_red.noalias() -= hsf * h_ff_inv[i] * hsf.transpose();
    g_red.noalias() -= hsf * (h_ff_inv[i] * sys.g_f.segment<3>(c));
  }
}

std::vector<NodeId> find_unconstrained(const FactorGraph& g, const Layout& l,
                                       const MatX& h_red, double rank_tol) {
  std::vector<NodeId> bad;
  Eigen::SelfAdjointEigenSolver<MatX> eig(h_red);
  const double emax = std::max(eig.eigenvalues().maxCoeff(), 0.0);
  for (int i = 0; i < eig.eigenvalues().size(); ++i) {
    if (eig.eigenvalues()(i) >= rank_tol * emax && eig.eigenvalues()(i) > 0.0)
      continue;
    const VecX v = eig.eigenvectors().col(i).cwiseAbs();
    const double vmax = v.maxCoeff();
    for (NodeId id : l.state_ids) {
      const int c0 = l.col.at(id);
      const int d = g.node(id).dof();
      if (v.segment(c0, d).maxCoeff() > 0.1 * vmax &&
          std::find(bad.begin(), bad.end(), id) == bad.end())
        bad.push_back(id);
    }
  }
  return bad;
}

}  // namespace

MatX SolveResult::covariance_of(NodeId id) const {
  auto it = state_col.find(id);
  if (it == state_col.end())
    throw std::invalid_argument("covariance_of: not a state node");
  int dof = static_cast<int>(state_information.rows()) - it->second;
  for (const auto& [nid, c] : state_col)
    if (c > it->second) dof = std::min(dof, c - it->second);
  MatX rhs = MatX::Zero(state_information.rows(), dof);
  rhs.middleRows(it->second, dof).setIdentity();
  const MatX sol = state_information.ldlt().solve(rhs);
  return sol.middleRows(it->second, dof);
}

SolveResult solve(FactorGraph& g, const SolverConfig& cfg) {
  const Layout l = make_layout(g);
  SolveResult res;
  res.status = SolveStatus::kMaxIterations;

  double lambda = cfg.use_lm ? cfg.lm_lambda0 : 0.0;
  double cost = evaluate_cost(g);
  res.initial_cost = cost;

  for (int iter = 0; iter < cfg.max_iterations; ++iter) {
    const LinearizedSystem sys = build_system(g, l);

    if (iter == 0) {
      MatX h0;
      VecX g0;
      std::vector<Mat3> ffinv;
      reduce(sys, l, 0.0, h0, g0, ffinv);
      Eigen::LDLT<MatX> probe(h0);
      const VecX d = probe.vectorD();
      const double dmax = d.cwiseAbs().maxCoeff();
      if (probe.info() != Eigen::Success || !(dmax > 0.0) ||
          d.minCoeff() < cfg.rank_tol * dmax) {
        res.unconstrained_nodes = find_unconstrained(g, l, h0, cfg.rank_tol);
        res.status = SolveStatus::kRankDeficient;
        res.final_cost = cost;
        return res;
      }
    }

    bool stop = false;
    while (true) {
      MatX h_red;
      VecX g_red;
      std::vector<Mat3> h_ff_inv;
      reduce(sys, l, lambda, h_red, g_red, h_ff_inv);

      const VecX dx_s = h_red.ldlt().solve(-g_red);
      VecX dx_f(l.n_feat);
      for (size_t i = 0; i < l.feat_ids.size(); ++i) {
        const int c = l.feat_col.at(l.feat_ids[i]);
        dx_f.segment<3>(c) =
            -h_ff_inv[i] * (sys.g_f.segment<3>(c) +
                            sys.h_sf.middleCols<3>(c).transpose() * dx_s);
      }

      const std::map<NodeId, Node> backup = g.nodes();
      for (const auto& [id, c] : l.col)
        g.node(id).boxplus(dx_s.segment(c, g.node(id).dof()));
      for (const auto& [id, c] : l.feat_col)
        g.node(id).boxplus(dx_f.segment(c, g.node(id).dof()));

      const double new_cost = evaluate_cost(g);
      const double dx_norm =
          std::sqrt(dx_s.squaredNorm() + dx_f.squaredNorm());
      IterationStat stat{new_cost, lambda, dx_norm, false};

      if (!cfg.use_lm || new_cost <= cost) {
        stat.accepted = true;
        res.history.push_back(stat);
        const double decrease = cost - new_cost;
        cost = new_cost;
        res.iterations = iter + 1;
        if (cfg.use_lm) lambda = std::max(lambda * cfg.lm_down, 1e-12);
        if (decrease <= cfg.cost_decrease_tol * std::max(cost, 1.0) ||
            dx_norm <= cfg.dx_tol) {
          res.status = SolveStatus::kConverged;
          stop = true;
        }
        break;
      }

      // Rejected step: restore state and retry with stiffer damping.
      res.history.push_back(stat);
      for (const auto& [id, node] : backup) g.node(id) = node;
      lambda *= cfg.lm_up;
      if (lambda > cfg.lm_max) {
        res.status = SolveStatus::kLambdaLimit;
        stop = true;
        break;
      }
    }
    if (stop) break;
  }
  res.final_cost = cost;

  // Undamped feature-marginal information at the final estimate.
  const LinearizedSystem sys = build_system(g, l);
  MatX h_red;
  VecX g_red;
  std::vector<Mat3> h_ff_inv;
  reduce(sys, l, 0.0, h_red, g_red, h_ff_inv);
  res.state_information = h_red;
  res.state_col = l.col;
  return res;
}

}  // namespace swvio
