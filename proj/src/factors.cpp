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

#include "swvio/factors.hpp"

#include <Eigen/Dense>

namespace swvio {

std::pair<double, double> robust_weight(RobustKind kind, double v, double k) {
  if (v < 0.0) throw std::invalid_argument("robust_weight: v must be >= 0");
  if (k <= 0.0) throw std::invalid_argument("robust_weight: k must be > 0");
  switch (kind) {
    case RobustKind::kNone:
      return {v, 1.0};
    case RobustKind::kHuber: {
      const double k2 = k * k;
      if (v < k2) return {v, 1.0};
      const double sv = std::sqrt(v);
      return {2.0 * k * sv - k2, k / sv};
    }
    case RobustKind::kCauchy: {
      const double k2 = k * k;
      return {k2 * std::log1p(v / k2), 1.0 / (1.0 + v / k2)};
    }
  }
  return {v, 1.0};
}

namespace {

// ∂2vec([δθ/2;1] ⊗ q)/∂δθ at δθ = 0
Mat3 dvec_left_perturb(const UnitQuaternion& q) {
  return q.w() * Mat3::Identity() + skew(q.vec());
}

// ∂2vec(qn ⊗ [-δθ/2;1] ⊗ qm⁻¹)/∂δθ at δθ = 0, for the canonicalized
// (short-arc) residual. Canonicalization makes the stored signs of qn and
// qm independent of the product's, so the raw scalar of qn ⊗ qm⁻¹ decides
// the consistent overall sign.
Mat3 dvec_mid_perturb(const UnitQuaternion& qn, const UnitQuaternion& qm) {
  const double s =
      (qn.w() * qm.w() + qn.vec().dot(qm.vec())) >= 0.0 ? 1.0 : -1.0;
  return -s * ((qn.w() * Mat3::Identity() - skew(qn.vec())) *
                   (qm.w() * Mat3::Identity() - skew(qm.vec())) +
               qn.vec() * qm.vec().transpose());
}

struct ImuResidualCommon {
  Vec3 e_theta;
  Mat3 de_dtheta_k, de_dtheta_k1, de_dbg;
};

// Orientation residual row shared by both preintegration models:
// e_θ = 2 vec(q_{k+1} ⊗ q_k⁻¹ ⊗ q̆⁻¹ ⊗ q_b), q_b from θ = J_q (b̂_ω - b*_ω).
ImuResidualCommon orientation_residual(const ImuState& x_k,
                                       const ImuState& x_k1,
                                       const PreintegratedFactor& f) {
  ImuResidualCommon out;
  const Vec3 dbg = x_k.bg - f.lin.bg;
  const UnitQuaternion q_b = UnitQuaternion::from_theta(f.j_q * dbg);
  const UnitQuaternion q_n = x_k1.q * x_k.q.inverse();
  const UnitQuaternion q_r = q_n * f.q.inverse();
  const UnitQuaternion q_rb = q_r * q_b;
  out.e_theta = 2.0 * q_rb.vec();
  out.de_dtheta_k1 = dvec_left_perturb(q_rb);
  out.de_dtheta_k = dvec_mid_perturb(q_n, q_b.inverse() * f.q);
  const double s =
      (q_r.w() * q_b.w() - q_r.vec().dot(q_b.vec())) >= 0.0 ? 1.0 : -1.0;
  out.de_dbg =
      s * (q_r.w() * Mat3::Identity() - skew(q_r.vec())) * f.j_q;
  return out;
}

}  // namespace

ResidualBlock imu_factor_model1(NodeId id_k, const ImuState& x_k,
                                NodeId id_k1, const ImuState& x_k1,
                                const PreintegratedFactor& f,
                                const Vec3& gravity) {
  if (f.model == PreintModel::kModel2)
    throw std::invalid_argument("imu_factor_model1: factor is Model 2");
  const double dt = f.dt_total;
  const Mat3 r_k = x_k.rot();
  const Vec3 dbg = x_k.bg - f.lin.bg;
  const Vec3 dba = x_k.ba - f.lin.ba;

  const Vec3 dv_term = x_k1.v - x_k.v + gravity * dt;
  const Vec3 dp_term =
      x_k1.p - x_k.p - x_k.v * dt + 0.5 * gravity * dt * dt;

  const ImuResidualCommon c = orientation_residual(x_k, x_k1, f);

  ResidualBlock rb;
  rb.e = VecX(15);
  rb.e.segment<3>(0) = c.e_theta;
  rb.e.segment<3>(3) = x_k1.bg - x_k.bg;
  rb.e.segment<3>(6) =
      r_k * dv_term - f.j_beta * dbg - f.h_beta * dba - f.beta;
  rb.e.segment<3>(9) = x_k1.ba - x_k.ba;
  rb.e.segment<3>(12) =
      r_k * dp_term - f.j_alpha * dbg - f.h_alpha * dba - f.alpha;

  MatX j_k = MatX::Zero(15, 15);
  j_k.block<3, 3>(0, 0) = c.de_dtheta_k;
  j_k.block<3, 3>(0, 3) = c.de_dbg;
  j_k.block<3, 3>(3, 3) = -Mat3::Identity();
  j_k.block<3, 3>(6, 0) = skew(r_k * dv_term);
  j_k.block<3, 3>(6, 3) = -f.j_beta;
  j_k.block<3, 3>(6, 6) = -r_k;
  j_k.block<3, 3>(6, 9) = -f.h_beta;
  j_k.block<3, 3>(9, 9) = -Mat3::Identity();
  j_k.block<3, 3>(12, 0) = skew(r_k * dp_term);
  j_k.block<3, 3>(12, 3) = -f.j_alpha;
  j_k.block<3, 3>(12, 6) = -r_k * dt;
  j_k.block<3, 3>(12, 9) = -f.h_alpha;
  j_k.block<3, 3>(12, 12) = -r_k;

  MatX j_k1 = MatX::Zero(15, 15);
  j_k1.block<3, 3>(0, 0) = c.de_dtheta_k1;
  j_k1.block<3, 3>(3, 3) = Mat3::Identity();
  j_k1.block<3, 3>(6, 6) = r_k;
  j_k1.block<3, 3>(9, 9) = Mat3::Identity();
  j_k1.block<3, 3>(12, 12) = r_k;

  rb.jacobians.emplace_back(id_k, std::move(j_k));
  rb.jacobians.emplace_back(id_k1, std::move(j_k1));
  rb.information = f.information();
  return rb;
}

ResidualBlock imu_factor_model2(NodeId id_k, const ImuState& x_k,
                                NodeId id_k1, const ImuState& x_k1,
                                const PreintegratedFactor& f) {
  if (f.model != PreintModel::kModel2)
    throw std::invalid_argument("imu_factor_model2: model mismatch");
  const double dt = f.dt_total;
  const Mat3 r_k = x_k.rot();
  const Vec3 dbg = x_k.bg - f.lin.bg;
  const Vec3 dba = x_k.ba - f.lin.ba;

  // Orientation-linearization correction 2vec(q̂_k ⊗ q*⁻¹).
  const UnitQuaternion q_tilde = x_k.q * f.lin.q_star->inverse();
  const Vec3 dtheta_star = 2.0 * q_tilde.vec();
  const Mat3 dcorr =
      q_tilde.w() * Mat3::Identity() + skew(q_tilde.vec());

  const Vec3 dv_term = x_k1.v - x_k.v;
  const Vec3 dp_term = x_k1.p - x_k.p - x_k.v * dt;

  const ImuResidualCommon c = orientation_residual(x_k, x_k1, f);

  ResidualBlock rb;
  rb.e = VecX(15);
  rb.e.segment<3>(0) = c.e_theta;
  rb.e.segment<3>(3) = x_k1.bg - x_k.bg;
  rb.e.segment<3>(6) = r_k * dv_term - f.j_beta * dbg - f.h_beta * dba -
                       f.o_beta * dtheta_star - f.beta;
  rb.e.segment<3>(9) = x_k1.ba - x_k.ba;
  rb.e.segment<3>(12) = r_k * dp_term - f.j_alpha * dbg - f.h_alpha * dba -
                        f.o_alpha * dtheta_star - f.alpha;

  MatX j_k = MatX::Zero(15, 15);
  j_k.block<3, 3>(0, 0) = c.de_dtheta_k;
  j_k.block<3, 3>(0, 3) = c.de_dbg;
  j_k.block<3, 3>(3, 3) = -Mat3::Identity();
  j_k.block<3, 3>(6, 0) = skew(r_k * dv_term) - f.o_beta * dcorr;
  j_k.block<3, 3>(6, 3) = -f.j_beta;
  j_k.block<3, 3>(6, 6) = -r_k;
  j_k.block<3, 3>(6, 9) = -f.h_beta;
  j_k.block<3, 3>(9, 9) = -Mat3::Identity();
  j_k.block<3, 3>(12, 0) = skew(r_k * dp_term) - f.o_alpha * dcorr;
  j_k.block<3, 3>(12, 3) = -f.j_alpha;
  j_k.block<3, 3>(12, 6) = -r_k * dt;
  j_k.block<3, 3>(12, 9) = -f.h_alpha;
  j_k.block<3, 3>(12, 12) = -r_k;

  MatX j_k1 = MatX::Zero(15, 15);
  j_k1.block<3, 3>(0, 0) = c.de_dtheta_k1;
  j_k1.block<3, 3>(3, 3) = Mat3::Identity();
  j_k1.block<3, 3>(6, 6) = r_k;
  j_k1.block<3, 3>(9, 9) = Mat3::Identity();
  j_k1.block<3, 3>(12, 12) = r_k;

  rb.jacobians.emplace_back(id_k, std::move(j_k));
  rb.jacobians.emplace_back(id_k1, std::move(j_k1));
  rb.information = f.information();
  return rb;
}

ResidualBlock inverse_depth_factor(InvDepthCase c, NodeId id_feat,
                                   const FeatureInvDepth& feat, NodeId id_a,
                                   const Pose& pose_a, NodeId id_k,
                                   const Pose& pose_k,
                                   const ExtrinsicCalib& calib_i,
                                   const ExtrinsicCalib& calib_j,
                                   const Vec2& z,
                                   const Eigen::Matrix2d& info) {
  const Vec3 m(feat.alpha, feat.beta, 1.0);
  ResidualBlock rb;
  rb.information = info;

  Vec3 h;
  Mat3 r_anchor_chain;  // R(C_{k,j} ← C_{a,i}) for the cross case
  Mat3 r_ck;            // R(C_j ← G) at time k
  switch (c) {
    case InvDepthCase::kAnchor:
      h = m;
      break;
    case InvDepthCase::kAnchorOtherCam: {
      const Mat3 r_j_i = calib_j.r_c_i * calib_i.r_c_i.transpose();
      const Vec3 p_ci_in_cj = calib_j.p_i_in_c - r_j_i * calib_i.p_i_in_c;
      h = r_j_i * m + feat.rho * p_ci_in_cj;
      break;
    }
    case InvDepthCase::kCross: {
      const Mat3 r_k = pose_k.rot();
      const Mat3 r_a = pose_a.rot();
      r_ck = calib_j.r_c_i * r_k;
      r_anchor_chain = r_ck * r_a.transpose() * calib_i.r_c_i.transpose();
      h = r_anchor_chain * (m - feat.rho * calib_i.p_i_in_c) +
          feat.rho * r_ck * (pose_a.p - pose_k.p) +
          feat.rho * calib_j.p_i_in_c;
      break;
    }
  }

  if (h(2) <= 1e-8) {
    rb.valid = false;
    return rb;
  }

  rb.e = VecX(2);
  rb.e << h(0) / h(2) - z(0), h(1) / h(2) - z(1);

  Eigen::Matrix<double, 2, 3> h_proj;
  h_proj << 1.0 / h(2), 0.0, -h(0) / (h(2) * h(2)), 0.0, 1.0 / h(2),
      -h(1) / (h(2) * h(2));

  MatX j_f = MatX::Zero(2, 3);
  switch (c) {
    case InvDepthCase::kAnchor:
      j_f.col(0) = h_proj.col(0);
      j_f.col(1) = h_proj.col(1);
      break;
    case InvDepthCase::kAnchorOtherCam: {
      const Mat3 r_j_i = calib_j.r_c_i * calib_i.r_c_i.transpose();
      const Vec3 p_ci_in_cj = calib_j.p_i_in_c - r_j_i * calib_i.p_i_in_c;
      const Eigen::Matrix<double, 2, 3> hr = h_proj * r_j_i;
      j_f.col(0) = hr.col(0);
      j_f.col(1) = hr.col(1);
      j_f.col(2) = h_proj * p_ci_in_cj;
      break;
    }
    case InvDepthCase::kCross: {
      const Eigen::Matrix<double, 2, 3> hr = h_proj * r_anchor_chain;
      j_f.col(0) = hr.col(0);
      j_f.col(1) = hr.col(1);
      j_f.col(2) = h_proj * (-r_anchor_chain * calib_i.p_i_in_c +
                             r_ck * (pose_a.p - pose_k.p) +
                             calib_j.p_i_in_c);
      break;
    }
  }
  rb.jacobians.emplace_back(id_feat, std::move(j_f));

  if (c == InvDepthCase::kCross) {
    const Mat3 r_k = pose_k.rot();
    const Mat3 r_a = pose_a.rot();
    const Vec3 x_anchor = calib_i.r_c_i.transpose() *
                          (m - feat.rho * calib_i.p_i_in_c);
    MatX j_a = MatX::Zero(2, 6);
    j_a.leftCols<3>() =
        -h_proj * r_ck * r_a.transpose() * skew(x_anchor);
    j_a.rightCols<3>() = h_proj * feat.rho * r_ck;

    MatX j_k = MatX::Zero(2, 6);
    j_k.leftCols<3>() =
        h_proj * calib_j.r_c_i *
        skew(r_k * r_a.transpose() * x_anchor +
             feat.rho * r_k * (pose_a.p - pose_k.p));
    j_k.rightCols<3>() = -h_proj * feat.rho * r_ck;

    rb.jacobians.emplace_back(id_a, std::move(j_a));
    rb.jacobians.emplace_back(id_k, std::move(j_k));
  }
  return rb;
}

ResidualBlock relative_pose_factor(NodeId id_k, const Pose& pose_k,
                                   NodeId id_j, const Pose& pose_j,
                                   const RelativePoseMeas& m) {
  Eigen::LLT<Eigen::Matrix<double, 6, 6>> llt(m.cov);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument(
        "relative_pose_factor: covariance not positive definite");

  const Mat3 r_k = pose_k.rot();
  const UnitQuaternion q_hat = pose_j.q * pose_k.q.inverse();  // q̂(j←k)
  const UnitQuaternion q_r = q_hat * m.q.inverse();
  const Vec3 dp = r_k * (pose_j.p - pose_k.p);

  ResidualBlock rb;
  rb.e = VecX(6);
  rb.e.segment<3>(0) = 2.0 * q_r.vec();
  rb.e.segment<3>(3) = dp - m.p;

  MatX j_j = MatX::Zero(6, 6);
  j_j.block<3, 3>(0, 0) = dvec_left_perturb(q_r);
  j_j.block<3, 3>(3, 3) = r_k;

  MatX j_k = MatX::Zero(6, 6);
  j_k.block<3, 3>(0, 0) = dvec_mid_perturb(q_hat, m.q);
  j_k.block<3, 3>(3, 0) = skew(dp);
  j_k.block<3, 3>(3, 3) = -r_k;

  rb.jacobians.emplace_back(id_k, std::move(j_k));
  rb.jacobians.emplace_back(id_j, std::move(j_j));
  rb.information =
      llt.solve(Eigen::Matrix<double, 6, 6>::Identity());
  return rb;
}

Mat3 boxminus_jacobian_quat(const UnitQuaternion& q_hat,
                            const UnitQuaternion& q_bar) {
  const UnitQuaternion q_tilde = q_hat * q_bar.inverse();
  return q_tilde.w() * Mat3::Identity() + skew(q_tilde.vec());
}

}  // namespace swvio
