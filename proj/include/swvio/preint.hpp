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

#include <functional>
#include <optional>
#include <vector>

#include "swvio/state.hpp"

namespace swvio {

struct ImuSample {
  Vec3 omega = Vec3::Zero();  ///< rad/s, gyro reading
  Vec3 accel = Vec3::Zero();  ///< m/s², accelerometer reading
  double t = 0.0;             ///< s
};

/// Continuous-time noise densities. Zero is allowed (deterministic IMU);
/// negative values are rejected.
struct ImuNoiseSpec {
  double sigma_g = 0.0;   ///< gyro white noise, rad/s/√Hz
  double sigma_a = 0.0;   ///< accel white noise, m/s²/√Hz
  double sigma_wg = 0.0;  ///< gyro bias random walk, rad/s²/√Hz
  double sigma_wa = 0.0;  ///< accel bias random walk, m/s³/√Hz

  Eigen::Matrix<double, 12, 12> continuous_cov() const;
};

/// Bias (and, for Model 2, initial-orientation) linearization points, fixed
/// for the lifetime of one preintegration interval.
struct BiasLinearization {
  Vec3 bg = Vec3::Zero();
  Vec3 ba = Vec3::Zero();
  std::optional<UnitQuaternion> q_star;  ///< q*(k←G), Model 2 only
};

enum class PreintModel { kModel1, kModel2, kDiscrete };

const char* to_string(PreintModel m);

/// Running preintegration state over one interval [t_k, t_{k+1}].
///
/// `q` is the relative orientation q(τ←k). `alpha`/`beta` hold (α, β) for
/// Model 1 / discrete and (Δp, Δv) for Model 2. `cov` is 15×15 for
/// Model 1 / discrete and an 18×18 working matrix for Model 2 whose trailing
/// block carries the cloned orientation error. Error ordering matches the
/// residual: [δθ, δb_ω, δβ(δv), δb_a, δα(δp) (, δθ_clone)].
struct PreintState {
  PreintModel model = PreintModel::kModel1;
  BiasLinearization lin;
  ImuNoiseSpec noise;

  UnitQuaternion q;
  Vec3 alpha = Vec3::Zero();
  Vec3 beta = Vec3::Zero();
  MatX cov;

  Mat3 j_q = Mat3::Zero();      ///< ∂(relative orientation)/∂b_ω
  Mat3 j_alpha = Mat3::Zero();  ///< ∂α/∂b_ω
  Mat3 j_beta = Mat3::Zero();   ///< ∂β/∂b_ω
  Mat3 h_alpha = Mat3::Zero();  ///< ∂α/∂b_a
  Mat3 h_beta = Mat3::Zero();   ///< ∂β/∂b_a
  Mat3 o_alpha = Mat3::Zero();  ///< ∂Δp/∂δθ*, Model 2 only
  Mat3 o_beta = Mat3::Zero();   ///< ∂Δv/∂δθ*, Model 2 only

  double dt_total = 0.0;
  int steps = 0;
};

/// Finalized relative measurement consumed by the IMU factors.
struct PreintegratedFactor {
  PreintModel model = PreintModel::kModel1;
  BiasLinearization lin;

  UnitQuaternion q;  ///< q(k+1←k)
  Vec3 alpha = Vec3::Zero();
  Vec3 beta = Vec3::Zero();
  Eigen::Matrix<double, 15, 15> cov;

  Mat3 j_q, j_alpha, j_beta, h_alpha, h_beta;
  Mat3 o_alpha = Mat3::Zero(), o_beta = Mat3::Zero();

  double dt_total = 0.0;
  bool regularized = false;  ///< covariance was near-singular and bumped

  /// Λ = cov⁻¹ (after the regularization policy applied at finalize).
  Eigen::Matrix<double, 15, 15> information() const;
};

PreintState preint_begin(PreintModel model, const BiasLinearization& lin,
                         const ImuNoiseSpec& noise);

void model1_step(PreintState& s, const ImuSample& z, double dt);
void model2_step(PreintState& s, const ImuSample& z, double dt,
                 const Vec3& gravity);
void discrete_step(PreintState& s, const ImuSample& z, double dt);

/// Dispatch on s.model; Model 2 uses `gravity`.
void preint_step(PreintState& s, const ImuSample& z, double dt,
                 const Vec3& gravity);

PreintegratedFactor preint_finalize(const PreintState& s);

/// Integrates Φ̇ = F(t) Φ, Φ(0) = I over [0, dt] with fixed-step RK4.
MatX state_transition(const std::function<MatX(double)>& f_of_t, double dt,
                      int substeps = 4);

/// Reconstructs the next global state from the factor mean with zero noise
/// (the propagation the residual is consistent with).
ImuState predict_state(const ImuState& xk, const PreintegratedFactor& f,
                       const Vec3& gravity);

namespace detail {

// Closed-form integral brackets: A_τ = R(k←τ+1)·alpha_bracket(ω̂, dt),
// B_τ = R(k←τ+1)·beta_bracket(ω̂, dt).
Mat3 alpha_bracket(const Vec3& w, double dt);
Mat3 beta_bracket(const Vec3& w, double dt);

// ∂(alpha_bracket(ω)·a)/∂ω and ∂(beta_bracket(ω)·a)/∂ω.
Mat3 d_alpha_bracket_dw(const Vec3& w, const Vec3& a, double dt);
Mat3 d_beta_bracket_dw(const Vec3& w, const Vec3& a, double dt);

}  // namespace detail

}  // namespace swvio
