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

#include "swvio/preint.hpp"

#include <Eigen/Dense>

namespace swvio {

Eigen::Matrix<double, 12, 12> ImuNoiseSpec::continuous_cov() const {
  Eigen::Matrix<double, 12, 12> qc = Eigen::Matrix<double, 12, 12>::Zero();
  qc.block<3, 3>(0, 0) = sigma_g * sigma_g * Mat3::Identity();
  qc.block<3, 3>(3, 3) = sigma_wg * sigma_wg * Mat3::Identity();
  qc.block<3, 3>(6, 6) = sigma_a * sigma_a * Mat3::Identity();
  qc.block<3, 3>(9, 9) = sigma_wa * sigma_wa * Mat3::Identity();
  return qc;
}

const char* to_string(PreintModel m) {
  switch (m) {
    case PreintModel::kModel1: return "m1";
    case PreintModel::kModel2: return "m2";
    case PreintModel::kDiscrete: return "discrete";
  }
  return "?";
}

namespace detail {

// Series branches kick in below kSmallAngle on ‖ω‖·dt. Two correction terms
// keep the branch switch continuous well below 1e-12.

Mat3 alpha_bracket(const Vec3& w, double dt) {
  const double n = w.norm();
  const double th = n * dt;
  const Mat3 wx = skew(w);
  double c1, c2;
  if (th < kSmallAngle) {
    const double dt3 = dt * dt * dt;
    c1 = -dt3 / 3.0 + n * n * dt3 * dt * dt / 30.0;
    c2 = dt3 * dt / 8.0 - n * n * dt3 * dt3 / 144.0;
  } else {
    c1 = (th * std::cos(th) - std::sin(th)) / (n * n * n);
    c2 = (th * th - 2.0 * std::cos(th) - 2.0 * th * std::sin(th) + 2.0) /
         (2.0 * n * n * n * n);
  }
  return (0.5 * dt * dt) * Mat3::Identity() + c1 * wx + c2 * (wx * wx);
}

Mat3 beta_bracket(const Vec3& w, double dt) {
  const double n = w.norm();
  const double th = n * dt;
  const Mat3 wx = skew(w);
  double c1, c2;
  if (th < kSmallAngle) {
    c1 = dt * dt / 2.0 - n * n * dt * dt * dt * dt / 24.0;
    c2 = dt * dt * dt / 6.0 - n * n * dt * dt * dt * dt * dt / 120.0;
  } else {
    c1 = (1.0 - std::cos(th)) / (n * n);
    c2 = (th - std::sin(th)) / (n * n * n);
  }
  return dt * Mat3::Identity() - c1 * wx + c2 * (wx * wx);
}

namespace {

// d(coefficient)/d‖ω‖ divided by ‖ω‖, with series branches; gradients of the
// scalar coefficients are (f'(n)/n)·ω.
struct BracketGrads {
  double a1, a2, b1, b2;        // coefficient values
  double da1n, da2n, db1n, db2n;  // f'(n)/n for each
};

BracketGrads bracket_grads(double n, double dt) {
  BracketGrads g;
  const double th = n * dt;
  if (th < kSmallAngle) {
    const double dt2 = dt * dt, dt3 = dt2 * dt, dt4 = dt3 * dt, dt5 = dt4 * dt;
    const double n2 = n * n;
    g.a1 = -dt3 / 3.0 + n2 * dt5 / 30.0;
    g.a2 = dt4 / 8.0 - n2 * dt4 * dt2 / 144.0;
    g.b1 = dt2 / 2.0 - n2 * dt4 / 24.0;
    g.b2 = dt3 / 6.0 - n2 * dt5 / 120.0;
    g.da1n = dt5 / 15.0 - n2 * dt5 * dt2 / 210.0;
    g.da2n = -dt4 * dt2 / 72.0 + n2 * dt4 * dt4 / 1440.0;
    g.db1n = -dt4 / 12.0 + n2 * dt4 * dt2 / 180.0;
    g.db2n = -dt5 / 60.0 + n2 * dt5 * dt2 / 1260.0;
    return g;
  }
  const double s = std::sin(th), c = std::cos(th);
  const double n2 = n * n, n3 = n2 * n, n4 = n3 * n;
  g.a1 = (th * c - s) / n3;
  const double u = th * th - 2.0 * c - 2.0 * th * s + 2.0;
  g.a2 = u / (2.0 * n4);
  g.b1 = (1.0 - c) / n2;
  g.b2 = (th - s) / n3;
  g.da1n = (-dt * dt * s / n2 - 3.0 * g.a1 / n) / n;
  g.da2n = (dt * dt * (1.0 - c) / n3 - 4.0 * g.a2 / n) / n;
  g.db1n = (dt * s / n2 - 2.0 * (1.0 - c) / n3) / n;
  g.db2n = (dt * (1.0 - c) / n3 - 3.0 * (th - s) / n4) / n;
  return g;
}

Mat3 d_wxwx_a_dw(const Vec3& w, const Vec3& a) {
  // ∂(⌊ω⌋²a)/∂ω with ⌊ω⌋²a = ω(ωᵀa) − a(ωᵀω)
  return w.dot(a) * Mat3::Identity() + w * a.transpose() -
         2.0 * a * w.transpose();
}

}  // namespace

Mat3 d_alpha_bracket_dw(const Vec3& w, const Vec3& a, double dt) {
  const double n = w.norm();
  const BracketGrads g = bracket_grads(n, dt);
  const Mat3 wx = skew(w);
  return (wx * a) * (g.da1n * w).transpose() - g.a1 * skew(a) +
         (wx * wx * a) * (g.da2n * w).transpose() + g.a2 * d_wxwx_a_dw(w, a);
}

Mat3 d_beta_bracket_dw(const Vec3& w, const Vec3& a, double dt) {
  const double n = w.norm();
  const BracketGrads g = bracket_grads(n, dt);
  const Mat3 wx = skew(w);
  return -((wx * a) * (g.db1n * w).transpose() - g.b1 * skew(a)) +
         (wx * wx * a) * (g.db2n * w).transpose() + g.b2 * d_wxwx_a_dw(w, a);
}

}  // namespace detail

namespace {

void check_step_args(const PreintState& s, PreintModel expect, double dt) {
  if (dt <= 0.0) throw std::invalid_argument("preint step: dt must be > 0");
  if (s.model != expect)
    throw std::invalid_argument("preint step: model mismatch");
}

// Measurement error system F for Model 1 / discrete, 15×15,
// state [δθ, δb_ω, δβ, δb_a, δα], rotation r_k_u = R(k←u).
Eigen::Matrix<double, 15, 15> error_f_m1(const Vec3& w, const Vec3& a,
                                         const Mat3& r_k_u) {
  Eigen::Matrix<double, 15, 15> f = Eigen::Matrix<double, 15, 15>::Zero();
  f.block<3, 3>(0, 0) = -skew(w);
  f.block<3, 3>(0, 3) = -Mat3::Identity();
  f.block<3, 3>(6, 0) = -r_k_u * skew(a);
  f.block<3, 3>(6, 9) = -r_k_u;
  f.block<3, 3>(12, 6) = Mat3::Identity();
  return f;
}

Eigen::Matrix<double, 15, 12> noise_g_m1(const Mat3& r_k_u) {
  Eigen::Matrix<double, 15, 12> g = Eigen::Matrix<double, 15, 12>::Zero();
  g.block<3, 3>(0, 0) = -Mat3::Identity();
  g.block<3, 3>(3, 3) = Mat3::Identity();
  g.block<3, 3>(6, 6) = -r_k_u;
  g.block<3, 3>(9, 9) = Mat3::Identity();
  return g;
}

// Model 2 error system, 18×18, trailing block is the cloned orientation
// error; g_tau is the gravity estimate in the τ frame.
Eigen::Matrix<double, 18, 18> error_f_m2(const Vec3& w, const Vec3& a,
                                         const Mat3& r_k_u,
                                         const Vec3& g_tau) {
  Eigen::Matrix<double, 18, 18> f = Eigen::Matrix<double, 18, 18>::Zero();
  f.block<3, 3>(0, 0) = -skew(w);
  f.block<3, 3>(0, 3) = -Mat3::Identity();
  f.block<3, 3>(6, 0) = -r_k_u * skew(a);
  f.block<3, 3>(6, 9) = -r_k_u;
  f.block<3, 3>(6, 15) = -r_k_u * skew(g_tau);
  f.block<3, 3>(12, 6) = Mat3::Identity();
  return f;
}

Eigen::Matrix<double, 18, 12> noise_g_m2(const Mat3& r_k_u) {
  Eigen::Matrix<double, 18, 12> g = Eigen::Matrix<double, 18, 12>::Zero();
  g.topRows<15>() = noise_g_m1(r_k_u);
  return g;
}

// Midpoint quadrature of Eq. Q_τ = ∫ Φ G Qc Gᵀ Φᵀ: evaluate G at the interval
// midpoint and transport with Φ(t_{τ+1}, t_mid).
template <int N>
Eigen::Matrix<double, N, N> process_noise(
    const std::function<MatX(double)>& f_of_t,
    const Eigen::Matrix<double, N, 12>& g_mid,
    const Eigen::Matrix<double, 12, 12>& qc, double dt) {
  const MatX phi_half = state_transition(
      [&](double t) { return f_of_t(0.5 * dt + t); }, 0.5 * dt);
  Eigen::Matrix<double, N, N> q =
      phi_half * g_mid * qc * g_mid.transpose() * phi_half.transpose() * dt;
  return q;
}

void symmetrize(MatX& p) { p = 0.5 * (p + p.transpose()).eval(); }

}  // namespace

PreintState preint_begin(PreintModel model, const BiasLinearization& lin,
                         const ImuNoiseSpec& noise) {
  if (noise.sigma_g < 0.0 || noise.sigma_a < 0.0 || noise.sigma_wg < 0.0 ||
      noise.sigma_wa < 0.0)
    throw std::invalid_argument("preint_begin: negative noise density");
  if (model == PreintModel::kModel2 && !lin.q_star)
    throw std::invalid_argument("preint_begin: Model 2 requires q_star");
  PreintState s;
  s.model = model;
  s.lin = lin;
  s.noise = noise;
  const int dim = (model == PreintModel::kModel2) ? 18 : 15;
  s.cov = MatX::Zero(dim, dim);
  return s;
}

void model1_step(PreintState& s, const ImuSample& z, double dt) {
  check_step_args(s, PreintModel::kModel1, dt);
  const Vec3 w = z.omega - s.lin.bg;
  const Vec3 a = z.accel - s.lin.ba;

  const Mat3 r_k_tau = s.q.rotation().transpose();        // R(k←τ)
  const UnitQuaternion q_next = UnitQuaternion::step(w, dt) * s.q;
  const Mat3 r_k_next = q_next.rotation().transpose();    // R(k←τ+1)

  const Mat3 a_br = detail::alpha_bracket(w, dt);
  const Mat3 b_br = detail::beta_bracket(w, dt);
  const Mat3 a_tau = r_k_next * a_br;
  const Mat3 b_tau = r_k_next * b_br;

  // Covariance: P ← Φ P Φᵀ + Q_τ with the θ-row blocks in closed form and
  // the coupled rows integrated by RK4 on Φ̇ = FΦ.
  const Eigen::Matrix<double, 12, 12> qc = s.noise.continuous_cov();
  auto f_of_t = [&](double t) -> MatX {
    const Mat3 r = r_k_tau * exp_so3(w * t);
    return error_f_m1(w, a, r);
  };
  MatX phi = state_transition(f_of_t, dt);
  phi.block<3, 3>(0, 0) = exp_so3(-w * dt);
  phi.block<3, 3>(0, 3) = -right_jacobian(w * dt) * dt;
  const Mat3 r_k_mid = r_k_tau * exp_so3(w * (0.5 * dt));
  const auto q_tau =
      process_noise<15>(f_of_t, noise_g_m1(r_k_mid), qc, dt);
  s.cov = phi * s.cov * phi.transpose() + q_tau;
  symmetrize(s.cov);

  // Bias Jacobians. The rotation sensitivity of R(k←τ+1) is carried by the
  // updated J_q, the in-bracket ω̂ dependence by the analytic derivatives.
  const Mat3 j_q_next = exp_so3(-w * dt) * s.j_q + right_jacobian(w * dt) * dt;
  const Mat3 d_a = r_k_next * (skew(a_br * a) * j_q_next -
                               detail::d_alpha_bracket_dw(w, a, dt));
  const Mat3 d_b = r_k_next * (skew(b_br * a) * j_q_next -
                               detail::d_beta_bracket_dw(w, a, dt));
  s.j_alpha += s.j_beta * dt + d_a;
  s.j_beta += d_b;
  s.h_alpha += s.h_beta * dt - a_tau;
  s.h_beta += -b_tau;
  s.j_q = j_q_next;

  s.alpha += s.beta * dt + a_tau * a;
  s.beta += b_tau * a;
  s.q = q_next;

  s.dt_total += dt;
  s.steps += 1;
}

void model2_step(PreintState& s, const ImuSample& z, double dt,
                 const Vec3& gravity) {
  check_step_args(s, PreintModel::kModel2, dt);
  if (!s.lin.q_star)
    throw std::invalid_argument("model2_step: missing q_star");
  const Vec3 w = z.omega - s.lin.bg;

  const Mat3 r_tau_k = s.q.rotation();                   // R(τ←k)
  const Vec3 g_k = s.lin.q_star->rotation() * gravity;   // gravity in {k}*
  const Vec3 g_tau = r_tau_k * g_k;                      // estimate in {τ}
  const Vec3 a = z.accel - s.lin.ba - g_tau;             // local true accel

  const UnitQuaternion q_next = UnitQuaternion::step(w, dt) * s.q;
  const Mat3 r_k_next = q_next.rotation().transpose();
  const Mat3 r_k_tau = r_tau_k.transpose();

  const Mat3 a_br = detail::alpha_bracket(w, dt);
  const Mat3 b_br = detail::beta_bracket(w, dt);
  const Mat3 a_tau = r_k_next * a_br;
  const Mat3 b_tau = r_k_next * b_br;

  const Eigen::Matrix<double, 12, 12> qc = s.noise.continuous_cov();
  auto f_of_t = [&](double t) -> MatX {
    const Mat3 r = r_k_tau * exp_so3(w * t);
    return error_f_m2(w, a, r, g_tau);
  };
  MatX phi = state_transition(f_of_t, dt);
  phi.block<3, 3>(0, 0) = exp_so3(-w * dt);
  phi.block<3, 3>(0, 3) = -right_jacobian(w * dt) * dt;
  const Mat3 r_k_mid = r_k_tau * exp_so3(w * (0.5 * dt));
  const auto q_tau =
      process_noise<18>(f_of_t, noise_g_m2(r_k_mid), qc, dt);
  MatX p = phi * s.cov * phi.transpose() + q_tau;
  // Clone swap Γ: the next interval's static orientation error is the
  // current local orientation error at t_{τ+1}.
  MatX gp = MatX::Zero(18, 18);
  gp.topLeftCorner<15, 15>() = p.topLeftCorner<15, 15>();
  gp.block<15, 3>(0, 15) = p.block<15, 3>(0, 0);
  gp.block<3, 15>(15, 0) = p.block<3, 15>(0, 0);
  gp.block<3, 3>(15, 15) = p.block<3, 3>(0, 0);
  s.cov = gp;
  symmetrize(s.cov);

  const Mat3 j_q_next = exp_so3(-w * dt) * s.j_q + right_jacobian(w * dt) * dt;
  const Mat3 d_a = r_k_next * (skew(a_br * a) * j_q_next -
                               detail::d_alpha_bracket_dw(w, a, dt));
  const Mat3 d_b = r_k_next * (skew(b_br * a) * j_q_next -
                               detail::d_beta_bracket_dw(w, a, dt));
  // Gravity rides along with the τ-frame orientation, whose bias sensitivity
  // at the interval start is J_q(τ).
  s.j_alpha += s.j_beta * dt + d_a + a_tau * skew(g_tau) * s.j_q;
  s.j_beta += d_b + b_tau * skew(g_tau) * s.j_q;
  s.h_alpha += s.h_beta * dt - a_tau;
  s.h_beta += -b_tau;
  s.o_alpha += s.o_beta * dt - a_tau * r_tau_k * skew(g_k);
  s.o_beta += -b_tau * r_tau_k * skew(g_k);
  s.j_q = j_q_next;

  s.alpha += s.beta * dt + a_tau * a;  // Δp
  s.beta += b_tau * a;                 // Δv
  s.q = q_next;

  s.dt_total += dt;
  s.steps += 1;
}

void discrete_step(PreintState& s, const ImuSample& z, double dt) {
  check_step_args(s, PreintModel::kDiscrete, dt);
  const Vec3 w = z.omega - s.lin.bg;
  const Vec3 a = z.accel - s.lin.ba;

  const Mat3 r_k_tau = s.q.rotation().transpose();  // R(k←τ)
  const UnitQuaternion q_next = UnitQuaternion::step(w, dt) * s.q;

  // Piecewise constant global acceleration: the start-of-interval rotation
  // is held through the step.
  const Mat3 a_tau = 0.5 * dt * dt * r_k_tau;
  const Mat3 b_tau = dt * r_k_tau;

  const Eigen::Matrix<double, 12, 12> qc = s.noise.continuous_cov();
  const MatX f = error_f_m1(w, a, r_k_tau);
  const auto g = noise_g_m1(r_k_tau);
  MatX phi = MatX::Identity(15, 15) + f * dt;
  s.cov = phi * s.cov * phi.transpose() + g * qc * g.transpose() * dt;
  symmetrize(s.cov);

  const Mat3 rot_sens = r_k_tau * skew(a) * s.j_q;  // ∂(R(k←τ)â)/∂b_ω
  s.j_alpha += s.j_beta * dt + 0.5 * dt * dt * rot_sens;
  s.j_beta += dt * rot_sens;
  s.h_alpha += s.h_beta * dt - a_tau;
  s.h_beta += -b_tau;
  s.j_q = exp_so3(-w * dt) * s.j_q + right_jacobian(w * dt) * dt;

  s.alpha += s.beta * dt + a_tau * a;
  s.beta += b_tau * a;
  s.q = q_next;

  s.dt_total += dt;
  s.steps += 1;
}

void preint_step(PreintState& s, const ImuSample& z, double dt,
                 const Vec3& gravity) {
  switch (s.model) {
    case PreintModel::kModel1: model1_step(s, z, dt); break;
    case PreintModel::kModel2: model2_step(s, z, dt, gravity); break;
    case PreintModel::kDiscrete: discrete_step(s, z, dt); break;
  }
}

PreintegratedFactor preint_finalize(const PreintState& s) {
  if (s.steps == 0)
    throw std::invalid_argument("preint_finalize: empty interval");
  PreintegratedFactor f;
  f.model = s.model;
  f.lin = s.lin;
  f.q = s.q;
  f.alpha = s.alpha;
  f.beta = s.beta;
  f.cov = s.cov.topLeftCorner<15, 15>();
  f.cov = 0.5 * (f.cov + f.cov.transpose()).eval();
  f.j_q = s.j_q;
  f.j_alpha = s.j_alpha;
  f.j_beta = s.j_beta;
  f.h_alpha = s.h_alpha;
  f.h_beta = s.h_beta;
  f.o_alpha = s.o_alpha;
  f.o_beta = s.o_beta;
  f.dt_total = s.dt_total;

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 15, 15>> eig(f.cov);
  const double emax = eig.eigenvalues().maxCoeff();
  const double emin = eig.eigenvalues().minCoeff();
  if (!(emax > 0.0) || emin <= 0.0 || emax / emin > 1e14) {
    f.cov += 1e-12 * Eigen::Matrix<double, 15, 15>::Identity();
    f.regularized = true;
  }
  return f;
}

Eigen::Matrix<double, 15, 15> PreintegratedFactor::information() const {
  return cov.ldlt().solve(Eigen::Matrix<double, 15, 15>::Identity());
}

MatX state_transition(const std::function<MatX(double)>& f_of_t, double dt,
                      int substeps) {
  const int n = f_of_t(0.0).rows();
  MatX phi = MatX::Identity(n, n);
  const double h = dt / substeps;
  for (int i = 0; i < substeps; ++i) {
    const double t0 = i * h;
    const MatX f1 = f_of_t(t0);
    const MatX f2 = f_of_t(t0 + 0.5 * h);
    const MatX f4 = f_of_t(t0 + h);
    const MatX k1 = f1 * phi;
    const MatX k2 = f2 * (phi + 0.5 * h * k1);
    const MatX k3 = f2 * (phi + 0.5 * h * k2);
    const MatX k4 = f4 * (phi + h * k3);
    phi += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return phi;
}

ImuState predict_state(const ImuState& xk, const PreintegratedFactor& f,
                       const Vec3& gravity) {
  const Mat3 r_g_k = xk.rot().transpose();  // R(G←k)
  const double dt = f.dt_total;
  ImuState out;
  out.q = f.q * xk.q;
  out.bg = xk.bg;
  out.ba = xk.ba;
  if (f.model == PreintModel::kModel2) {
    out.v = xk.v + r_g_k * f.beta;
    out.p = xk.p + xk.v * dt + r_g_k * f.alpha;
  } else {
    out.v = xk.v - gravity * dt + r_g_k * f.beta;
    out.p = xk.p + xk.v * dt - 0.5 * gravity * dt * dt + r_g_k * f.alpha;
  }
  return out;
}

}  // namespace swvio
