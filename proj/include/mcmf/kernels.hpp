/*
 *
 * Copyright 2026 The mcmf-lab Authors.
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
 *
 */

// Dense building blocks of the MCMF controller: the two-layer forward pass,
// the quadratic KPI/control cost, its exact partials, and the sign-based
// surrogates used where the auction environment has no analytic model.
//
// Everything here is a free function templated on the scalar type so that
// the same code runs on double (production), long double (oracles) or any
// Eigen-compatible scalar.

#ifndef MCMF_KERNELS_HPP
#define MCMF_KERNELS_HPP

#include <Eigen/Dense>

#include <cmath>
#include <type_traits>

namespace mcmf {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

/// Overflow-free logistic function.
template <typename Scalar>
Scalar logistic(Scalar a) {
  using std::exp;
  if (a >= Scalar(0)) return Scalar(1) / (Scalar(1) + exp(-a));
  const Scalar e = exp(a);
  return e / (Scalar(1) + e);
}

/// e^{-a} / (1 + e^{-a})^2, i.e. the slope of the logistic at a.
template <typename Scalar>
Scalar logistic_slope(Scalar a) {
  const Scalar s = logistic(a);
  return s * (Scalar(1) - s);
}

/// sign() with sign(0) = 0.
template <typename Scalar>
int sign_of(Scalar v) {
  return (Scalar(0) < v) - (v < Scalar(0));
}

template <typename Scalar>
struct ForwardResult {
  Vector<Scalar> h;
  Scalar u;
};

/// h = W_e x, u = u_max * logistic(W_d h).
template <typename DerivedWe, typename DerivedWd, typename DerivedX>
ForwardResult<typename DerivedWe::Scalar> forward_pass(
    const Eigen::MatrixBase<DerivedWe>& encoder,
    const Eigen::MatrixBase<DerivedWd>& decision,
    const Eigen::MatrixBase<DerivedX>& x,
    typename DerivedWe::Scalar u_max) {
  using Scalar = typename DerivedWe::Scalar;
  ForwardResult<Scalar> out;
  out.h = encoder * x;
  out.u = u_max * logistic<Scalar>(decision.dot(out.h));
  return out;
}

template <typename Scalar>
struct LayerGrads {
  Vector<Scalar> du_dh;      // hidden_dim
  RowVector<Scalar> du_dwd;  // 1 x hidden_dim, shaped like W_d
};

/// Exact gradients of u = u_max * logistic(W_d h) with respect to h and W_d.
template <typename DerivedWd, typename DerivedH>
LayerGrads<typename DerivedH::Scalar> sigmoid_layer_grads(
    const Eigen::MatrixBase<DerivedWd>& decision,
    const Eigen::MatrixBase<DerivedH>& h, typename DerivedH::Scalar u_max) {
  using Scalar = typename DerivedH::Scalar;
  const Scalar slope =
      u_max * logistic_slope<Scalar>(decision.dot(h));
  return {slope * decision.transpose(), slope * h.transpose()};
}

/// dJ1/dx = 2 q (x - z)
template <typename Scalar>
Scalar partial_j1(Scalar q, Scalar x, Scalar z) {
  return Scalar(2) * q * (x - z);
}

/// dJ2/du = 2 r (u_t - u_{t-1}); u_{t-1} is a constant of the latest period.
template <typename Scalar>
Scalar partial_j2(Scalar r, Scalar u_curr, Scalar u_prev) {
  return Scalar(2) * r * (u_curr - u_prev);
}

/// Sign surrogate for the environment response dx/du.
template <typename Scalar>
int approx_dxdu(Scalar x_curr, Scalar x_prev, Scalar u_curr, Scalar u_prev) {
  return sign_of((x_curr - x_prev) * (u_curr - u_prev));
}

/// sum_k sign((h_k - h_k') (u - u'))
template <typename DerivedA, typename DerivedB>
int hebbian_sign_sum(const Eigen::MatrixBase<DerivedA>& h_curr,
                     const Eigen::MatrixBase<DerivedB>& h_prev,
                     typename DerivedA::Scalar u_curr,
                     typename DerivedA::Scalar u_prev) {
  const auto du = u_curr - u_prev;
  int total = 0;
  for (Eigen::Index k = 0; k < h_curr.size(); ++k) {
    total += sign_of((h_curr(k) - h_prev(k)) * du);
  }
  return total;
}

/// Hebbian surrogate for dh/dW_e: the input vector scaled by the summed
/// co-movement signs of hidden units and output.
template <typename DerivedX, typename DerivedA, typename DerivedB>
Vector<typename DerivedX::Scalar> approx_dhdwe(
    const Eigen::MatrixBase<DerivedX>& x,
    const Eigen::MatrixBase<DerivedA>& h_curr,
    const Eigen::MatrixBase<DerivedB>& h_prev,
    typename DerivedX::Scalar u_curr, typename DerivedX::Scalar u_prev) {
  using Scalar = typename DerivedX::Scalar;
  return x * static_cast<Scalar>(
                 hebbian_sign_sum(h_curr, h_prev, u_curr, u_prev));
}

/// E^T Q E + dU^T R dU with Q = diag(q), R = diag(r).
template <typename DerivedE, typename DerivedQ, typename DerivedU,
          typename DerivedR>
typename DerivedE::Scalar cost_value(const Eigen::MatrixBase<DerivedE>& errors,
                                     const Eigen::MatrixBase<DerivedQ>& q,
                                     const Eigen::MatrixBase<DerivedU>& delta_u,
                                     const Eigen::MatrixBase<DerivedR>& r) {
  return errors.cwiseAbs2().dot(q) + delta_u.cwiseAbs2().dot(r);
}

/// Norms at or below this are treated as a zero gradient and skipped.
inline constexpr double kMinGradientNorm = 1e-12;

/// W <- W - eta * G / ||G||_F. Returns false (and leaves W alone) when the
/// gradient norm is below kMinGradientNorm.
template <typename DerivedW, typename DerivedG>
bool normalized_descent_step(Eigen::MatrixBase<DerivedW>& weights,
                             const Eigen::MatrixBase<DerivedG>& gradient,
                             typename DerivedW::Scalar eta) {
  using Scalar = typename DerivedW::Scalar;
  const Scalar norm = gradient.norm();
  if (!(norm > Scalar(kMinGradientNorm))) return false;
  weights -= (eta / norm) * gradient;
  return true;
}

}  // namespace mcmf

#endif  // MCMF_KERNELS_HPP
