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

#include "mcmf/kernels.hpp"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "mcmf/mcmf_controller.hpp"

namespace mcmf {
namespace {

using Mat = Matrix<double>;
using Vec = Vector<double>;
using Row = RowVector<double>;

Vec vec(std::initializer_list<double> v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

Row row(std::initializer_list<double> v) { return vec(v).transpose(); }

TEST(Forward, IdentityWithZeroDecision) {
  const auto r = forward_pass(Mat::Identity(2, 2), row({0, 0}), vec({1, 1}), 1.0);
  EXPECT_EQ(r.h, vec({1, 1}));
  EXPECT_EQ(r.u, 0.5);
}

TEST(Forward, LogisticOfOne) {
  const auto r = forward_pass(Mat::Identity(2, 2), row({1, 0}), vec({1, 0}), 1.0);
  EXPECT_NEAR(r.u, 0.731059, 1e-6);
}

TEST(Forward, MatchesTripleLoopOracle) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  Mat we(4, 6);
  Row wd(4);
  Vec x(6);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 6; ++j) we(i, j) = d(rng);
  for (int i = 0; i < 4; ++i) wd(i) = d(rng);
  for (int j = 0; j < 6; ++j) x(j) = d(rng);

  double h[4];
  double a = 0.0;
  for (int i = 0; i < 4; ++i) {
    h[i] = 0.0;
    for (int j = 0; j < 6; ++j) h[i] += we(i, j) * x(j);
    a += wd(i) * h[i];
  }
  const double u = 1.7 / (1.0 + std::exp(-a));

  const auto r = forward_pass(we, wd, x, 1.7);
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(r.h(i), h[i], 1e-12);
  EXPECT_NEAR(r.u, u, 1e-12);
}

TEST(Forward, LongDoubleScalar) {
  Matrix<long double> we = Matrix<long double>::Identity(2, 2);
  RowVector<long double> wd = RowVector<long double>::Zero(2);
  Vector<long double> x = Vector<long double>::Ones(2);
  EXPECT_EQ(forward_pass(we, wd, x, 1.0L).u, 0.5L);
}

TEST(Logistic, StableAtExtremes) {
  EXPECT_EQ(logistic(-1000.0), 0.0);
  EXPECT_EQ(logistic(1000.0), 1.0);
  EXPECT_EQ(logistic(0.0), 0.5);
  EXPECT_EQ(logistic_slope(0.0), 0.25);
}

TEST(AdjustedEcpm, Examples) {
  BidRecord r{0, 0.1, 0.1, 0, false, false};
  EXPECT_NEAR(adjusted_ecpm(r, 1800, 0.5), 9000.0, 1e-9);
  r.pctr = 0.0;
  EXPECT_EQ(adjusted_ecpm(r, 1800, 0.5), 0.0);
  r.pctr = 0.001;
  r.pcvr = 0.01;
  EXPECT_NEAR(adjusted_ecpm(r, 1800, 1.0), 18.0, 1e-9);
}

TEST(CostValue, Examples) {
  EXPECT_DOUBLE_EQ(cost_value(vec({1}), vec({2}), vec({0.5}), vec({4})), 3.0);
  EXPECT_EQ(cost_value(vec({0}), vec({2}), vec({0}), vec({4})), 0.0);
  EXPECT_NEAR(cost_value(vec({1, -2}), vec({1, 3}), vec({0.1}), vec({10})),
              13.1, 1e-12);
}

TEST(CostValue, NonnegativeAndZeroOnlyAtOrigin) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> d(-2.0, 2.0);
  std::uniform_real_distribution<double> w(0.01, 5.0);
  for (int i = 0; i < 1000; ++i) {
    const Vec e = vec({d(rng), d(rng)});
    const Vec du = vec({d(rng)});
    const double j = cost_value(e, vec({w(rng), w(rng)}), du, vec({w(rng)}));
    EXPECT_GT(j, 0.0);
  }
  EXPECT_EQ(cost_value(vec({0, 0}), vec({1, 1}), vec({0}), vec({1})), 0.0);
}

TEST(Partials, Examples) {
  EXPECT_EQ(partial_j1(1.0, 5.0, 3.0), 4.0);
  EXPECT_NEAR(partial_j2(2.0, 0.6, 0.5), 0.4, 1e-12);
  for (double q : {0.1, 1.0, 7.0}) EXPECT_EQ(partial_j1(q, 2.5, 2.5), 0.0);
}

TEST(ApproxDxdu, Examples) {
  EXPECT_EQ(approx_dxdu(10.0, 8.0, 0.6, 0.5), 1);
  EXPECT_EQ(approx_dxdu(8.0, 10.0, 0.6, 0.5), -1);
  EXPECT_EQ(approx_dxdu(10.0, 10.0, 0.6, 0.5), 0);
}

TEST(ApproxDxdu, SignRange) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> d(-2, 2);
  for (int i = 0; i < 2000; ++i) {
    const int s = approx_dxdu<double>(d(rng), d(rng), d(rng), d(rng));
    EXPECT_TRUE(s == -1 || s == 0 || s == 1);
  }
}

TEST(SigmoidLayerGrads, AtZero) {
  const auto g = sigmoid_layer_grads(row({1}), vec({0}), 1.0);
  EXPECT_EQ(g.du_dh(0), 0.25);
  EXPECT_EQ(g.du_dwd(0), 0.0);
}

TEST(SigmoidLayerGrads, Saturation) {
  const auto g = sigmoid_layer_grads(row({4, 1}), vec({4, 4}), 1.0);
  EXPECT_LT(g.du_dh.cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_LT(g.du_dwd.cwiseAbs().maxCoeff(), 1e-8);
}

TEST(SigmoidLayerGrads, FiniteDifference) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  const double step = 1e-6;
  Row wd(3);
  Vec h(3);
  for (int i = 0; i < 3; ++i) {
    wd(i) = d(rng);
    h(i) = d(rng);
  }
  const double umax = 1.3;
  auto u_of = [&](const Row& w, const Vec& hh) {
    return umax * logistic(w.dot(hh));
  };
  const auto g = sigmoid_layer_grads(wd, h, umax);
  for (int k = 0; k < 3; ++k) {
    Vec hp = h, hm = h;
    hp(k) += step;
    hm(k) -= step;
    const double fd_h = (u_of(wd, hp) - u_of(wd, hm)) / (2 * step);
    EXPECT_NEAR(g.du_dh(k), fd_h, 1e-5 * std::max(1.0, std::abs(fd_h)));
    Row wp = wd, wm = wd;
    wp(k) += step;
    wm(k) -= step;
    const double fd_w = (u_of(wp, h) - u_of(wm, h)) / (2 * step);
    EXPECT_NEAR(g.du_dwd(k), fd_w, 1e-5 * std::max(1.0, std::abs(fd_w)));
  }
}

TEST(ApproxDhdwe, NoHiddenMovement) {
  const Vec r = approx_dhdwe(vec({1, 2, 3}), vec({0.1, 0.2}), vec({0.1, 0.2}),
                             0.6, 0.5);
  EXPECT_EQ(r, Vec::Zero(3));
}

TEST(ApproxDhdwe, SingleHiddenUnit) {
  const Vec r = approx_dhdwe(vec({1, 2}), vec({0.3}), vec({0.2}), 0.6, 0.5);
  EXPECT_EQ(r, vec({1, 2}));
}

TEST(ApproxDhdwe, MixedSignsSum) {
  // signs +1, -1, +1
  const Vec x = vec({0.5, -1.5, 2.0});
  const Vec r = approx_dhdwe(x, vec({1.0, 0.0, 3.0}), vec({0.0, 1.0, 2.0}),
                             0.6, 0.5);
  EXPECT_EQ(hebbian_sign_sum(vec({1.0, 0.0, 3.0}), vec({0.0, 1.0, 2.0}), 0.6, 0.5),
            1);
  EXPECT_EQ(r, x);
}

TEST(NormalizedStep, ZeroGradientSkips) {
  Mat w = Mat::Constant(2, 3, 0.7);
  const Mat before = w;
  EXPECT_FALSE(normalized_descent_step(w, Mat::Zero(2, 3), 0.01));
  EXPECT_EQ(w, before);
  EXPECT_FALSE(normalized_descent_step(w, Mat::Constant(2, 3, 1e-14), 0.01));
}

TEST(NormalizedStep, StepHasNormEta) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> d(-100.0, 100.0);
  for (int i = 0; i < 100; ++i) {
    Mat w = Mat::Zero(3, 4);
    Mat g(3, 4);
    for (int k = 0; k < 12; ++k) g.data()[k] = d(rng);
    const Mat before = w;
    ASSERT_TRUE(normalized_descent_step(w, g, 0.01));
    EXPECT_NEAR((w - before).norm(), 0.01, 1e-9);
    // descent direction
    EXPECT_LT(((w - before).array() * g.array()).sum(), 0.0);
  }
}

}  // namespace
}  // namespace mcmf
