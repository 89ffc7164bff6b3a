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

#ifndef MCMF_BASELINES_HPP
#define MCMF_BASELINES_HPP

#include <string>

#include "mcmf/controller.hpp"

namespace mcmf {

struct PidConfig {
  double kp = 0.2;
  double ki = 0.05;
  double kd = 0.05;
  double u_min = 0.01;
  double u_max = 1.0;
  double u_init = 0.5;
  double integral_clamp = 5.0;  // |sum of errors| bound

  void validate() const;
};

/// PID on the normalized PPC error with an exponential actuator:
///   phi = kp e + ki clamp(sum e) + kd (e - e_prev)
///   u   = clamp(u_init exp(-phi), u_min, u_max)
/// A PPC under target (e < 0) raises u.
class PidController final : public BidController {
 public:
  explicit PidController(PidConfig config, std::string name = "pid");

  /// One recurrence step on a normalized error; returns the new u.
  double step(double error);

  double u() const { return u_; }
  double integral() const { return integral_; }

  std::string name() const override { return name_; }
  double decide(const PeriodContext& ctx) override;
  PeriodReport observe(const PeriodContext& ctx) override;

 private:
  PidConfig config_;
  std::string name_;
  double u_;
  double integral_ = 0.0;
  double prev_error_ = 0.0;
  double u_last_period_;
  double delta_u_ = 0.0;
};

/// Control-free reference: the same multiplier every period.
class FixedController final : public BidController {
 public:
  explicit FixedController(double u, std::string name = "fixed");

  double step() const { return u_; }

  std::string name() const override { return name_; }
  double decide(const PeriodContext&) override { return u_; }
  PeriodReport observe(const PeriodContext& ctx) override;

 private:
  double u_;
  std::string name_;
};

/// Trace diagnostics shared by controllers without their own cost model:
/// PaperLiteral budget errors and a single-period J with unit control weight.
PeriodReport baseline_report(const PeriodContext& ctx, double delta_u);

}  // namespace mcmf

#endif  // MCMF_BASELINES_HPP
