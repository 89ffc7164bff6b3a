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

#include "mcmf/baselines.hpp"

#include <algorithm>
#include <cmath>

#include "mcmf/mcmf_controller.hpp"

namespace mcmf {

void PidConfig::validate() const {
  if (!(u_min > 0.0 && u_min < u_max)) {
    throw ConfigError("pid: require 0 < u_min < u_max");
  }
  if (kp < 0.0 || ki < 0.0 || kd < 0.0) {
    throw ConfigError("pid: gains must be >= 0");
  }
  if (!(u_init > 0.0)) throw ConfigError("pid: u_init must be > 0");
  if (integral_clamp < 0.0) throw ConfigError("pid: integral_clamp must be >= 0");
}

PidController::PidController(PidConfig config, std::string name)
    : config_(config), name_(std::move(name)) {
  config_.validate();
  u_ = std::clamp(config_.u_init, config_.u_min, config_.u_max);
  u_last_period_ = u_;
}

double PidController::step(double error) {
  integral_ = std::clamp(integral_ + error, -config_.integral_clamp,
                         config_.integral_clamp);
  const double phi = config_.kp * error + config_.ki * integral_ +
                     config_.kd * (error - prev_error_);
  prev_error_ = error;
  u_ = std::clamp(config_.u_init * std::exp(-phi), config_.u_min,
                  config_.u_max);
  return u_;
}

double PidController::decide(const PeriodContext&) {
  delta_u_ = u_ - u_last_period_;
  u_last_period_ = u_;
  return u_;
}

PeriodReport PidController::observe(const PeriodContext& ctx) {
  const KpiConstraint* ppc = ctx.constraints.find(KpiKind::PpcTarget);
  if (ppc == nullptr) throw ConfigError("pid: needs a PPC_TARGET constraint");
  auto report = baseline_report(ctx, delta_u_);
  step(feedback_value(*ppc, ctx.feedback.cumulative) /
           static_cast<double>(ppc->target) -
       1.0);
  report.updated = true;
  return report;
}

FixedController::FixedController(double u, std::string name)
    : u_(u), name_(std::move(name)) {
  if (!(u_ > 0.0)) throw ConfigError("fixed: u must be > 0");
}

PeriodReport FixedController::observe(const PeriodContext& ctx) {
  return baseline_report(ctx, 0.0);
}

PeriodReport baseline_report(const PeriodContext& ctx, double delta_u) {
  const auto errors =
      kpi_error(ctx.constraints, ctx.feedback.cumulative, ctx.elapsed_fraction,
                BudgetErrorMode::PaperLiteral);
  PeriodReport report;
  report.errors.assign(errors.data(), errors.data() + errors.size());
  Vector<double> du(1);
  du(0) = delta_u;
  report.cost = cost_value(errors, error_weights(ctx.constraints), du,
                           Vector<double>::Ones(1));
  return report;
}

}  // namespace mcmf
