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

#include "mcmf/mcmf_controller.hpp"

#include <random>
#include <string>

namespace mcmf {
namespace {

double safe_ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }

template <typename Gradient>
void push_capped(std::deque<Gradient>& log, Gradient g, int cap) {
  log.push_back(std::move(g));
  while (static_cast<int>(log.size()) > cap) log.pop_front();
}

}  // namespace

std::string_view to_string(FeatureSet v) {
  switch (v) {
    case FeatureSet::NG: return "NG";
    case FeatureSet::PO: return "PO";
    case FeatureSet::PI: return "PI";
    case FeatureSet::FULL: return "FULL";
  }
  return "?";
}

std::string_view to_string(BudgetErrorMode v) {
  return v == BudgetErrorMode::Paced ? "paced" : "paper_literal";
}

std::string_view to_string(FeedbackSignal v) {
  return v == FeedbackSignal::Cumulative ? "cumulative" : "period";
}

FeatureSet parse_feature_set(std::string_view s) {
  for (auto f : {FeatureSet::NG, FeatureSet::PO, FeatureSet::PI,
                 FeatureSet::FULL}) {
    if (s == to_string(f)) return f;
  }
  throw ConfigError("unknown feature set '" + std::string(s) + "'");
}

BudgetErrorMode parse_budget_error_mode(std::string_view s) {
  if (s == "paper_literal") return BudgetErrorMode::PaperLiteral;
  if (s == "paced") return BudgetErrorMode::Paced;
  throw ConfigError("unknown budget error mode '" + std::string(s) + "'");
}

FeedbackSignal parse_feedback_signal(std::string_view s) {
  if (s == "period") return FeedbackSignal::Period;
  if (s == "cumulative") return FeedbackSignal::Cumulative;
  throw ConfigError("unknown feedback signal '" + std::string(s) + "'");
}

void McmfConfig::validate() const {
  if (hidden_dim < 1) throw ConfigError("hidden_dim must be >= 1");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  if (window < 1) throw ConfigError("window must be >= 1");
  if (!(control_weight > 0.0)) throw ConfigError("control_weight must be > 0");
  if (!(output_scale > 0.0)) throw ConfigError("output_scale must be > 0");
  if (encoder_init_scale < 0.0 || decision_init_scale < 0.0) {
    throw ConfigError("init scales must be >= 0");
  }
}

int feature_count(FeatureSet features) {
  switch (features) {
    case FeatureSet::NG: return 0;
    case FeatureSet::PO:
    case FeatureSet::PI: return 2;
    case FeatureSet::FULL: return 4;
  }
  return 0;
}

int input_dim(std::size_t constraint_count, FeatureSet features) {
  return 2 * static_cast<int>(constraint_count) + feature_count(features);
}

Vector<double> normalized_feedback(const ConstraintSet& constraints,
                                   const FeedbackCounters& counters) {
  Vector<double> out(static_cast<Eigen::Index>(constraints.size()));
  Eigen::Index i = 0;
  for (const auto& c : constraints.constraints()) {
    out(i++) = feedback_value(c, counters) / static_cast<double>(c.target);
  }
  return out;
}

Vector<double> build_input(const ConstraintSet& constraints,
                           const FeedbackCounters& cumulative,
                           FeatureSet features) {
  Vector<double> x(input_dim(constraints.size(), features));
  const Vector<double> fb = normalized_feedback(constraints, cumulative);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < fb.size(); ++i) {
    x(k++) = 1.0;
    x(k++) = fb(i);
  }
  const auto imp = static_cast<double>(cumulative.impressions);
  const auto clk = static_cast<double>(cumulative.clicks);
  const auto conv = static_cast<double>(cumulative.conversions);
  const auto bids = static_cast<double>(cumulative.bids_participated);
  if (features == FeatureSet::PO || features == FeatureSet::FULL) {
    x(k++) = safe_ratio(clk, imp);
    x(k++) = safe_ratio(conv, clk);
  }
  if (features == FeatureSet::PI || features == FeatureSet::FULL) {
    x(k++) = safe_ratio(cumulative.sum_pctr, bids);
    x(k++) = safe_ratio(cumulative.sum_pcvr, bids);
  }
  return x;
}

Vector<double> kpi_reference(const ConstraintSet& constraints,
                             double elapsed_fraction, BudgetErrorMode mode) {
  Vector<double> ref(static_cast<Eigen::Index>(constraints.size()));
  Eigen::Index i = 0;
  for (const auto& c : constraints.constraints()) {
    const bool paced =
        c.kind == KpiKind::Budget && mode == BudgetErrorMode::Paced;
    ref(i++) = paced ? elapsed_fraction : 1.0;
  }
  return ref;
}

Vector<double> kpi_error(const ConstraintSet& constraints,
                         const FeedbackCounters& cumulative,
                         double elapsed_fraction, BudgetErrorMode mode) {
  return normalized_feedback(constraints, cumulative) -
         kpi_reference(constraints, elapsed_fraction, mode);
}

Vector<double> error_weights(const ConstraintSet& constraints) {
  Vector<double> q(static_cast<Eigen::Index>(constraints.size()));
  Eigen::Index i = 0;
  for (const auto& c : constraints.constraints()) q(i++) = c.error_weight;
  return q;
}

ControllerState init_controller(const McmfConfig& config, int input_dim) {
  config.validate();
  if (input_dim < 1) throw ConfigError("input_dim must be >= 1");
  std::mt19937_64 rng(config.rng_seed);
  auto draw = [&rng](double scale) {
    if (scale == 0.0) return 0.0;
    return std::uniform_real_distribution<double>(-scale, scale)(rng);
  };

  ControllerState s;
  s.encoder.resize(config.hidden_dim, input_dim);
  for (Eigen::Index c = 0; c < s.encoder.cols(); ++c) {
    for (Eigen::Index r = 0; r < s.encoder.rows(); ++r) {
      s.encoder(r, c) = draw(config.encoder_init_scale);
    }
  }
  s.decision.resize(config.hidden_dim);
  for (Eigen::Index k = 0; k < s.decision.size(); ++k) {
    s.decision(k) = draw(config.decision_init_scale);
  }
  s.u_curr = s.u_prev = config.output_scale / 2.0;
  s.h_curr = s.h_prev = Vector<double>::Zero(config.hidden_dim);
  s.input_curr = s.input_prev = Vector<double>::Zero(input_dim);
  return s;
}

ForwardResult<double> forward(ControllerState& state, const Vector<double>& x,
                              double u_max) {
  if (x.size() != state.encoder.cols()) {
    throw ConfigError("input has " + std::to_string(x.size()) +
                      " entries, encoder expects " +
                      std::to_string(state.encoder.cols()));
  }
  auto out = forward_pass(state.encoder, state.decision, x, u_max);
  state.h_prev = std::move(state.h_curr);
  state.u_prev = state.u_curr;
  state.input_prev = std::move(state.input_curr);
  state.h_curr = out.h;
  state.u_curr = out.u;
  state.input_curr = x;
  return out;
}

GradientPair backward(ControllerState& state, const ConstraintSet& constraints,
                      const Vector<double>& feedback,
                      const Vector<double>& reference,
                      const McmfConfig& config) {
  if (state.period_index < 1) throw InsufficientHistory();
  const auto n = static_cast<Eigen::Index>(constraints.size());
  if (feedback.size() != n || reference.size() != n ||
      state.signal_curr.size() != n || state.signal_prev.size() != n) {
    throw ConfigError("backward: per-constraint vectors have wrong size");
  }

  const double u = state.u_curr;
  const double u_prev = state.u_prev;
  const auto& kpis = constraints.constraints();

  double chain = partial_j2(config.control_weight, u, u_prev);
  for (Eigen::Index i = 0; i < n; ++i) {
    chain += partial_j1(kpis[static_cast<std::size_t>(i)].error_weight,
                        feedback(i), reference(i)) *
             approx_dxdu(state.signal_curr(i), state.signal_prev(i), u, u_prev);
  }

  const auto layer =
      sigmoid_layer_grads(state.decision, state.h_curr, config.output_scale);
  const Vector<double> dh_dwe =
      approx_dhdwe(state.input_curr, state.h_curr, state.h_prev, u, u_prev);

  GradientPair g;
  g.chain = chain;
  g.decision = chain * layer.du_dwd;
  g.encoder = chain * (layer.du_dh * dh_dwe.transpose());

  push_capped(state.encoder_grads, g.encoder, config.window);
  push_capped(state.decision_grads, g.decision, config.window);
  return g;
}

UpdateResult apply_update(ControllerState& state, const McmfConfig& config) {
  UpdateResult result;
  if (!state.encoder_grads.empty()) {
    Matrix<double> mean = Matrix<double>::Zero(state.encoder.rows(),
                                               state.encoder.cols());
    for (const auto& g : state.encoder_grads) mean += g;
    mean /= static_cast<double>(state.encoder_grads.size());
    result.encoder_updated =
        normalized_descent_step(state.encoder, mean, config.learning_rate);
  }
  if (!state.decision_grads.empty()) {
    RowVector<double> mean = RowVector<double>::Zero(state.decision.size());
    for (const auto& g : state.decision_grads) mean += g;
    mean /= static_cast<double>(state.decision_grads.size());
    result.decision_updated =
        normalized_descent_step(state.decision, mean, config.learning_rate);
  }
  return result;
}

McmfController::McmfController(McmfConfig config,
                               const ConstraintSet& constraints,
                               std::string name)
    : config_(config),
      name_(std::move(name)),
      state_(init_controller(
          config_, input_dim(constraints.size(), config_.feature_set))),
      q_(error_weights(constraints)) {}

double McmfController::decide(const PeriodContext& ctx) {
  const auto x =
      build_input(ctx.constraints, ctx.feedback.cumulative, config_.feature_set);
  return forward(state_, x, config_.output_scale).u;
}

PeriodReport McmfController::observe(const PeriodContext& ctx) {
  const auto& cumulative = ctx.feedback.cumulative;
  const Vector<double> feedback =
      normalized_feedback(ctx.constraints, cumulative);
  const Vector<double> reference = kpi_reference(
      ctx.constraints, ctx.elapsed_fraction, config_.budget_error_mode);

  state_.signal_prev = std::move(state_.signal_curr);
  state_.signal_curr =
      config_.feedback_signal == FeedbackSignal::Period
          ? normalized_feedback(ctx.constraints, ctx.feedback.period)
          : feedback;

  PeriodReport report;
  const Vector<double> errors = feedback - reference;
  report.errors.assign(errors.data(), errors.data() + errors.size());

  Vector<double> du(1);
  du(0) = state_.u_curr - state_.u_prev;
  Vector<double> r(1);
  r(0) = config_.control_weight;
  cost_window_.push_back(cost_value(errors, q_, du, r));
  while (static_cast<int>(cost_window_.size()) > config_.window) {
    cost_window_.pop_front();
  }
  for (double j : cost_window_) report.cost += j;

  last_update_.reset();
  if (state_.period_index >= 1) {
    backward(state_, ctx.constraints, feedback, reference, config_);
    UpdateEvent event{state_.encoder, state_.decision, {}};
    event.result = apply_update(state_, config_);
    report.updated =
        event.result.encoder_updated || event.result.decision_updated;
    if (report.updated) last_update_ = std::move(event);
  }
  ++state_.period_index;
  return report;
}

}  // namespace mcmf
