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

#ifndef MCMF_MCMF_CONTROLLER_HPP
#define MCMF_MCMF_CONTROLLER_HPP

#include <cstdint>
#include <deque>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "mcmf/controller.hpp"
#include "mcmf/core.hpp"
#include "mcmf/kernels.hpp"

namespace mcmf {

/// Extra merged features appended after the KPI pairs.
///   NG:   none
///   PO:   posterior rates [CTR, CVR]
///   PI:   prior rates [mean pCTR, mean pCVR]
///   FULL: PO followed by PI
enum class FeatureSet { NG, PO, PI, FULL };

/// Reference the budget error is measured against.
///   PaperLiteral: cumulative spend vs. the full budget.
///   Paced: cumulative spend vs. the elapsed share of the budget.
enum class BudgetErrorMode { PaperLiteral, Paced };

/// Which feedback the dx/du sign surrogate differences.
///   Period: per-period values (cost of the period, PPC of the period).
///   Cumulative: running totals, identical to what the error term sees.
enum class FeedbackSignal { Period, Cumulative };

std::string_view to_string(FeatureSet v);
std::string_view to_string(BudgetErrorMode v);
std::string_view to_string(FeedbackSignal v);
FeatureSet parse_feature_set(std::string_view s);
BudgetErrorMode parse_budget_error_mode(std::string_view s);
FeedbackSignal parse_feedback_signal(std::string_view s);

struct McmfConfig {
  int hidden_dim = 8;
  double learning_rate = 0.01;  // eta
  int window = 4;               // tau, periods
  double control_weight = 1.0;  // r, the single diagonal entry of R
  double output_scale = 1.0;    // u_max
  FeatureSet feature_set = FeatureSet::FULL;
  BudgetErrorMode budget_error_mode = BudgetErrorMode::PaperLiteral;
  FeedbackSignal feedback_signal = FeedbackSignal::Period;
  double encoder_init_scale = 0.5;   // W_e ~ U(-s, s)
  double decision_init_scale = 0.5;  // W_d ~ U(-s, s); 0 pins u at u_max/2
  std::uint64_t rng_seed = 0;

  /// Throws ConfigError on violated invariants.
  void validate() const;
};

/// Number of merged features for a feature set.
int feature_count(FeatureSet features);

/// 2 * constraints + feature_count(features)
int input_dim(std::size_t constraint_count, FeatureSet features);

/// Target-normalized feedback x_i / z_i, one entry per constraint.
Vector<double> normalized_feedback(const ConstraintSet& constraints,
                                   const FeedbackCounters& counters);

/// x = [1, x_1/z_1, ..., 1, x_i/z_i, v]
Vector<double> build_input(const ConstraintSet& constraints,
                           const FeedbackCounters& cumulative,
                           FeatureSet features);

/// Normalized reference each constraint's feedback is compared against.
Vector<double> kpi_reference(const ConstraintSet& constraints,
                             double elapsed_fraction, BudgetErrorMode mode);

/// E_i = x_i / z_i - reference_i
Vector<double> kpi_error(const ConstraintSet& constraints,
                         const FeedbackCounters& cumulative,
                         double elapsed_fraction, BudgetErrorMode mode);

/// Adjusted bid in fen, CPM scale: 1000 * pCTR * pCVR * PPC_e * u.
inline double adjusted_ecpm(const BidRecord& record, double ppc_expected,
                            double u) {
  return 1000.0 * record.pctr * record.pcvr * ppc_expected * u;
}

/// Diagonal of Q, taken from the constraints' error weights.
Vector<double> error_weights(const ConstraintSet& constraints);

template <typename Scalar>
struct BasicControllerState {
  Matrix<Scalar> encoder;      // W_e, hidden_dim x input_dim
  RowVector<Scalar> decision;  // W_d, 1 x hidden_dim
  Scalar u_curr{};
  Scalar u_prev{};
  Vector<Scalar> h_curr;
  Vector<Scalar> h_prev;
  Vector<Scalar> input_curr;  // x fed to the latest forward pass
  Vector<Scalar> input_prev;
  Vector<Scalar> signal_curr;  // dx/du feedback snapshot, per constraint
  Vector<Scalar> signal_prev;
  std::deque<Matrix<Scalar>> encoder_grads;   // G_e, at most tau entries
  std::deque<RowVector<Scalar>> decision_grads;  // G_d
  std::int64_t period_index = 0;
};

using ControllerState = BasicControllerState<double>;

/// Seeded initial state. u_prev = u_curr = u_max / 2 and the gradient logs
/// are empty.
ControllerState init_controller(const McmfConfig& config, int input_dim);

/// Runs the forward pass and shifts (h, u, x) history. Throws ConfigError
/// when x does not match the encoder width.
ForwardResult<double> forward(ControllerState& state,
                              const Vector<double>& x, double u_max);

class InsufficientHistory : public std::logic_error {
 public:
  InsufficientHistory()
      : std::logic_error("backward needs a previous period") {}
};

struct GradientPair {
  Matrix<double> encoder;      // dJ/dW_e
  RowVector<double> decision;  // dJ/dW_d
  double chain = 0.0;          // dJ1/dx dx/du + dJ2/du
};

/// Approximated backward pass for the latest period. `feedback` and
/// `reference` are the normalized cumulative KPI values and their
/// references; the dx/du signs use the state's signal snapshots. The
/// gradients are appended to the state's logs (capped at tau).
GradientPair backward(ControllerState& state, const ConstraintSet& constraints,
                      const Vector<double>& feedback,
                      const Vector<double>& reference,
                      const McmfConfig& config);

struct UpdateResult {
  bool encoder_updated = false;
  bool decision_updated = false;
};

/// W <- W - eta * mean(G) / ||mean(G)||_F for each layer, skipping a layer
/// whose mean gradient vanishes.
UpdateResult apply_update(ControllerState& state, const McmfConfig& config);

/// The MCMF controller driven through the period interface.
class McmfController final : public BidController {
 public:
  McmfController(McmfConfig config, const ConstraintSet& constraints,
                 std::string name = "mcmf");

  std::string name() const override { return name_; }
  double decide(const PeriodContext& ctx) override;
  PeriodReport observe(const PeriodContext& ctx) override;

  const ControllerState& state() const { return state_; }
  const McmfConfig& config() const { return config_; }

  /// Fires after every applied weight update with the weights before it.
  struct UpdateEvent {
    Matrix<double> encoder_before;
    RowVector<double> decision_before;
    UpdateResult result;
  };
  const std::optional<UpdateEvent>& last_update() const { return last_update_; }

 private:
  McmfConfig config_;
  std::string name_;
  ControllerState state_;
  Vector<double> q_;
  std::deque<double> cost_window_;
  std::optional<UpdateEvent> last_update_;
};

}  // namespace mcmf

#endif  // MCMF_MCMF_CONTROLLER_HPP
