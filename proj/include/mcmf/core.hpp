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

#ifndef MCMF_CORE_HPP
#define MCMF_CORE_HPP

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mcmf {

/// Money in fen (1/100 CNY). Accounting is integer end-to-end.
using Fen = std::int64_t;

/// Raised for invalid configuration: bad constraint sets, dimension
/// mismatches, unknown enum names.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// One replayable auction opportunity.
struct BidRecord {
  std::int64_t ts = 0;  // ms since epoch
  double pctr = 0.0;
  double pcvr = 0.0;
  Fen market_price = 0;  // price a bid must beat, CPM scale
  bool click = false;
  bool conversion = false;

  friend bool operator==(const BidRecord&, const BidRecord&) = default;
};

/// Empty when the record satisfies the BidRecord invariants, otherwise a
/// short description of the first violated one.
std::optional<std::string> validate_record(const BidRecord& record);

enum class KpiKind { PpcTarget, Budget };

std::string_view to_string(KpiKind kind);

struct KpiConstraint {
  KpiKind kind = KpiKind::PpcTarget;
  Fen target = 1;             // z_i
  double error_weight = 1.0;  // q_i
};

/// Ordered KPI constraints plus the expected PPC that anchors the original
/// bid price. At most one constraint of each kind.
class ConstraintSet {
 public:
  ConstraintSet(std::vector<KpiConstraint> constraints, double ppc_expected);

  /// [PPC_TARGET]
  static ConstraintSet single(Fen ppc_target, double ppc_expected,
                              double ppc_weight = 1.0);
  /// [PPC_TARGET, BUDGET]
  static ConstraintSet multi(Fen ppc_target, Fen budget, double ppc_expected,
                             double ppc_weight = 1.0,
                             double budget_weight = 1.0);

  const std::vector<KpiConstraint>& constraints() const { return constraints_; }
  std::size_t size() const { return constraints_.size(); }
  double ppc_expected() const { return ppc_expected_; }

  const KpiConstraint* find(KpiKind kind) const;

 private:
  std::vector<KpiConstraint> constraints_;
  double ppc_expected_;
};

/// Auction counters. Used both as a per-period delta and as the cumulative
/// view of a campaign.
struct FeedbackCounters {
  std::int64_t bids_participated = 0;
  std::int64_t impressions = 0;
  std::int64_t clicks = 0;
  std::int64_t conversions = 0;
  Fen cost = 0;
  double sum_pctr = 0.0;
  double sum_pcvr = 0.0;

  FeedbackCounters& operator+=(const FeedbackCounters& other);
  friend bool operator==(const FeedbackCounters&,
                         const FeedbackCounters&) = default;
};

struct PeriodFeedback {
  FeedbackCounters period;
  FeedbackCounters cumulative;
};

struct TrajectoryPoint {
  std::int64_t conversions = 0;
  Fen cost = 0;
};

struct CampaignMetrics {
  std::int64_t imp = 0;
  std::int64_t clk = 0;
  std::int64_t conv = 0;
  Fen cost = 0;
  std::optional<double> ppc;  // cost / conv, absent when conv == 0
  std::vector<TrajectoryPoint> trajectory;
};

CampaignMetrics compute_metrics(const FeedbackCounters& cumulative);

/// Raw (unnormalized) feedback x_i for a constraint. BUDGET tracks cost;
/// PPC_TARGET tracks cost / max(conversions, 1).
double feedback_value(const KpiConstraint& constraint,
                      const FeedbackCounters& counters);

}  // namespace mcmf

#endif  // MCMF_CORE_HPP
