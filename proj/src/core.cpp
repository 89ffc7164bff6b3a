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

#include "mcmf/core.hpp"

#include <algorithm>
#include <cmath>

namespace mcmf {

std::optional<std::string> validate_record(const BidRecord& record) {
  if (!(record.pctr >= 0.0 && record.pctr <= 1.0)) return "pctr out of [0,1]";
  if (!(record.pcvr >= 0.0 && record.pcvr <= 1.0)) return "pcvr out of [0,1]";
  if (record.market_price < 0) return "negative market_price";
  if (record.conversion && !record.click) return "conversion without click";
  return std::nullopt;
}

std::string_view to_string(KpiKind kind) {
  switch (kind) {
    case KpiKind::PpcTarget:
      return "ppc";
    case KpiKind::Budget:
      return "budget";
  }
  return "unknown";
}

ConstraintSet::ConstraintSet(std::vector<KpiConstraint> constraints,
                             double ppc_expected)
    : constraints_(std::move(constraints)), ppc_expected_(ppc_expected) {
  if (!(ppc_expected_ > 0.0)) {
    throw ConfigError("ppc_expected must be positive");
  }
  int ppc = 0;
  int budget = 0;
  for (const auto& c : constraints_) {
    if (c.target <= 0) throw ConfigError("constraint target must be positive");
    if (!(c.error_weight > 0.0)) {
      throw ConfigError("constraint error_weight must be positive");
    }
    (c.kind == KpiKind::PpcTarget ? ppc : budget) += 1;
  }
  if (ppc > 1 || budget > 1) {
    throw ConfigError("at most one constraint of each kind is allowed");
  }
}

ConstraintSet ConstraintSet::single(Fen ppc_target, double ppc_expected,
                                    double ppc_weight) {
  return ConstraintSet({{KpiKind::PpcTarget, ppc_target, ppc_weight}},
                       ppc_expected);
}

ConstraintSet ConstraintSet::multi(Fen ppc_target, Fen budget,
                                   double ppc_expected, double ppc_weight,
                                   double budget_weight) {
  return ConstraintSet({{KpiKind::PpcTarget, ppc_target, ppc_weight},
                        {KpiKind::Budget, budget, budget_weight}},
                       ppc_expected);
}

const KpiConstraint* ConstraintSet::find(KpiKind kind) const {
  auto it = std::find_if(constraints_.begin(), constraints_.end(),
                         [kind](const auto& c) { return c.kind == kind; });
  return it == constraints_.end() ? nullptr : &*it;
}

FeedbackCounters& FeedbackCounters::operator+=(const FeedbackCounters& other) {
  bids_participated += other.bids_participated;
  impressions += other.impressions;
  clicks += other.clicks;
  conversions += other.conversions;
  cost += other.cost;
  sum_pctr += other.sum_pctr;
  sum_pcvr += other.sum_pcvr;
  return *this;
}

CampaignMetrics compute_metrics(const FeedbackCounters& cumulative) {
  CampaignMetrics m;
  m.imp = cumulative.impressions;
  m.clk = cumulative.clicks;
  m.conv = cumulative.conversions;
  m.cost = cumulative.cost;
  if (m.conv > 0) {
    m.ppc = static_cast<double>(m.cost) / static_cast<double>(m.conv);
  }
  return m;
}

double feedback_value(const KpiConstraint& constraint,
                      const FeedbackCounters& counters) {
  const auto cost = static_cast<double>(counters.cost);
  switch (constraint.kind) {
    case KpiKind::Budget:
      return cost;
    case KpiKind::PpcTarget:
      return cost / static_cast<double>(
                        std::max<std::int64_t>(counters.conversions, 1));
  }
  return 0.0;
}

}  // namespace mcmf
