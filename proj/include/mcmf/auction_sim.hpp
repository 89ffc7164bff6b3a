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

// Second-price replay of a bid log. Each record is priced with the
// controller's adjustment for the period, compared against the logged market
// price, and charged that price on a win. Bidding stops for good once the
// cumulative cost reaches the budget.

#ifndef MCMF_AUCTION_SIM_HPP
#define MCMF_AUCTION_SIM_HPP

#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "mcmf/controller.hpp"
#include "mcmf/core.hpp"

namespace mcmf {

enum class PeriodMode { Count, WallClock };

std::string_view to_string(PeriodMode mode);
PeriodMode parse_period_mode(std::string_view s);

struct SimConfig {
  Fen budget = 0;
  PeriodMode period_mode = PeriodMode::Count;
  std::int64_t period_records = 1000;  // Count mode
  std::int64_t period_ms = 900000;     // WallClock mode
  double dropout_p = 0.0;
  std::uint64_t dropout_seed = 0;

  void validate() const;
};

enum class Outcome { Win, Lose, Terminated };

struct AuctionOutcome {
  Outcome kind = Outcome::Lose;
  Fen cost = 0;
};

/// Ties lose; a non-positive remaining budget terminates regardless of the
/// bid.
AuctionOutcome resolve_auction(const BidRecord& record, double ecpm,
                               Fen remaining_budget);

/// Mutable accounting owned by one replay.
struct SimState {
  FeedbackCounters cumulative;
  Fen budget = 0;
  bool terminated = false;
};

/// Optional per-record hook: (index in the replayed log, record, ecpm, outcome).
using OutcomeSink = std::function<void(std::size_t, const BidRecord&, double,
                                       const AuctionOutcome&)>;

/// Replays one batch at a fixed u. Returns the period delta and the updated
/// cumulative view. `first_index` only labels records passed to `sink`.
PeriodFeedback run_period(std::span<const BidRecord> batch, double u,
                          const ConstraintSet& constraints, SimState& state,
                          const OutcomeSink& sink = {},
                          std::size_t first_index = 0);

struct TraceRow {
  std::int64_t period = 0;
  double u = 0.0;
  std::vector<double> errors;
  double cost_j = 0.0;
  std::int64_t imp = 0;
  std::int64_t clk = 0;
  std::int64_t conv = 0;
  Fen cost = 0;
};

struct CampaignResult {
  CampaignMetrics metrics;
  std::vector<TraceRow> trace;
  bool terminated = false;
};

/// Records kept after independently dropping each with probability p.
/// Same (log, p, seed) always yields the same mask.
std::vector<BidRecord> apply_dropout(std::span<const BidRecord> log, double p,
                                     std::uint64_t seed);

/// Keep-mask used by apply_dropout, exposed so callers can hash or share it.
std::vector<bool> dropout_mask(std::size_t n, double p, std::uint64_t seed);

/// The period loop: decide -> replay -> observe, until the log ends or the
/// budget terminates bidding. Applies dropout first when configured.
CampaignResult run_campaign(std::span<const BidRecord> log,
                            BidController& controller,
                            const ConstraintSet& constraints,
                            const SimConfig& config,
                            const OutcomeSink& sink = {});

}  // namespace mcmf

#endif  // MCMF_AUCTION_SIM_HPP
