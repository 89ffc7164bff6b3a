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

#include "mcmf/auction_sim.hpp"

#include <algorithm>
#include <random>
#include <string>

#include "mcmf/mcmf_controller.hpp"

namespace mcmf {

std::string_view to_string(PeriodMode mode) {
  return mode == PeriodMode::WallClock ? "wall_clock" : "count";
}

PeriodMode parse_period_mode(std::string_view s) {
  if (s == "count") return PeriodMode::Count;
  if (s == "wall_clock") return PeriodMode::WallClock;
  throw ConfigError("unknown period mode '" + std::string(s) + "'");
}

void SimConfig::validate() const {
  if (budget < 0) throw ConfigError("budget must be >= 0");
  if (!(dropout_p >= 0.0 && dropout_p <= 1.0)) {
    throw ConfigError("dropout_p must be in [0,1]");
  }
  if (period_records < 1) throw ConfigError("period_records must be >= 1");
  if (period_ms < 1) throw ConfigError("period_ms must be >= 1");
}

AuctionOutcome resolve_auction(const BidRecord& record, double ecpm,
                               Fen remaining_budget) {
  if (remaining_budget <= 0) return {Outcome::Terminated, 0};
  if (ecpm > static_cast<double>(record.market_price)) {
    return {Outcome::Win, record.market_price};
  }
  return {Outcome::Lose, 0};
}

PeriodFeedback run_period(std::span<const BidRecord> batch, double u,
                          const ConstraintSet& constraints, SimState& state,
                          const OutcomeSink& sink, std::size_t first_index) {
  PeriodFeedback fb;
  auto& delta = fb.period;
  const double ppc_e = constraints.ppc_expected();
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const BidRecord& rec = batch[i];
    const double ecpm = adjusted_ecpm(rec, ppc_e, u);
    const auto outcome = resolve_auction(
        rec, ecpm, state.budget - (state.cumulative.cost + delta.cost));
    if (sink) sink(first_index + i, rec, ecpm, outcome);
    if (outcome.kind == Outcome::Terminated) {
      state.terminated = true;
      continue;
    }
    ++delta.bids_participated;
    delta.sum_pctr += rec.pctr;
    delta.sum_pcvr += rec.pcvr;
    if (outcome.kind == Outcome::Win) {
      ++delta.impressions;
      delta.cost += outcome.cost;
      delta.clicks += rec.click ? 1 : 0;
      delta.conversions += rec.conversion ? 1 : 0;
    }
  }
  state.cumulative += delta;
  fb.cumulative = state.cumulative;
  return fb;
}

std::vector<bool> dropout_mask(std::size_t n, double p, std::uint64_t seed) {
  std::vector<bool> keep(n);
  std::mt19937_64 rng(seed);
  const double keep_probability = 1.0 - p;
  for (std::size_t i = 0; i < n; ++i) {
    // 53-bit uniform in [0, 1); spelled out so the mask does not depend on
    // the standard library's distribution implementation.
    const double draw = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    keep[i] = draw < keep_probability;
  }
  return keep;
}

std::vector<BidRecord> apply_dropout(std::span<const BidRecord> log, double p,
                                     std::uint64_t seed) {
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("dropout p must be in [0,1]");
  const auto keep = dropout_mask(log.size(), p, seed);
  std::vector<BidRecord> out;
  out.reserve(static_cast<std::size_t>(
      static_cast<double>(log.size()) * (1.0 - p) + 16.0));
  for (std::size_t i = 0; i < log.size(); ++i) {
    if (keep[i]) out.push_back(log[i]);
  }
  return out;
}

namespace {

// Half-open index ranges [begin, end) of each non-empty period.
std::vector<std::pair<std::size_t, std::size_t>> split_periods(
    std::span<const BidRecord> log, const SimConfig& config) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  if (log.empty()) return out;
  if (config.period_mode == PeriodMode::Count) {
    const auto step = static_cast<std::size_t>(config.period_records);
    for (std::size_t b = 0; b < log.size(); b += step) {
      out.emplace_back(b, std::min(log.size(), b + step));
    }
    return out;
  }
  const std::int64_t origin = log.front().ts;
  std::size_t begin = 0;
  while (begin < log.size()) {
    const std::int64_t window = (log[begin].ts - origin) / config.period_ms;
    const std::int64_t window_end = origin + (window + 1) * config.period_ms;
    std::size_t end = begin;
    while (end < log.size() && log[end].ts < window_end) ++end;
    out.emplace_back(begin, end);
    begin = end;
  }
  return out;
}

double elapsed_after(std::span<const BidRecord> log, std::size_t end,
                     const SimConfig& config) {
  if (log.empty()) return 1.0;
  if (config.period_mode == PeriodMode::Count || end >= log.size()) {
    return static_cast<double>(end) / static_cast<double>(log.size());
  }
  const auto span_ms =
      static_cast<double>(log.back().ts - log.front().ts + 1);
  return std::clamp(
      static_cast<double>(log[end].ts - log.front().ts) / span_ms, 0.0, 1.0);
}

}  // namespace

CampaignResult run_campaign(std::span<const BidRecord> log,
                            BidController& controller,
                            const ConstraintSet& constraints,
                            const SimConfig& config, const OutcomeSink& sink) {
  config.validate();
  std::vector<BidRecord> thinned;
  if (config.dropout_p > 0.0) {
    thinned = apply_dropout(log, config.dropout_p, config.dropout_seed);
    log = thinned;
  }

  CampaignResult result;
  SimState state;
  state.budget = config.budget;
  PeriodFeedback feedback;

  std::int64_t period = 0;
  for (const auto& [begin, end] : split_periods(log, config)) {
    const PeriodContext before{constraints, feedback,
                               elapsed_after(log, begin, config), period};
    const double u = controller.decide(before);

    feedback = run_period(log.subspan(begin, end - begin), u, constraints,
                          state, sink, begin);

    const PeriodContext after{constraints, feedback,
                              elapsed_after(log, end, config), period};
    PeriodReport report = controller.observe(after);

    const auto& cum = feedback.cumulative;
    result.trace.push_back({period, u, std::move(report.errors), report.cost,
                            cum.impressions, cum.clicks, cum.conversions,
                            cum.cost});
    result.metrics.trajectory.push_back({cum.conversions, cum.cost});
    ++period;
    if (state.terminated) break;
  }

  auto trajectory = std::move(result.metrics.trajectory);
  result.metrics = compute_metrics(state.cumulative);
  result.metrics.trajectory = std::move(trajectory);
  result.terminated = state.terminated;
  return result;
}

}  // namespace mcmf
