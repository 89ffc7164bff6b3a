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

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "mcmf/baselines.hpp"
#include "mcmf/data.hpp"
#include "mcmf/mcmf_controller.hpp"

namespace mcmf {
namespace {

BidRecord rec(std::int64_t ts, double pctr, double pcvr, Fen price,
              bool click = false, bool conv = false) {
  return {ts, pctr, pcvr, price, click, conv};
}

TEST(ResolveAuction, SecondPrice) {
  const auto o = resolve_auction(rec(0, 0, 0, 70), 100.0, 1000);
  EXPECT_EQ(o.kind, Outcome::Win);
  EXPECT_EQ(o.cost, 70);
}

TEST(ResolveAuction, TieLoses) {
  EXPECT_EQ(resolve_auction(rec(0, 0, 0, 70), 70.0, 1000).kind, Outcome::Lose);
}

TEST(ResolveAuction, SpentBudgetTerminates) {
  EXPECT_EQ(resolve_auction(rec(0, 0, 0, 1), 1e9, 0).kind, Outcome::Terminated);
  EXPECT_EQ(resolve_auction(rec(0, 0, 0, 1), 1e9, -5).kind, Outcome::Terminated);
}

TEST(RunPeriod, EmptyBatch) {
  SimState st;
  st.budget = 100;
  const auto fb = run_period({}, 1.0, ConstraintSet::single(1800, 1800), st);
  EXPECT_EQ(fb.period, FeedbackCounters{});
  EXPECT_EQ(fb.cumulative, FeedbackCounters{});
}

TEST(RunPeriod, ZeroBidsNeverWin) {
  std::vector<BidRecord> batch = {rec(0, 0.0, 0.3, 0), rec(1, 0.2, 0.0, 5)};
  SimState st;
  st.budget = 100;
  const auto fb = run_period(batch, 1.0, ConstraintSet::single(1800, 1800), st);
  EXPECT_EQ(fb.period.impressions, 0);
  EXPECT_EQ(fb.period.cost, 0);
  EXPECT_EQ(fb.period.bids_participated, 2);
}

TEST(RunPeriod, ThreeRecordHandReplay) {
  // ecpm = 1000 * pctr * pcvr * 1800: 225000 (tie), 112500, 112500
  std::vector<BidRecord> batch = {rec(0, 0.5, 0.25, 225000, true, true),
                                  rec(1, 0.125, 0.5, 100000, true, false),
                                  rec(2, 0.25, 0.25, 112499, true, true)};
  SimState st;
  st.budget = 1'000'000;
  const auto fb = run_period(batch, 1.0, ConstraintSet::single(1800, 1800), st);
  EXPECT_EQ(fb.period.bids_participated, 3);
  EXPECT_EQ(fb.period.impressions, 2);
  EXPECT_EQ(fb.period.clicks, 2);
  EXPECT_EQ(fb.period.conversions, 1);
  EXPECT_EQ(fb.period.cost, 212499);
  EXPECT_DOUBLE_EQ(fb.period.sum_pctr, 0.875);
  EXPECT_DOUBLE_EQ(fb.period.sum_pcvr, 1.0);
  EXPECT_EQ(fb.cumulative, fb.period);
  EXPECT_FALSE(st.terminated);
}

TEST(RunCampaign, EmptyLog) {
  FixedController f(1.0);
  SimConfig sim;
  sim.budget = 100;
  const auto r = run_campaign({}, f, ConstraintSet::single(1800, 1800), sim);
  EXPECT_TRUE(r.trace.empty());
  EXPECT_EQ(r.metrics.imp, 0);
  EXPECT_EQ(r.metrics.cost, 0);
  EXPECT_FALSE(r.metrics.ppc);
}

TEST(RunCampaign, ZeroBudgetTerminatesImmediately) {
  SynthConfig sc;
  sc.n_records = 500;
  const auto log = generate_synthetic(sc);
  FixedController f(1.0);
  SimConfig sim;
  sim.budget = 0;
  std::vector<Outcome> outcomes;
  const auto r = run_campaign(
      log, f, ConstraintSet::single(1800, 1800), sim,
      [&](std::size_t, const BidRecord&, double, const AuctionOutcome& o) {
        outcomes.push_back(o.kind);
      });
  EXPECT_TRUE(r.terminated);
  EXPECT_EQ(r.metrics.cost, 0);
  ASSERT_FALSE(outcomes.empty());
  EXPECT_EQ(outcomes.front(), Outcome::Terminated);
  EXPECT_EQ(r.trace.size(), 1u);
}

TEST(RunCampaign, TenRecordHandReplay) {
  // Fixed u = 1, PPC_e = 1000: ecpm = 1e6 * pctr * pcvr.
  std::vector<BidRecord> log = {
      rec(0, 0.5, 0.5, 200000, true, true),   // 250000 > 200000 win
      rec(1, 0.25, 0.0625, 15625),            // 15625 tie lose
      rec(2, 0.2, 0.5, 50000, true),          // 100000 win
      rec(3, 0.01, 0.5, 6000),                // 5000 lose
      rec(4, 0.25, 0.25, 62499, true, true),  // 62500 win
      rec(5, 0.0, 0.5, 0),                    // 0 tie lose
      rec(6, 1.0, 0.125, 100000),             // 125000 win
      rec(7, 0.5, 0.125, 70000, true),        // 62500 lose
      rec(8, 0.75, 0.5, 1, true, true),       // 375000, terminated
      rec(9, 0.3, 0.3, 80000, true, true),    // never reached
  };
  const auto cs = ConstraintSet::single(1000, 1000);
  SimConfig sim;
  sim.budget = 400000;
  sim.period_records = 3;
  FixedController f(1.0);
  const auto r = run_campaign(log, f, cs, sim);
  // wins 0,2,4,6 cost 200000+50000+62499+100000 = 412499 crosses the budget
  // on record 6, so 7 and 8 are terminated and the replay stops
  EXPECT_EQ(r.metrics.imp, 4);
  EXPECT_EQ(r.metrics.clk, 3);
  EXPECT_EQ(r.metrics.conv, 2);
  EXPECT_EQ(r.metrics.cost, 412499);
  EXPECT_TRUE(r.terminated);
  ASSERT_EQ(r.trace.size(), 3u);
  EXPECT_EQ(r.trace[0].cost, 250000);
  EXPECT_EQ(r.trace[1].cost, 312499);
  EXPECT_EQ(r.trace[2].cost, 412499);
  EXPECT_EQ(r.trace[2].imp, 4);
  EXPECT_EQ(r.metrics.trajectory.size(), 3u);
  EXPECT_EQ(r.metrics.trajectory[1].conversions, 2);
}

TEST(RunCampaign, WallClockPeriods) {
  std::vector<BidRecord> log = {rec(0, 0.1, 0.1, 1), rec(50, 0.1, 0.1, 1),
                                rec(100, 0.1, 0.1, 1), rec(350, 0.1, 0.1, 1),
                                rec(399, 0.1, 0.1, 1)};
  SimConfig sim;
  sim.budget = 1000;
  sim.period_mode = PeriodMode::WallClock;
  sim.period_ms = 100;
  std::vector<double> elapsed;
  struct Probe final : BidController {
    std::vector<double>* seen;
    std::string name() const override { return "probe"; }
    double decide(const PeriodContext&) override { return 1.0; }
    PeriodReport observe(const PeriodContext& ctx) override {
      seen->push_back(ctx.elapsed_fraction);
      return {};
    }
  } probe;
  probe.seen = &elapsed;
  const auto r = run_campaign(log, probe, ConstraintSet::single(1800, 1800), sim);
  // windows [0,100) [100,200) [300,400); the empty window is skipped
  ASSERT_EQ(r.trace.size(), 3u);
  EXPECT_EQ(r.trace[0].imp, 2);
  EXPECT_EQ(r.trace[1].imp, 3);
  EXPECT_EQ(r.trace[2].imp, 5);
  EXPECT_NEAR(elapsed[0], 100.0 / 400.0, 1e-12);
  EXPECT_NEAR(elapsed[1], 350.0 / 400.0, 1e-12);
  EXPECT_EQ(elapsed[2], 1.0);
}

TEST(Dropout, Identity) {
  SynthConfig sc;
  sc.n_records = 1000;
  const auto log = generate_synthetic(sc);
  EXPECT_EQ(apply_dropout(log, 0.0, 3), log);
  EXPECT_TRUE(apply_dropout(log, 1.0, 3).empty());
  EXPECT_THROW(apply_dropout(log, 1.5, 3), ConfigError);
}

TEST(Dropout, BinomialAndReproducible) {
  SynthConfig sc;
  sc.n_records = 10000;
  const auto log = generate_synthetic(sc);
  const auto a = apply_dropout(log, 0.5, 99);
  const auto b = apply_dropout(log, 0.5, 99);
  EXPECT_EQ(a, b);
  EXPECT_LE(std::abs(static_cast<double>(a.size()) - 5000.0), 3.0 * 50.0);
  EXPECT_NE(apply_dropout(log, 0.5, 100), a);
}

TEST(Dropout, CampaignUsesConfiguredMask) {
  SynthConfig sc;
  sc.n_records = 4000;
  const auto log = generate_synthetic(sc);
  SimConfig sim;
  sim.budget = 1LL << 40;
  sim.dropout_p = 0.3;
  sim.dropout_seed = 12;
  FixedController f(1.0);
  std::size_t seen = 0;
  run_campaign(log, f, ConstraintSet::single(1800, 1800), sim,
               [&](std::size_t, const BidRecord&, double, const AuctionOutcome&) {
                 ++seen;
               });
  EXPECT_EQ(seen, apply_dropout(log, 0.3, 12).size());
}

// Property sweep: budget safety, exact cost accounting, second-price bound and
// funnel ordering on random campaigns.
TEST(Invariants, RandomCampaigns) {
  std::mt19937_64 rng(2024);
  for (int run = 0; run < 60; ++run) {
    SynthConfig sc;
    sc.n_records = 3000;
    sc.seed = rng();
    sc.pctr_bias = 0.1 + 0.9 * std::uniform_real_distribution<>(0, 1)(rng);
    sc.pcvr_bias = sc.pctr_bias;
    const auto log = generate_synthetic(sc);
    Fen max_price = 0;
    for (const auto& r : log) max_price = std::max(max_price, r.market_price);

    SimConfig sim;
    sim.budget = std::uniform_int_distribution<Fen>(0, 200000)(rng);
    sim.period_records = std::uniform_int_distribution<int>(1, 500)(rng);
    const auto cs = ConstraintSet::multi(1800, std::max<Fen>(sim.budget, 1), 1800);
    std::unique_ptr<BidController> c;
    switch (run % 3) {
      case 0: c = std::make_unique<FixedController>(1.0); break;
      case 1: c = std::make_unique<PidController>(PidConfig{}); break;
      default: {
        McmfConfig m;
        m.rng_seed = static_cast<std::uint64_t>(run);
        c = std::make_unique<McmfController>(m, cs);
      }
    }
    Fen paid = 0;
    bool terminated = false;
    int wins_after = 0;
    const auto r = run_campaign(
        log, *c, cs, sim,
        [&](std::size_t, const BidRecord& b, double ecpm, const AuctionOutcome& o) {
          if (o.kind == Outcome::Terminated) terminated = true;
          if (o.kind == Outcome::Win) {
            if (terminated) ++wins_after;
            paid += o.cost;
            EXPECT_EQ(o.cost, b.market_price);
            EXPECT_LE(static_cast<double>(o.cost), ecpm);
          }
        });
    EXPECT_LE(r.metrics.cost, sim.budget + max_price);
    EXPECT_EQ(wins_after, 0);
    EXPECT_EQ(r.metrics.cost, paid);
    std::int64_t prev_conv = 0;
    Fen prev_cost = 0;
    for (const auto& row : r.trace) {
      EXPECT_GE(row.imp, row.clk);
      EXPECT_GE(row.clk, row.conv);
      EXPECT_GE(row.conv, prev_conv);
      EXPECT_GE(row.cost, prev_cost);
      prev_conv = row.conv;
      prev_cost = row.cost;
    }
  }
}

TEST(SimConfig, Validation) {
  SimConfig s;
  s.budget = -1;
  EXPECT_THROW(s.validate(), ConfigError);
  s = SimConfig{};
  s.dropout_p = 2.0;
  EXPECT_THROW(s.validate(), ConfigError);
  s = SimConfig{};
  s.period_records = 0;
  EXPECT_THROW(s.validate(), ConfigError);
  EXPECT_EQ(parse_period_mode("wall_clock"), PeriodMode::WallClock);
  EXPECT_THROW(parse_period_mode("hourly"), ConfigError);
}

}  // namespace
}  // namespace mcmf
