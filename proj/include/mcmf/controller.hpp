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

#ifndef MCMF_CONTROLLER_HPP
#define MCMF_CONTROLLER_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "mcmf/core.hpp"

namespace mcmf {

/// What a controller sees at a period boundary.
struct PeriodContext {
  const ConstraintSet& constraints;
  const PeriodFeedback& feedback;
  double elapsed_fraction = 0.0;  // share of the campaign already replayed
  std::int64_t period = 0;
};

/// Per-period diagnostics recorded in the campaign trace.
struct PeriodReport {
  std::vector<double> errors;  // E, one entry per constraint
  double cost = 0.0;           // J over the controller's window
  bool updated = false;
};

/// A per-period bid adjustment policy. One decide() / observe() pair is
/// issued per period by the replay loop.
class BidController {
 public:
  virtual ~BidController() = default;

  virtual std::string name() const = 0;

  /// Adjustment value u for the coming period. `ctx.feedback` covers all
  /// periods replayed so far.
  virtual double decide(const PeriodContext& ctx) = 0;

  /// Feedback for the period just replayed, including its own deltas.
  virtual PeriodReport observe(const PeriodContext& ctx) = 0;
};

}  // namespace mcmf

#endif  // MCMF_CONTROLLER_HPP
