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

// Experiment driver: conditions x controllers x trials, sparsity sweeps and
// feature ablations over one bid log, with CSV and manifest output.
//
// Seeding. Trial t of an experiment draws one seed s_t = trial_seed(base_seed,
// t). The dropout mask of that trial is seeded by s_t and shared by every
// controller; an MCMF controller starts from rng_seed ^ s_t.

#ifndef MCMF_HARNESS_HPP
#define MCMF_HARNESS_HPP

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mcmf/auction_sim.hpp"
#include "mcmf/baselines.hpp"
#include "mcmf/core.hpp"
#include "mcmf/data.hpp"
#include "mcmf/mcmf_controller.hpp"

namespace mcmf {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The synthetic log used when no files are given. Predictions are
/// conservative (bias 0.09), which puts the PPC-neutral u well inside (0, 1).
SynthConfig benchmark_synth_config();

struct LogSource {
  std::vector<std::string> files;  // canonical logs, concatenated in order
  SynthConfig synthetic = benchmark_synth_config();  // used when files empty
};

enum class ControllerKind { Mcmf, Pid, Fixed };

std::string_view to_string(ControllerKind kind);
ControllerKind parse_controller_kind(std::string_view s);

struct ControllerSpec {
  ControllerKind kind = ControllerKind::Mcmf;
  std::string name;  // defaults to the kind name
  McmfConfig mcmf;
  PidConfig pid;
  double fixed_u = 1.0;

  std::string label() const;
};

enum class ConstraintMode { Single, Multi };

std::string_view to_string(ConstraintMode mode);
ConstraintMode parse_constraint_mode(std::string_view s);

/// One budget / constraint combination. The budget both stops bidding and
/// is the BUDGET target under Multi.
struct Condition {
  std::string name = "default";
  ConstraintMode mode = ConstraintMode::Single;
  Fen budget = 2000000;
};

struct ExperimentSpec {
  LogSource log;
  std::vector<ControllerSpec> controllers = default_controllers();
  std::vector<Condition> conditions = {Condition{}};
  Fen ppc_target = 1800;
  double ppc_expected = 1800.0;
  double ppc_weight = 1.0;
  double budget_weight = 1.0;
  SimConfig sim;  // budget and dropout_seed are set per condition / trial
  int trials = 1;
  std::uint64_t base_seed = 0;
  int threads = 1;
  std::vector<double> p_list = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};

  static std::vector<ControllerSpec> default_controllers();

  ConstraintSet constraints_for(const Condition& condition) const;

  /// Throws ConfigError, or IoError for missing log files.
  void validate() const;
};

/// Presets: budget 182344 (adequate) or 22793 (tight), PPC_e 1800,
/// each under Single and Multi constraints.
enum class Preset { Adequate, Tight };
void apply_preset(ExperimentSpec& spec, Preset preset);
std::string describe_condition(const ExperimentSpec& spec,
                               const Condition& condition);

/// JSON round trip. Unknown keys are rejected; absent keys keep defaults.
ExperimentSpec parse_spec(std::string_view json_text);
ExperimentSpec parse_spec_file(const std::filesystem::path& path);
std::string spec_to_json(const ExperimentSpec& spec, int indent = 2);

/// Sets one dotted key (e.g. "sim.period_records") from its text form. The
/// value is read as JSON, falling back to a bare string.
void apply_override(ExperimentSpec& spec, std::string_view key,
                    std::string_view value);

std::uint64_t trial_seed(std::uint64_t base_seed, std::uint64_t trial);

/// FNV-1a over the replayed record fields; equal streams hash equal.
std::uint64_t hash_records(std::span<const BidRecord> records);

std::vector<BidRecord> load_log(const LogSource& source);

std::unique_ptr<BidController> make_controller(const ControllerSpec& spec,
                                               const ConstraintSet& constraints,
                                               std::uint64_t trial_seed);

struct RunRecord {
  std::string condition;
  std::string controller;
  int trial = 0;
  double p = 0.0;
  std::uint64_t stream_hash = 0;
  CampaignResult result;
};

/// Every (condition, controller, trial), ordered by condition, then trial,
/// then controller, independent of the thread count.
std::vector<RunRecord> run_experiment(const ExperimentSpec& spec,
                                      std::span<const BidRecord> log);

struct SweepSummary {
  std::string condition;
  std::string controller;
  double p = 0.0;
  int trials = 0;
  double mean_conv = 0.0;
  double sd_conv = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double mean_cost = 0.0;
};

struct SweepResult {
  std::vector<RunRecord> raw;  // ordered by (condition, p, trial, controller)
  std::vector<SweepSummary> summary;
};

/// mean +- 1.96 s / sqrt(n) with the n-1 sample deviation; zero width for
/// n = 1.
SweepSummary summarize(std::span<const double> conversions,
                       std::span<const double> costs);

SweepResult sweep_sparsity(const ExperimentSpec& spec,
                           std::span<const BidRecord> log);

struct AblationRow {
  FeatureSet features = FeatureSet::FULL;
  RunRecord run;
};

/// Each MCMF controller under NG, PO, PI and FULL with identical seeds;
/// other controller kinds are skipped.
std::vector<AblationRow> run_ablation(const ExperimentSpec& spec,
                                      std::span<const BidRecord> log);

/// CSV writers. Numbers use the shortest round-trip form.
void write_metrics_csv(std::ostream& out, std::span<const RunRecord> runs);
void write_trace_csv(std::ostream& out, std::span<const RunRecord> runs);
void write_sweep_raw_csv(std::ostream& out, std::span<const RunRecord> runs);
void write_sweep_summary_csv(std::ostream& out,
                             std::span<const SweepSummary> rows);
void write_ablation_csv(std::ostream& out, std::span<const AblationRow> rows);

/// Subcommand drivers: load, run, and write outputs plus manifest.json into
/// `output_dir`. Return the files written.
std::vector<std::filesystem::path> execute_run(
    const ExperimentSpec& spec, const std::filesystem::path& output_dir);
std::vector<std::filesystem::path> execute_sweep(
    const ExperimentSpec& spec, const std::filesystem::path& output_dir);
std::vector<std::filesystem::path> execute_ablation(
    const ExperimentSpec& spec, const std::filesystem::path& output_dir);

}  // namespace mcmf

#endif  // MCMF_HARNESS_HPP
