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

// mcmf-lab: command line front end of the experiment harness.
//
// Errors go to stderr as a single line
//   error: kind=<Kind> msg="<text>"
// with exit status 2 (usage), 3 (config), 4 (data) or 5 (io).

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mcmf/harness.hpp"

namespace {

using namespace mcmf;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

int report(std::string_view kind, const std::string& what, int code) {
  std::cerr << "error: kind=" << kind
            << " msg=" << nlohmann::json(what).dump() << '\n';
  return code;
}

struct ExperimentOptions {
  std::string config;
  std::string output_dir = "out";
  std::vector<std::string> sets;
  std::vector<std::string> logs;
  std::optional<int> trials;
  std::optional<std::uint64_t> base_seed;
  std::optional<int> threads;
  bool paper_adequate = false;
  bool paper_tight = false;
  std::vector<double> p_list;
};

void add_experiment_options(CLI::App* cmd, ExperimentOptions& o,
                            int default_trials) {
  cmd->add_option("--config", o.config,
                  "JSON experiment config; keys and defaults listed below")
      ->check(CLI::ExistingFile);
  cmd->add_option("--output-dir", o.output_dir, "Directory for CSV outputs")
      ->capture_default_str();
  cmd->add_option("--set", o.sets,
                  "Override one config key, e.g. --set sim.period_records=500 "
                  "or --set controllers.0.learning_rate=0.02");
  cmd->add_option("--log", o.logs,
                  "Canonical log file (repeatable); replaces log.files");
  cmd->add_option("--trials", o.trials,
                  "Trials per condition (default " +
                      std::to_string(default_trials) + ")");
  cmd->add_option("--base-seed", o.base_seed, "Base seed (default 0)");
  cmd->add_option("--threads", o.threads, "Worker threads (default 1)");
  auto* a = cmd->add_flag("--paper-adequate", o.paper_adequate,
                          "Conditions adequate-single/-multi: budget 182344, "
                          "PPC_e 1800");
  auto* t = cmd->add_flag("--paper-tight", o.paper_tight,
                          "Conditions tight-single/-multi: budget 22793, "
                          "PPC_e 1800");
  a->excludes(t);
}

bool config_sets_trials(const std::string& path) {
  std::ifstream in(path);
  const auto j = nlohmann::json::parse(in, nullptr, false);
  return j.is_object() && j.contains("trials");
}

ExperimentSpec resolve(const ExperimentOptions& o, int default_trials) {
  ExperimentSpec spec;
  bool trials_from_config = false;
  if (!o.config.empty()) {
    spec = parse_spec_file(o.config);
    trials_from_config = config_sets_trials(o.config);
  }
  if (!trials_from_config) spec.trials = default_trials;
  if (o.paper_adequate) apply_preset(spec, Preset::Adequate);
  if (o.paper_tight) apply_preset(spec, Preset::Tight);
  if (!o.logs.empty()) spec.log.files = o.logs;
  if (o.trials) spec.trials = *o.trials;
  if (o.base_seed) spec.base_seed = *o.base_seed;
  if (o.threads) spec.threads = *o.threads;
  if (!o.p_list.empty()) spec.p_list = o.p_list;
  for (const auto& kv : o.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      throw UsageError("--set expects KEY=VALUE, got '" + kv + "'");
    }
    apply_override(spec, kv.substr(0, eq), kv.substr(eq + 1));
  }
  spec.validate();
  return spec;
}

void announce(const ExperimentSpec& spec,
              const std::vector<std::filesystem::path>& files) {
  for (const auto& c : spec.conditions) {
    std::cout << describe_condition(spec, c) << '\n';
  }
  for (const auto& f : files) std::cout << "wrote " << f.string() << '\n';
}

std::string defaults_footer() {
  return "\nConfig keys with their defaults (JSON):\n" +
         spec_to_json(ExperimentSpec{}) +
         "\nController entries take \"type\": mcmf | pid | fixed; fixed "
         "uses \"u\" (default 1). Feature sets: NG, PO, PI, FULL.\n";
}

TimestampFormat parse_ts_format(const std::string& s) {
  if (s == "epoch_ms") return TimestampFormat::EpochMillis;
  if (s == "compact") return TimestampFormat::CompactDateTime;
  throw ConfigError("unknown ts format '" + s + "'");
}

int run_cli(int argc, char** argv) {
  CLI::App app{"MCMF bid-optimization lab: auction replay, controllers, "
               "experiment sweeps"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  ExperimentOptions run_opts, sweep_opts, ablation_opts;
  auto* run = app.add_subcommand("run", "Run every controller under every condition");
  add_experiment_options(run, run_opts, 1);
  run->footer(defaults_footer());

  auto* sweep = app.add_subcommand(
      "sweep-sparsity", "Dropout sweep with per-trial raw output and 95% CIs");
  add_experiment_options(sweep, sweep_opts, 100);
  sweep->add_option("--p-list", sweep_opts.p_list,
                    "Dropout probabilities (default 0.1 ... 0.9)")
      ->delimiter(',');
  sweep->footer(defaults_footer());

  auto* ablation = app.add_subcommand(
      "ablation", "Each mcmf controller under feature sets NG, PO, PI, FULL");
  add_experiment_options(ablation, ablation_opts, 1);
  ablation->footer(defaults_footer());

  SynthConfig synth = benchmark_synth_config();
  std::string synth_out;
  auto* gen = app.add_subcommand("gen-synthetic", "Write a synthetic canonical log");
  gen->add_option("--out", synth_out, "Output CSV path")->required();
  gen->add_option("--n-records", synth.n_records)->capture_default_str();
  gen->add_option("--ctr", synth.ctr_true, "True click rate")->capture_default_str();
  gen->add_option("--cvr", synth.cvr_true, "True conversion rate given click")
      ->capture_default_str();
  gen->add_option("--price-log-mean", synth.price_log_mean,
                  "Mean of log market price (fen)")
      ->capture_default_str();
  gen->add_option("--price-log-sigma", synth.price_log_sigma)->capture_default_str();
  gen->add_option("--pctr-noise", synth.pctr_noise, "Relative prediction noise")
      ->capture_default_str();
  gen->add_option("--pcvr-noise", synth.pcvr_noise)->capture_default_str();
  gen->add_option("--pctr-bias", synth.pctr_bias, "Mean prediction / truth")
      ->capture_default_str();
  gen->add_option("--pcvr-bias", synth.pcvr_bias)->capture_default_str();
  gen->add_option("--ts-start", synth.ts_start, "First timestamp (ms)")
      ->capture_default_str();
  gen->add_option("--ts-step", synth.ts_step, "ms between records")
      ->capture_default_str();
  gen->add_option("--seed", synth.seed)->capture_default_str();

  ColumnMap map;
  std::string conv_in, conv_out, ts_format = "epoch_ms";
  std::size_t pctr_col = 0, pcvr_col = 0;
  char delimiter = ',';
  bool no_header = false;
  auto* conv = app.add_subcommand(
      "convert-ipinyou", "Map a raw delimited bid log onto the canonical schema");
  conv->add_option("--in", conv_in, "Raw log path")->required()->check(CLI::ExistingFile);
  conv->add_option("--out", conv_out, "Canonical CSV path")->required();
  conv->add_option("--ts-col", map.ts)->capture_default_str();
  auto* pc = conv->add_option("--pctr-col", pctr_col, "Column holding pCTR (required)");
  auto* pv = conv->add_option("--pcvr-col", pcvr_col, "Column holding pCVR (required)");
  conv->add_option("--price-col", map.market_price)->capture_default_str();
  conv->add_option("--click-col", map.click)->capture_default_str();
  conv->add_option("--conv-col", map.conversion)->capture_default_str();
  conv->add_option("--delimiter", delimiter, "Single-character delimiter")
      ->capture_default_str();
  conv->add_flag("--no-header", no_header, "Raw log has no header row");
  conv->add_option("--ts-format", ts_format, "epoch_ms | compact (yyyyMMddHHmmssSSS, UTC)")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report("UsageError", e.what(), 2);
  }

  if (run->parsed()) {
    const auto spec = resolve(run_opts, 1);
    announce(spec, execute_run(spec, run_opts.output_dir));
  } else if (sweep->parsed()) {
    const auto spec = resolve(sweep_opts, 100);
    announce(spec, execute_sweep(spec, sweep_opts.output_dir));
  } else if (ablation->parsed()) {
    const auto spec = resolve(ablation_opts, 1);
    announce(spec, execute_ablation(spec, ablation_opts.output_dir));
  } else if (gen->parsed()) {
    synth.validate();
    std::ofstream out(synth_out, std::ios::binary);
    if (!out) throw IoError("cannot open " + synth_out + " for writing");
    write_canonical_header(out);
    SyntheticGenerator g(synth);
    while (auto rec = g.next()) write_canonical_row(out, *rec);
    if (!out.flush()) throw IoError("write failed: " + synth_out);
    std::cout << "wrote " << synth.n_records << " records to " << synth_out << '\n';
  } else if (conv->parsed()) {
    if (pc->count() > 0) map.pctr = pctr_col;
    if (pv->count() > 0) map.pcvr = pcvr_col;
    map.delimiter = delimiter;
    map.has_header = !no_header;
    map.ts_format = parse_ts_format(ts_format);
    std::ifstream in(conv_in, std::ios::binary);
    if (!in) throw IoError("cannot read " + conv_in);
    std::ofstream out(conv_out, std::ios::binary);
    if (!out) throw IoError("cannot open " + conv_out + " for writing");
    const auto rows = convert_ipinyou(in, map, out);
    if (!out.flush()) throw IoError("write failed: " + conv_out);
    std::cout << "wrote " << rows << " records to " << conv_out << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const UsageError& e) {
    return report("UsageError", e.what(), 2);
  } catch (const ConfigError& e) {
    return report("ConfigError", e.what(), 3);
  } catch (const DataError& e) {
    return report(std::string("DataError.") + std::string(to_string(e.kind())),
                  e.what(), 4);
  } catch (const IoError& e) {
    return report("IoError", e.what(), 5);
  } catch (const std::exception& e) {
    return report("InternalError", e.what(), 1);
  }
}
