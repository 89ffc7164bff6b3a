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

#include "mcmf/harness.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace mcmf {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string fmt(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

// ---- JSON mapping -------------------------------------------------------

// Reads `key` from `obj` into `out` if present and marks it consumed.
class Reader {
 public:
  Reader(const json& obj, std::string where) : obj_(obj), where_(std::move(where)) {
    if (!obj_.is_object()) throw ConfigError(where_ + ": expected an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    auto it = obj_.find(key);
    if (it == obj_.end()) return;
    seen_.insert(key);
    try {
      out = it->template get<T>();
    } catch (const json::exception&) {
      throw ConfigError(where_ + "." + key + ": wrong type");
    }
  }

  template <typename Enum>
  void get_enum(const char* key, Enum& out,
                Enum (*parse)(std::string_view)) {
    if (!obj_.contains(key)) return;
    std::string s;
    get(key, s);
    out = parse(s);
  }

  const json* child(const char* key) {
    auto it = obj_.find(key);
    if (it == obj_.end()) return nullptr;
    seen_.insert(key);
    return &*it;
  }

  void finish() const {
    for (const auto& [k, v] : obj_.items()) {
      if (!seen_.count(k)) throw ConfigError(where_ + ": unknown key '" + k + "'");
    }
  }

 private:
  const json& obj_;
  std::string where_;
  std::set<std::string> seen_;
};

json to_json(const SynthConfig& c) {
  return {{"n_records", c.n_records},       {"ctr_true", c.ctr_true},
          {"cvr_true", c.cvr_true},         {"price_log_mean", c.price_log_mean},
          {"price_log_sigma", c.price_log_sigma},
          {"pctr_noise", c.pctr_noise},     {"pcvr_noise", c.pcvr_noise},
          {"pctr_bias", c.pctr_bias},       {"pcvr_bias", c.pcvr_bias},
          {"ts_start", c.ts_start},         {"ts_step", c.ts_step},
          {"seed", c.seed}};
}

void from_json_into(const json& j, SynthConfig& c, const std::string& where) {
  Reader r(j, where);
  r.get("n_records", c.n_records);
  r.get("ctr_true", c.ctr_true);
  r.get("cvr_true", c.cvr_true);
  r.get("price_log_mean", c.price_log_mean);
  r.get("price_log_sigma", c.price_log_sigma);
  r.get("pctr_noise", c.pctr_noise);
  r.get("pcvr_noise", c.pcvr_noise);
  r.get("pctr_bias", c.pctr_bias);
  r.get("pcvr_bias", c.pcvr_bias);
  r.get("ts_start", c.ts_start);
  r.get("ts_step", c.ts_step);
  r.get("seed", c.seed);
  r.finish();
}

json to_json(const McmfConfig& c) {
  return {{"hidden_dim", c.hidden_dim},
          {"learning_rate", c.learning_rate},
          {"window", c.window},
          {"control_weight", c.control_weight},
          {"output_scale", c.output_scale},
          {"feature_set", to_string(c.feature_set)},
          {"budget_error_mode", to_string(c.budget_error_mode)},
          {"feedback_signal", to_string(c.feedback_signal)},
          {"encoder_init_scale", c.encoder_init_scale},
          {"decision_init_scale", c.decision_init_scale},
          {"rng_seed", c.rng_seed}};
}

json to_json(const PidConfig& c) {
  return {{"kp", c.kp},         {"ki", c.ki},         {"kd", c.kd},
          {"u_min", c.u_min},   {"u_max", c.u_max},   {"u_init", c.u_init},
          {"integral_clamp", c.integral_clamp}};
}

json to_json(const ControllerSpec& c) {
  json j = {{"type", to_string(c.kind)}, {"name", c.label()}};
  switch (c.kind) {
    case ControllerKind::Mcmf: j.update(to_json(c.mcmf)); break;
    case ControllerKind::Pid: j.update(to_json(c.pid)); break;
    case ControllerKind::Fixed: j["u"] = c.fixed_u; break;
  }
  return j;
}

ControllerSpec controller_from_json(const json& j, const std::string& where) {
  Reader r(j, where);
  ControllerSpec c;
  r.get_enum("type", c.kind, parse_controller_kind);
  r.get("name", c.name);
  switch (c.kind) {
    case ControllerKind::Mcmf: {
      auto& m = c.mcmf;
      r.get("hidden_dim", m.hidden_dim);
      r.get("learning_rate", m.learning_rate);
      r.get("window", m.window);
      r.get("control_weight", m.control_weight);
      r.get("output_scale", m.output_scale);
      r.get_enum("feature_set", m.feature_set, parse_feature_set);
      r.get_enum("budget_error_mode", m.budget_error_mode,
                 parse_budget_error_mode);
      r.get_enum("feedback_signal", m.feedback_signal, parse_feedback_signal);
      r.get("encoder_init_scale", m.encoder_init_scale);
      r.get("decision_init_scale", m.decision_init_scale);
      r.get("rng_seed", m.rng_seed);
      break;
    }
    case ControllerKind::Pid: {
      auto& p = c.pid;
      r.get("kp", p.kp);
      r.get("ki", p.ki);
      r.get("kd", p.kd);
      r.get("u_min", p.u_min);
      r.get("u_max", p.u_max);
      r.get("u_init", p.u_init);
      r.get("integral_clamp", p.integral_clamp);
      break;
    }
    case ControllerKind::Fixed:
      r.get("u", c.fixed_u);
      break;
  }
  r.finish();
  return c;
}

json to_json(const ExperimentSpec& s) {
  json log;
  if (s.log.files.empty()) {
    log["synthetic"] = to_json(s.log.synthetic);
  } else {
    log["files"] = s.log.files;
  }
  json controllers = json::array();
  for (const auto& c : s.controllers) controllers.push_back(to_json(c));
  json conditions = json::array();
  for (const auto& c : s.conditions) {
    conditions.push_back({{"name", c.name},
                          {"constraints", to_string(c.mode)},
                          {"budget", c.budget}});
  }
  return {{"log", log},
          {"controllers", controllers},
          {"conditions", conditions},
          {"ppc_target", s.ppc_target},
          {"ppc_expected", s.ppc_expected},
          {"ppc_weight", s.ppc_weight},
          {"budget_weight", s.budget_weight},
          {"sim",
           {{"period_mode", to_string(s.sim.period_mode)},
            {"period_records", s.sim.period_records},
            {"period_ms", s.sim.period_ms},
            {"dropout_p", s.sim.dropout_p}}},
          {"trials", s.trials},
          {"base_seed", s.base_seed},
          {"threads", s.threads},
          {"p_list", s.p_list}};
}

ExperimentSpec spec_from_json(const json& j) {
  ExperimentSpec s;
  Reader r(j, "config");
  if (const json* log = r.child("log")) {
    Reader lr(*log, "config.log");
    lr.get("files", s.log.files);
    if (const json* syn = lr.child("synthetic")) {
      from_json_into(*syn, s.log.synthetic, "config.log.synthetic");
    }
    lr.finish();
  }
  if (const json* cs = r.child("controllers")) {
    if (!cs->is_array()) throw ConfigError("config.controllers: expected a list");
    s.controllers.clear();
    for (std::size_t i = 0; i < cs->size(); ++i) {
      s.controllers.push_back(controller_from_json(
          (*cs)[i], "config.controllers[" + std::to_string(i) + "]"));
    }
  }
  if (const json* cs = r.child("conditions")) {
    if (!cs->is_array()) throw ConfigError("config.conditions: expected a list");
    s.conditions.clear();
    for (std::size_t i = 0; i < cs->size(); ++i) {
      Reader cr((*cs)[i], "config.conditions[" + std::to_string(i) + "]");
      Condition c;
      cr.get("name", c.name);
      cr.get_enum("constraints", c.mode, parse_constraint_mode);
      cr.get("budget", c.budget);
      cr.finish();
      s.conditions.push_back(std::move(c));
    }
  }
  r.get("ppc_target", s.ppc_target);
  r.get("ppc_expected", s.ppc_expected);
  r.get("ppc_weight", s.ppc_weight);
  r.get("budget_weight", s.budget_weight);
  if (const json* sim = r.child("sim")) {
    Reader sr(*sim, "config.sim");
    sr.get_enum("period_mode", s.sim.period_mode, parse_period_mode);
    sr.get("period_records", s.sim.period_records);
    sr.get("period_ms", s.sim.period_ms);
    sr.get("dropout_p", s.sim.dropout_p);
    sr.finish();
  }
  r.get("trials", s.trials);
  r.get("base_seed", s.base_seed);
  r.get("threads", s.threads);
  r.get("p_list", s.p_list);
  r.child("command");  // written by manifests, informational
  r.finish();
  return s;
}

// ---- execution -------------------------------------------------------------

// Runs fn(i) for i in [0, n) on up to `threads` workers.
void parallel_for(std::size_t n, int threads,
                  const std::function<void(std::size_t)>& fn) {
  const auto workers = std::min<std::size_t>(
      n, static_cast<std::size_t>(std::max(threads, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::jthread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  pool.clear();
  if (error) std::rethrow_exception(error);
}

RunRecord run_one(const ExperimentSpec& spec, const Condition& condition,
                  const ControllerSpec& controller, int trial, double p,
                  std::span<const BidRecord> log) {
  const std::uint64_t seed = trial_seed(spec.base_seed, static_cast<std::uint64_t>(trial));
  std::vector<BidRecord> thinned;
  if (p > 0.0) {
    thinned = apply_dropout(log, p, seed);
    log = thinned;
  }
  const ConstraintSet constraints = spec.constraints_for(condition);
  auto ctrl = make_controller(controller, constraints, seed);

  SimConfig sim = spec.sim;
  sim.budget = condition.budget;
  sim.dropout_p = 0.0;  // already applied, shared across controllers
  RunRecord rec;
  rec.condition = condition.name;
  rec.controller = controller.label();
  rec.trial = trial;
  rec.p = p;
  rec.stream_hash = hash_records(log);
  rec.result = run_campaign(log, *ctrl, constraints, sim);
  return rec;
}

std::vector<fs::path> write_files(
    const fs::path& dir,
    const std::vector<std::pair<std::string, std::function<void(std::ostream&)>>>& files) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  std::vector<fs::path> written;
  for (const auto& [name, body] : files) {
    const fs::path path = dir / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    body(out);
    out.flush();
    if (!out) throw IoError("write failed: " + path.string());
    written.push_back(path);
  }
  return written;
}

std::function<void(std::ostream&)> manifest_writer(const ExperimentSpec& spec,
                                                   std::string_view command) {
  return [&spec, command](std::ostream& out) {
    json j = to_json(spec);
    j["command"] = std::string(command);
    out << j.dump(2) << '\n';
  };
}

void write_metrics_row_prefix(std::ostream& out, const RunRecord& r) {
  out << r.condition << ',' << r.controller << ',' << r.trial;
}

void write_metric_columns(std::ostream& out, const CampaignMetrics& m) {
  out << ',' << m.imp << ',' << m.clk << ',' << m.conv << ',' << m.cost << ','
      << (m.ppc ? fmt(*m.ppc) : std::string());
}

}  // namespace

SynthConfig benchmark_synth_config() {
  SynthConfig c;
  c.n_records = 200000;
  c.ctr_true = 0.1;
  c.cvr_true = 0.1;
  c.price_log_mean = 3.0;
  c.price_log_sigma = 0.5;
  c.pctr_noise = 0.3;
  c.pcvr_noise = 0.3;
  c.pctr_bias = 0.09;
  c.pcvr_bias = 0.09;
  c.seed = 1;
  return c;
}

std::string_view to_string(ControllerKind kind) {
  switch (kind) {
    case ControllerKind::Mcmf: return "mcmf";
    case ControllerKind::Pid: return "pid";
    case ControllerKind::Fixed: return "fixed";
  }
  return "?";
}

ControllerKind parse_controller_kind(std::string_view s) {
  for (auto k : {ControllerKind::Mcmf, ControllerKind::Pid, ControllerKind::Fixed}) {
    if (s == to_string(k)) return k;
  }
  throw ConfigError("unknown controller type '" + std::string(s) + "'");
}

std::string ControllerSpec::label() const {
  return name.empty() ? std::string(to_string(kind)) : name;
}

std::string_view to_string(ConstraintMode mode) {
  return mode == ConstraintMode::Multi ? "multi" : "single";
}

ConstraintMode parse_constraint_mode(std::string_view s) {
  if (s == "single") return ConstraintMode::Single;
  if (s == "multi") return ConstraintMode::Multi;
  throw ConfigError("unknown constraint mode '" + std::string(s) + "'");
}

std::vector<ControllerSpec> ExperimentSpec::default_controllers() {
  ControllerSpec mcmf;
  ControllerSpec pid;
  pid.kind = ControllerKind::Pid;
  return {mcmf, pid};
}

ConstraintSet ExperimentSpec::constraints_for(const Condition& c) const {
  if (c.mode == ConstraintMode::Multi) {
    return ConstraintSet::multi(ppc_target, c.budget, ppc_expected, ppc_weight,
                                budget_weight);
  }
  return ConstraintSet::single(ppc_target, ppc_expected, ppc_weight);
}

void ExperimentSpec::validate() const {
  if (trials < 1) throw ConfigError("trials must be >= 1");
  if (threads < 1) throw ConfigError("threads must be >= 1");
  if (controllers.empty()) throw ConfigError("no controllers configured");
  if (conditions.empty()) throw ConfigError("no conditions configured");
  std::set<std::string> names;
  for (const auto& c : controllers) {
    if (!names.insert(c.label()).second) {
      throw ConfigError("duplicate controller name '" + c.label() + "'");
    }
    switch (c.kind) {
      case ControllerKind::Mcmf: c.mcmf.validate(); break;
      case ControllerKind::Pid: c.pid.validate(); break;
      case ControllerKind::Fixed:
        if (!(c.fixed_u > 0.0)) throw ConfigError("fixed: u must be > 0");
        break;
    }
  }
  names.clear();
  for (const auto& c : conditions) {
    if (!names.insert(c.name).second) {
      throw ConfigError("duplicate condition name '" + c.name + "'");
    }
    if (c.budget < 0) throw ConfigError("condition budget must be >= 0");
    if (c.mode == ConstraintMode::Multi && c.budget == 0) {
      throw ConfigError("multi condition needs a positive budget");
    }
    (void)constraints_for(c);
  }
  sim.validate();
  for (double p : p_list) {
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("p_list entries must be in [0,1]");
  }
  if (log.files.empty()) {
    log.synthetic.validate();
  }
  for (const auto& f : log.files) {
    if (!fs::exists(f)) throw IoError("log file not found: " + f);
  }
}

void apply_preset(ExperimentSpec& spec, Preset preset) {
  const Fen budget = preset == Preset::Adequate ? 182344 : 22793;
  const std::string tag = preset == Preset::Adequate ? "adequate" : "tight";
  spec.ppc_expected = 1800.0;
  spec.ppc_target = 1800;
  spec.conditions = {{tag + "-single", ConstraintMode::Single, budget},
                     {tag + "-multi", ConstraintMode::Multi, budget}};
}

std::string describe_condition(const ExperimentSpec& spec,
                               const Condition& c) {
  return "condition " + c.name + ": constraints=" +
         std::string(to_string(c.mode)) + " budget=" + std::to_string(c.budget) +
         " ppc_e=" + fmt(spec.ppc_expected) +
         " ppc_target=" + std::to_string(spec.ppc_target);
}

ExperimentSpec parse_spec(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return spec_from_json(j);
}

ExperimentSpec parse_spec_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_spec(ss.str());
}

std::string spec_to_json(const ExperimentSpec& spec, int indent) {
  return to_json(spec).dump(indent);
}

void apply_override(ExperimentSpec& spec, std::string_view key,
                    std::string_view value) {
  json parsed;
  try {
    parsed = json::parse(value);
  } catch (const json::parse_error&) {
    parsed = std::string(value);
  }
  json j = to_json(spec);
  json::json_pointer ptr;
  std::string path;
  for (char c : key) path += c == '.' ? '/' : c;
  try {
    ptr = json::json_pointer("/" + path);
  } catch (const json::exception&) {
    throw ConfigError("bad override key '" + std::string(key) + "'");
  }
  if (!j.contains(ptr)) {
    throw ConfigError("unknown override key '" + std::string(key) + "'");
  }
  j[ptr] = parsed;
  spec = spec_from_json(j);
}

std::uint64_t trial_seed(std::uint64_t base_seed, std::uint64_t trial) {
  // splitmix64 finalizer over the pair
  std::uint64_t z = base_seed + (trial + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t hash_records(std::span<const BidRecord> records) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& r : records) {
    mix(&r.ts, sizeof r.ts);
    mix(&r.pctr, sizeof r.pctr);
    mix(&r.pcvr, sizeof r.pcvr);
    mix(&r.market_price, sizeof r.market_price);
    const unsigned char labels = (r.click ? 1 : 0) | (r.conversion ? 2 : 0);
    mix(&labels, 1);
  }
  return h;
}

std::vector<BidRecord> load_log(const LogSource& source) {
  if (source.files.empty()) return generate_synthetic(source.synthetic);
  std::vector<BidRecord> out;
  for (const auto& file : source.files) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw IoError("cannot read log " + file);
    CanonicalReader reader(in);
    while (auto rec = reader.next()) {
      if (!out.empty() && rec->ts < out.back().ts) {
        throw DataError(DataError::Kind::NonMonotonicTimestamp, reader.line(),
                        file + " goes back in time relative to the previous file");
      }
      out.push_back(*rec);
    }
  }
  return out;
}

std::unique_ptr<BidController> make_controller(const ControllerSpec& spec,
                                               const ConstraintSet& constraints,
                                               std::uint64_t seed) {
  switch (spec.kind) {
    case ControllerKind::Mcmf: {
      McmfConfig cfg = spec.mcmf;
      cfg.rng_seed ^= seed;
      return std::make_unique<McmfController>(cfg, constraints, spec.label());
    }
    case ControllerKind::Pid:
      return std::make_unique<PidController>(spec.pid, spec.label());
    case ControllerKind::Fixed:
      return std::make_unique<FixedController>(spec.fixed_u, spec.label());
  }
  throw ConfigError("unknown controller kind");
}

std::vector<RunRecord> run_experiment(const ExperimentSpec& spec,
                                      std::span<const BidRecord> log) {
  spec.validate();
  const std::size_t nc = spec.controllers.size();
  const std::size_t nt = static_cast<std::size_t>(spec.trials);
  std::vector<RunRecord> out(spec.conditions.size() * nt * nc);
  parallel_for(out.size(), spec.threads, [&](std::size_t i) {
    const std::size_t k = i % nc;
    const std::size_t t = (i / nc) % nt;
    const std::size_t c = i / (nc * nt);
    out[i] = run_one(spec, spec.conditions[c], spec.controllers[k],
                     static_cast<int>(t), spec.sim.dropout_p, log);
  });
  return out;
}

SweepSummary summarize(std::span<const double> conversions,
                       std::span<const double> costs) {
  SweepSummary s;
  const auto n = conversions.size();
  s.trials = static_cast<int>(n);
  if (n == 0) return s;
  const double dn = static_cast<double>(n);
  s.mean_conv = std::accumulate(conversions.begin(), conversions.end(), 0.0) / dn;
  s.mean_cost = std::accumulate(costs.begin(), costs.end(), 0.0) / dn;
  if (n > 1) {
    double ss = 0.0;
    for (double c : conversions) ss += (c - s.mean_conv) * (c - s.mean_conv);
    s.sd_conv = std::sqrt(ss / (dn - 1.0));
  }
  const double half = 1.96 * s.sd_conv / std::sqrt(dn);
  s.ci_low = s.mean_conv - half;
  s.ci_high = s.mean_conv + half;
  return s;
}

SweepResult sweep_sparsity(const ExperimentSpec& spec,
                           std::span<const BidRecord> log) {
  spec.validate();
  const std::size_t nc = spec.controllers.size();
  const std::size_t nt = static_cast<std::size_t>(spec.trials);
  const std::size_t np = spec.p_list.size();
  SweepResult result;
  result.raw.resize(spec.conditions.size() * np * nt * nc);
  parallel_for(result.raw.size(), spec.threads, [&](std::size_t i) {
    const std::size_t k = i % nc;
    const std::size_t t = (i / nc) % nt;
    const std::size_t p = (i / (nc * nt)) % np;
    const std::size_t c = i / (nc * nt * np);
    result.raw[i] = run_one(spec, spec.conditions[c], spec.controllers[k],
                            static_cast<int>(t), spec.p_list[p], log);
  });

  for (std::size_t c = 0; c < spec.conditions.size(); ++c) {
    for (std::size_t p = 0; p < np; ++p) {
      for (std::size_t k = 0; k < nc; ++k) {
        std::vector<double> conv, cost;
        for (std::size_t t = 0; t < nt; ++t) {
          const auto& r = result.raw[((c * np + p) * nt + t) * nc + k];
          conv.push_back(static_cast<double>(r.result.metrics.conv));
          cost.push_back(static_cast<double>(r.result.metrics.cost));
        }
        SweepSummary s = summarize(conv, cost);
        s.condition = spec.conditions[c].name;
        s.controller = spec.controllers[k].label();
        s.p = spec.p_list[p];
        result.summary.push_back(std::move(s));
      }
    }
  }
  return result;
}

std::vector<AblationRow> run_ablation(const ExperimentSpec& spec,
                                      std::span<const BidRecord> log) {
  spec.validate();
  // Only mcmf entries have feature sets; pid and fixed entries are skipped.
  std::vector<const ControllerSpec*> ablated;
  for (const auto& c : spec.controllers) {
    if (c.kind == ControllerKind::Mcmf) ablated.push_back(&c);
  }
  if (ablated.empty()) throw ConfigError("ablation needs at least one mcmf controller");
  constexpr std::array kSets = {FeatureSet::NG, FeatureSet::PO, FeatureSet::PI,
                                FeatureSet::FULL};
  ExperimentSpec variant = spec;
  variant.controllers.clear();
  for (const auto* c : ablated) {
    for (auto f : kSets) {
      ControllerSpec v = *c;
      v.mcmf.feature_set = f;
      v.name = c->label() + "/" + std::string(to_string(f));
      variant.controllers.push_back(std::move(v));
    }
  }
  auto runs = run_experiment(variant, log);
  std::vector<AblationRow> rows;
  rows.reserve(runs.size());
  for (std::size_t i = 0; i < runs.size(); ++i) {
    AblationRow row;
    row.features = kSets[i % kSets.size()];
    row.run = std::move(runs[i]);
    row.run.controller = ablated[(i / kSets.size()) % ablated.size()]->label();
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_metrics_csv(std::ostream& out, std::span<const RunRecord> runs) {
  out << "condition,controller,trial,imp,clk,conv,cost,ppc\n";
  for (const auto& r : runs) {
    write_metrics_row_prefix(out, r);
    write_metric_columns(out, r.result.metrics);
    out << '\n';
  }
}

void write_trace_csv(std::ostream& out, std::span<const RunRecord> runs) {
  out << "condition,controller,trial,period,u,e_ppc,e_budget,j,conv,cost\n";
  for (const auto& r : runs) {
    for (const auto& row : r.result.trace) {
      write_metrics_row_prefix(out, r);
      out << ',' << row.period << ',' << fmt(row.u) << ','
          << (row.errors.size() > 0 ? fmt(row.errors[0]) : std::string()) << ','
          << (row.errors.size() > 1 ? fmt(row.errors[1]) : std::string()) << ','
          << fmt(row.cost_j) << ',' << row.conv << ',' << row.cost << '\n';
    }
  }
}

void write_sweep_raw_csv(std::ostream& out, std::span<const RunRecord> runs) {
  out << "condition,p,trial,controller,imp,clk,conv,cost,ppc,stream_hash\n";
  for (const auto& r : runs) {
    out << r.condition << ',' << fmt(r.p) << ',' << r.trial << ','
        << r.controller;
    write_metric_columns(out, r.result.metrics);
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx",
                  static_cast<unsigned long long>(r.stream_hash));
    out << ',' << hex << '\n';
  }
}

void write_sweep_summary_csv(std::ostream& out,
                             std::span<const SweepSummary> rows) {
  out << "condition,p,controller,trials,mean_conv,sd_conv,ci_low,ci_high,"
         "mean_cost\n";
  for (const auto& s : rows) {
    out << s.condition << ',' << fmt(s.p) << ',' << s.controller << ','
        << s.trials << ',' << fmt(s.mean_conv) << ',' << fmt(s.sd_conv) << ','
        << fmt(s.ci_low) << ',' << fmt(s.ci_high) << ',' << fmt(s.mean_cost)
        << '\n';
  }
}

void write_ablation_csv(std::ostream& out, std::span<const AblationRow> rows) {
  out << "condition,controller,feature_set,trial,imp,clk,conv,cost,ppc\n";
  for (const auto& row : rows) {
    const auto& r = row.run;
    out << r.condition << ',' << r.controller << ',' << to_string(row.features)
        << ',' << r.trial;
    write_metric_columns(out, r.result.metrics);
    out << '\n';
  }
}

std::vector<fs::path> execute_run(const ExperimentSpec& spec,
                                  const fs::path& output_dir) {
  spec.validate();
  const auto log = load_log(spec.log);
  const auto runs = run_experiment(spec, log);
  return write_files(
      output_dir,
      {{"metrics.csv", [&](std::ostream& o) { write_metrics_csv(o, runs); }},
       {"trace.csv", [&](std::ostream& o) { write_trace_csv(o, runs); }},
       {"manifest.json", manifest_writer(spec, "run")}});
}

std::vector<fs::path> execute_sweep(const ExperimentSpec& spec,
                                    const fs::path& output_dir) {
  spec.validate();
  const auto log = load_log(spec.log);
  const auto sweep = sweep_sparsity(spec, log);
  return write_files(
      output_dir,
      {{"sweep_raw.csv",
        [&](std::ostream& o) { write_sweep_raw_csv(o, sweep.raw); }},
       {"sweep_summary.csv",
        [&](std::ostream& o) { write_sweep_summary_csv(o, sweep.summary); }},
       {"manifest.json", manifest_writer(spec, "sweep-sparsity")}});
}

std::vector<fs::path> execute_ablation(const ExperimentSpec& spec,
                                       const fs::path& output_dir) {
  spec.validate();
  const auto log = load_log(spec.log);
  const auto rows = run_ablation(spec, log);
  return write_files(
      output_dir,
      {{"ablation.csv", [&](std::ostream& o) { write_ablation_csv(o, rows); }},
       {"manifest.json", manifest_writer(spec, "ablation")}});
}

}  // namespace mcmf
