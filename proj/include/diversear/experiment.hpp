#pragma once

// Experiment harness: flat key = value config files, run records, and the
// CSV/JSON emitters behind the CLI subcommands. Every number written to an
// output file is computed by library calls on the run's Trajectory.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "diversear/metrics.hpp"
#include "diversear/path_search.hpp"
#include "diversear/toy_model.hpp"

namespace diversear {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Diagnostic {
  int line = 0;  // 0 for semantic (non-syntactic) issues
  std::string message;
};

enum class ScheduleKind { fixed_tau, fixed_target, linear, explicit_targets, argmax_all };

struct ExperimentConfig {
  // model
  int scale_count = 8;
  int bit_depth = 16;
  GeometryKind geometry = GeometryKind::doubling;
  bool profile_default = true;
  std::vector<double> amplitudes;  // profile = explicit
  double gamma = 1.0;
  std::uint64_t model_seed = 0;
  // sampler
  SamplerPolicy sampler;
  std::vector<double> gumbel_noise;
  // schedule
  ScheduleKind schedule_kind = ScheduleKind::fixed_tau;
  std::vector<double> fixed_taus{1.0};  // one value applies to every scale
  double fixed_target = 0.6;
  double s_start = 0.60;
  double s_end = 0.90;
  int active_prefix = -1;  // -1: first half of the scales
  std::vector<double> targets;
  BisectionSettings bisection;
  // search
  bool search_enabled = false;
  SearchWindow window;
  // run
  std::vector<std::uint64_t> seeds;
};

namespace cfgdetail {

inline std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

inline bool parse_double(const std::string& s, double& out) {
  try {
    std::size_t pos = 0;
    out = std::stod(s, &pos);
    return pos == s.size();
  } catch (...) {
    return false;
  }
}

inline bool parse_int(const std::string& s, long long& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

inline bool parse_u64(const std::string& s, std::uint64_t& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

inline bool parse_double_list(const std::string& s, std::vector<double>& out) {
  out.clear();
  for (const std::string& item : split_list(s)) {
    double v;
    if (!parse_double(item, v)) return false;
    out.push_back(v);
  }
  return !out.empty();
}

}  // namespace cfgdetail

// "seeds = 50" means seeds 1..50; "seeds = 3,7,9" is an explicit list.
inline std::vector<std::uint64_t> parse_seed_spec(const std::string& spec) {
  std::vector<std::uint64_t> seeds;
  if (spec.find(',') == std::string::npos) {
    std::uint64_t n;
    if (!cfgdetail::parse_u64(cfgdetail::trim(spec), n))
      throw ConfigError("seeds: expected a count or a comma-separated list");
    for (std::uint64_t s = 1; s <= n; ++s) seeds.push_back(s);
  } else {
    for (const std::string& item : cfgdetail::split_list(spec)) {
      std::uint64_t s;
      if (!cfgdetail::parse_u64(item, s)) throw ConfigError("seeds: bad entry '" + item + "'");
      seeds.push_back(s);
    }
  }
  return seeds;
}

struct ParsedConfig {
  ExperimentConfig config;
  std::vector<Diagnostic> issues;  // syntax problems, with line numbers

  bool ok() const { return issues.empty(); }
};

inline ParsedConfig parse_config(const std::string& text) {
  using namespace cfgdetail;
  ParsedConfig result;
  ExperimentConfig& c = result.config;
  auto bad = [&](int line, const std::string& msg) { result.issues.push_back({line, msg}); };

  std::stringstream ss(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(ss, raw)) {
    ++line_no;
    std::string line = raw;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      bad(line_no, "expected 'key = value'");
      continue;
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    long long iv;
    double dv;
    std::uint64_t uv;

    if (key == "scales") {
      if (parse_int(value, iv) && iv >= 1) c.scale_count = static_cast<int>(iv);
      else bad(line_no, "scales: expected a positive integer");
    } else if (key == "bit_depth") {
      if (parse_int(value, iv) && iv >= 1) c.bit_depth = static_cast<int>(iv);
      else bad(line_no, "bit_depth: expected a positive integer");
    } else if (key == "geometry") {
      if (value == "doubling") c.geometry = GeometryKind::doubling;
      else if (value == "linear") c.geometry = GeometryKind::linear;
      else bad(line_no, "geometry: expected doubling or linear");
    } else if (key == "profile") {
      if (value == "default") c.profile_default = true;
      else if (value == "explicit") c.profile_default = false;
      else bad(line_no, "profile: expected default or explicit");
    } else if (key == "amplitudes") {
      if (!parse_double_list(value, c.amplitudes))
        bad(line_no, "amplitudes: expected a comma-separated list of reals");
      else c.profile_default = false;
    } else if (key == "gamma") {
      if (parse_double(value, dv) && dv >= 0.0) c.gamma = dv;
      else bad(line_no, "gamma: expected a non-negative real");
    } else if (key == "model_seed") {
      if (parse_u64(value, uv)) c.model_seed = uv;
      else bad(line_no, "model_seed: expected an unsigned integer");
    } else if (key == "sampler") {
      if (value == "argmax") c.sampler.kind = SamplerKind::argmax;
      else if (value == "top_p") c.sampler.kind = SamplerKind::top_p;
      else if (value == "joint_top_k") c.sampler.kind = SamplerKind::joint_top_k;
      else if (value == "gumbel") c.sampler.kind = SamplerKind::gumbel_perturbed_argmax;
      else bad(line_no, "sampler: expected argmax, top_p, joint_top_k, or gumbel");
    } else if (key == "top_p") {
      if (parse_double(value, dv)) c.sampler.top_p = dv;
      else bad(line_no, "top_p: expected a real");
    } else if (key == "top_k") {
      if (parse_int(value, iv) && iv >= 1) c.sampler.k = static_cast<int>(iv);
      else bad(line_no, "top_k: expected a positive integer");
    } else if (key == "gumbel_noise") {
      if (!parse_double_list(value, c.gumbel_noise))
        bad(line_no, "gumbel_noise: expected a comma-separated list of reals");
    } else if (key == "schedule") {
      if (value == "fixed_tau") c.schedule_kind = ScheduleKind::fixed_tau;
      else if (value == "fixed_s") c.schedule_kind = ScheduleKind::fixed_target;
      else if (value == "linear") c.schedule_kind = ScheduleKind::linear;
      else if (value == "targets") c.schedule_kind = ScheduleKind::explicit_targets;
      else if (value == "argmax") c.schedule_kind = ScheduleKind::argmax_all;
      else bad(line_no, "schedule: expected fixed_tau, fixed_s, linear, targets, or argmax");
    } else if (key == "tau") {
      if (!parse_double_list(value, c.fixed_taus))
        bad(line_no, "tau: expected a real or a comma-separated list");
    } else if (key == "s") {
      if (parse_double(value, dv)) c.fixed_target = dv;
      else bad(line_no, "s: expected a real");
    } else if (key == "s_start") {
      if (parse_double(value, dv)) c.s_start = dv;
      else bad(line_no, "s_start: expected a real");
    } else if (key == "s_end") {
      if (parse_double(value, dv)) c.s_end = dv;
      else bad(line_no, "s_end: expected a real");
    } else if (key == "active_prefix") {
      if (parse_int(value, iv) && iv >= 0) c.active_prefix = static_cast<int>(iv);
      else bad(line_no, "active_prefix: expected a non-negative integer");
    } else if (key == "targets") {
      if (!parse_double_list(value, c.targets))
        bad(line_no, "targets: expected a comma-separated list of reals");
    } else if (key == "tau_min") {
      if (parse_double(value, dv)) c.bisection.tau_min = dv;
      else bad(line_no, "tau_min: expected a real");
    } else if (key == "tau_max") {
      if (parse_double(value, dv)) c.bisection.tau_max = dv;
      else bad(line_no, "tau_max: expected a real");
    } else if (key == "epsilon") {
      if (parse_double(value, dv)) c.bisection.epsilon = dv;
      else bad(line_no, "epsilon: expected a real");
    } else if (key == "max_iterations") {
      if (parse_int(value, iv) && iv >= 1) c.bisection.max_iterations = static_cast<int>(iv);
      else bad(line_no, "max_iterations: expected a positive integer");
    } else if (key == "search") {
      if (value == "on") c.search_enabled = true;
      else if (value == "off") c.search_enabled = false;
      else bad(line_no, "search: expected on or off");
    } else if (key == "anchor") {
      if (parse_int(value, iv) && iv >= 1) c.window.anchor = static_cast<int>(iv);
      else bad(line_no, "anchor: expected a positive integer");
    } else if (key == "lookahead") {
      if (parse_int(value, iv) && iv >= 1) c.window.lookahead = static_cast<int>(iv);
      else bad(line_no, "lookahead: expected a positive integer");
    } else if (key == "candidates") {
      if (parse_int(value, iv) && iv >= 1) c.window.candidates = static_cast<int>(iv);
      else bad(line_no, "candidates: expected a positive integer");
    } else if (key == "criterion") {
      if (value == "energy") c.window.criterion = PathCriterion::energy;
      else if (value == "entropy") c.window.criterion = PathCriterion::entropy;
      else if (value == "mean_max_prob") c.window.criterion = PathCriterion::mean_max_prob;
      else if (value == "neg_log_prob") c.window.criterion = PathCriterion::neg_log_prob;
      else if (value == "energy_max_logit") c.window.criterion = PathCriterion::energy_max_logit;
      else bad(line_no, "criterion: unknown value '" + value + "'");
    } else if (key == "seeds") {
      try {
        c.seeds = parse_seed_spec(value);
      } catch (const ConfigError& e) {
        bad(line_no, e.what());
      }
    } else {
      bad(line_no, "unknown key '" + key + "'");
    }
  }
  return result;
}

inline int effective_active_prefix(const ExperimentConfig& c) {
  return c.active_prefix >= 0 ? c.active_prefix : c.scale_count / 2;
}

// Semantic checks, reported as diagnostics rather than thrown.
inline std::vector<Diagnostic> validate_config(const ExperimentConfig& c) {
  std::vector<Diagnostic> issues;
  auto bad = [&](const std::string& msg) { issues.push_back({0, msg}); };
  if (c.scale_count < 1) bad("scales must be positive");
  if (c.bit_depth < 1) bad("bit_depth must be positive");
  if (!c.profile_default && static_cast<int>(c.amplitudes.size()) != c.scale_count)
    bad("amplitudes: expected one value per scale (" + std::to_string(c.scale_count) + ")");
  if (c.profile_default && c.scale_count < 2) bad("default profile needs at least 2 scales");
  for (double a : c.amplitudes)
    if (!(a >= 0.0)) bad("amplitudes must be non-negative");

  switch (c.sampler.kind) {
    case SamplerKind::top_p:
      if (!(c.sampler.top_p > 0.0) || c.sampler.top_p > 1.0)
        bad("top_p must be in (0, 1]");
      break;
    case SamplerKind::joint_top_k: {
      if (c.bit_depth > 16) bad("joint_top_k requires bit_depth <= 16");
      else if (c.sampler.k < 1 || c.sampler.k > (1 << c.bit_depth))
        bad("top_k must be in [1, 2^bit_depth]");
      break;
    }
    default:
      break;
  }

  switch (c.schedule_kind) {
    case ScheduleKind::fixed_tau:
      if (c.fixed_taus.size() != 1 &&
          static_cast<int>(c.fixed_taus.size()) != c.scale_count)
        bad("tau: expected one value or one per scale");
      for (double t : c.fixed_taus)
        if (!(t > 0.0)) bad("tau values must be positive");
      break;
    case ScheduleKind::fixed_target:
      if (!(c.fixed_target > 0.5) || !(c.fixed_target < 1.0))
        bad("s must be in (0.5, 1): got " + std::to_string(c.fixed_target));
      break;
    case ScheduleKind::linear: {
      if (!(c.s_start > 0.5) || !(c.s_start <= c.s_end) || !(c.s_end < 1.0))
        bad("linear schedule requires 0.5 < s_start <= s_end < 1");
      if (effective_active_prefix(c) > c.scale_count)
        bad("active_prefix exceeds scale count");
      break;
    }
    case ScheduleKind::explicit_targets:
      if (c.targets.empty() || static_cast<int>(c.targets.size()) > c.scale_count)
        bad("targets: expected between 1 and scale-count values");
      for (double s : c.targets)
        if (!(s > 0.5) || !(s < 1.0)) bad("targets must each be in (0.5, 1)");
      break;
    case ScheduleKind::argmax_all:
      break;
  }

  if (!(c.bisection.tau_min > 0.0) || !(c.bisection.tau_min < c.bisection.tau_max))
    bad("bisection requires 0 < tau_min < tau_max");
  if (!(c.bisection.epsilon > 0.0)) bad("epsilon must be positive");

  if (c.search_enabled) {
    if (c.window.anchor < 1 || c.window.lookahead < 1 ||
        c.window.anchor + c.window.lookahead > c.scale_count)
      bad("search window out of range: anchor + lookahead must not exceed scale count");
    if (c.window.candidates < 1) bad("candidates must be >= 1");
  }
  return issues;
}

inline std::vector<ScaleSpec> make_scales(const ExperimentConfig& c) {
  return make_geometry(c.geometry, c.scale_count, c.bit_depth);
}

inline SyntheticModel make_model(const ExperimentConfig& c) {
  SharpnessProfile profile;
  if (c.profile_default) {
    profile = default_profile(c.scale_count, c.model_seed);
    profile.context_gamma = c.gamma;
  } else {
    profile.amplitude = c.amplitudes;
    profile.context_gamma = c.gamma;
    profile.model_seed = c.model_seed;
  }
  return SyntheticModel(make_scales(c), std::move(profile));
}

inline ConfidenceTargetSchedule make_schedule(const ExperimentConfig& c) {
  ConfidenceTargetSchedule schedule;
  switch (c.schedule_kind) {
    case ScheduleKind::fixed_tau:
      for (int k = 0; k < c.scale_count; ++k)
        schedule.push_back(
            ScalePolicy::fixed(c.fixed_taus.size() == 1 ? c.fixed_taus[0] : c.fixed_taus[k]));
      break;
    case ScheduleKind::fixed_target:
      for (int k = 0; k < c.scale_count; ++k)
        schedule.push_back(ScalePolicy::target(c.fixed_target));
      break;
    case ScheduleKind::linear:
      schedule = linear_target_schedule(c.s_start, c.s_end, c.scale_count,
                                        effective_active_prefix(c));
      break;
    case ScheduleKind::explicit_targets:
      schedule = explicit_target_schedule(c.targets, c.scale_count);
      break;
    case ScheduleKind::argmax_all:
      for (int k = 0; k < c.scale_count; ++k) schedule.push_back(ScalePolicy::argmax());
      break;
  }
  return schedule;
}

inline RunPolicy make_run_policy(const ExperimentConfig& c) {
  return RunPolicy{c.sampler, make_schedule(c), c.bisection, c.gumbel_noise};
}

// Digest of the full run description; identical configs share a run id.
inline std::string config_digest(const ExperimentConfig& c) {
  std::ostringstream ss;
  ss << c.scale_count << '|' << c.bit_depth << '|' << static_cast<int>(c.geometry) << '|'
     << c.profile_default << '|';
  for (double a : c.amplitudes) ss << a << ',';
  ss << '|' << c.gamma << '|' << c.model_seed << '|' << static_cast<int>(c.sampler.kind) << '|'
     << c.sampler.top_p << '|' << c.sampler.k << '|';
  for (double g : c.gumbel_noise) ss << g << ',';
  ss << '|' << static_cast<int>(c.schedule_kind) << '|';
  for (double t : c.fixed_taus) ss << t << ',';
  ss << '|' << c.fixed_target << '|' << c.s_start << '|' << c.s_end << '|'
     << effective_active_prefix(c) << '|';
  for (double s : c.targets) ss << s << ',';
  ss << '|' << c.bisection.tau_min << '|' << c.bisection.tau_max << '|' << c.bisection.epsilon
     << '|' << c.bisection.max_iterations << '|' << c.search_enabled << '|' << c.window.anchor
     << '|' << c.window.lookahead << '|' << c.window.candidates << '|'
     << static_cast<int>(c.window.criterion) << '|';
  for (std::uint64_t s : c.seeds) ss << s << ',';
  const std::string canonical = ss.str();
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (char ch : canonical) {
    h ^= static_cast<std::uint8_t>(ch);
    h *= 0x100000001B3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

struct RunRecord {
  std::string run_id;
  std::uint64_t seed;
  Trajectory trajectory;
  double wall_time_seconds = 0.0;  // diagnostics only; never written to data files
};

inline Trajectory run_one(const ExperimentConfig& c, const SyntheticModel& model,
                          const RunPolicy& policy, std::uint64_t seed) {
  return c.search_enabled ? run_path_search(model, c.window, policy, seed)
                          : run_sequential(model, policy, seed);
}

inline std::vector<RunRecord> run_experiment(const ExperimentConfig& c, std::ostream& diag) {
  if (c.seeds.empty()) throw ConfigError("no seeds configured");
  auto issues = validate_config(c);
  if (!issues.empty()) throw ConfigError("invalid config: " + issues.front().message);
  SyntheticModel model = make_model(c);
  RunPolicy policy = make_run_policy(c);
  const std::string run_id = config_digest(c);
  std::vector<RunRecord> records;
  records.reserve(c.seeds.size());
  for (std::uint64_t seed : c.seeds) {
    RunRecord record{run_id, seed, run_one(c, model, policy, seed), 0.0};
    for (const ScaleRecord& r : record.trajectory.records)
      if (!r.attainable)
        diag << "warning: seed " << seed << " scale " << r.scale << ": target "
             << (r.target ? *r.target : 0.0) << " unattainable, clamped tau=" << r.tau << "\n";
    records.push_back(std::move(record));
  }
  return records;
}

// --- output writers -------------------------------------------------------

enum class OutputFormat { csv, json };

namespace csvdetail {

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

}  // namespace csvdetail

inline const char* kSampleCsvHeader =
    "run_id,seed,scale,tau,p_bar,S_k,energy,entropy,random_fraction,criterion,candidate_id,"
    "aggregate_score,selected";

inline void write_records_csv(std::ostream& out, const std::vector<RunRecord>& records,
                              const ExperimentConfig& c) {
  using csvdetail::num;
  out << kSampleCsvHeader << "\n";
  for (const RunRecord& rec : records) {
    for (const ScaleRecord& r : rec.trajectory.records)
      out << rec.run_id << ',' << rec.seed << ',' << r.scale << ',' << num(r.tau) << ','
          << num(r.p_bar) << ',' << (r.target ? num(*r.target) : "") << ',' << num(r.energy)
          << ',' << num(r.entropy) << ',' << num(r.random_bit_fraction) << ",,,,\n";
    for (const CandidateRecord& cand : rec.trajectory.candidates)
      out << rec.run_id << ',' << rec.seed << ',' << c.window.anchor << ",,,,,,,"
          << to_string(cand.score.criterion) << ',' << cand.index << ','
          << num(cand.score.aggregate) << ',' << (cand.selected ? 1 : 0) << "\n";
  }
}

inline void write_records_json(std::ostream& out, const std::vector<RunRecord>& records) {
  nlohmann::json root = nlohmann::json::array();
  for (const RunRecord& rec : records) {
    nlohmann::json scales = nlohmann::json::array();
    for (const ScaleRecord& r : rec.trajectory.records) {
      nlohmann::json row{{"scale", r.scale},          {"tau", r.tau},
                         {"p_bar", r.p_bar},          {"energy", r.energy},
                         {"entropy", r.entropy},      {"random_fraction", r.random_bit_fraction},
                         {"attainable", r.attainable}};
      if (r.target) row["S_k"] = *r.target;
      scales.push_back(std::move(row));
    }
    nlohmann::json candidates = nlohmann::json::array();
    for (const CandidateRecord& cand : rec.trajectory.candidates)
      candidates.push_back({{"candidate_id", cand.index},
                            {"criterion", to_string(cand.score.criterion)},
                            {"aggregate_score", cand.score.aggregate},
                            {"selected", cand.selected}});
    root.push_back({{"run_id", rec.run_id},
                    {"seed", rec.seed},
                    {"sampled_bit_count", rec.trajectory.sampled_bit_count},
                    {"scales", std::move(scales)},
                    {"candidates", std::move(candidates)}});
  }
  out << root.dump(2) << "\n";
}

struct CommandOptions {
  std::string out_dir = ".";
  OutputFormat format = OutputFormat::csv;
  std::optional<std::vector<std::uint64_t>> seeds_override;
};

namespace cmddetail {

inline ExperimentConfig with_seeds(const ExperimentConfig& c, const CommandOptions& opts) {
  ExperimentConfig out = c;
  if (opts.seeds_override) out.seeds = *opts.seeds_override;
  return out;
}

inline std::ofstream open_output(const CommandOptions& opts, const std::string& stem) {
  std::filesystem::create_directories(opts.out_dir);
  const std::string path =
      (std::filesystem::path(opts.out_dir) /
       (stem + (opts.format == OutputFormat::csv ? ".csv" : ".json")))
          .string();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  return out;
}

}  // namespace cmddetail

// sample: one run per seed, full per-scale and per-candidate records.
inline void cmd_sample(const ExperimentConfig& config, const CommandOptions& opts,
                       std::ostream& diag) {
  ExperimentConfig c = cmddetail::with_seeds(config, opts);
  std::vector<RunRecord> records = run_experiment(c, diag);
  std::ofstream out = cmddetail::open_output(opts, "sample");
  if (opts.format == OutputFormat::csv)
    write_records_csv(out, records, c);
  else
    write_records_json(out, records);
}

// sweep-tau: fixed tau in {5, 10, 20} on the first half of the scales
// (argmax for the rest) versus the config's adaptive schedule.
inline void cmd_sweep_tau(const ExperimentConfig& config, const CommandOptions& opts,
                          std::ostream& diag) {
  ExperimentConfig c = cmddetail::with_seeds(config, opts);
  if (c.seeds.size() < 2) throw ConfigError("sweep-tau needs at least 2 seeds");
  auto issues = validate_config(c);
  if (!issues.empty()) throw ConfigError("invalid config: " + issues.front().message);
  SyntheticModel model = make_model(c);
  const int half = c.scale_count / 2;

  struct Setting {
    std::string label;
    RunPolicy policy;
  };
  std::vector<Setting> settings;
  for (double tau : {5.0, 10.0, 20.0}) {
    ConfidenceTargetSchedule schedule;
    for (int k = 1; k <= c.scale_count; ++k)
      schedule.push_back(k <= half ? ScalePolicy::fixed(tau) : ScalePolicy::argmax());
    settings.push_back({"fixed_tau_" + csvdetail::num(tau),
                        RunPolicy{c.sampler, schedule, c.bisection, c.gumbel_noise}});
  }
  settings.push_back({"adaptive", make_run_policy(c)});

  std::ofstream out = cmddetail::open_output(opts, "sweep_tau");
  out << "setting,scale,mean_tau,mean_entropy,mean_random_fraction,diversity,seed_count\n";
  for (const Setting& setting : settings) {
    std::vector<Trajectory> runs;
    runs.reserve(c.seeds.size());
    for (std::uint64_t seed : c.seeds) runs.push_back(run_sequential(model, setting.policy, seed));
    DiversityReport report = summarize_trajectories(runs);
    std::vector<double> mean_tau(c.scale_count, 0.0);
    for (const Trajectory& t : runs)
      for (int s = 0; s < c.scale_count; ++s) mean_tau[s] += t.records[s].tau;
    for (int s = 0; s < c.scale_count; ++s) mean_tau[s] /= static_cast<double>(runs.size());
    for (int s = 0; s < c.scale_count; ++s)
      out << setting.label << ',' << (s + 1) << ',' << csvdetail::num(mean_tau[s]) << ','
          << csvdetail::num(report.entropy_curve[s]) << ','
          << csvdetail::num(report.fraction_curve[s]) << ','
          << csvdetail::num(report.mean_pairwise_distance) << ',' << report.seed_count << "\n";
  }
  (void)diag;
}

// diversity: config schedule (side B) against the tau = 1 baseline (side A).
inline void cmd_diversity(const ExperimentConfig& config, const CommandOptions& opts,
                          std::ostream& diag) {
  ExperimentConfig c = cmddetail::with_seeds(config, opts);
  if (c.seeds.size() < 2) throw ConfigError("diversity needs at least 2 seeds");
  auto issues = validate_config(c);
  if (!issues.empty()) throw ConfigError("invalid config: " + issues.front().message);
  SyntheticModel model = make_model(c);

  ConfidenceTargetSchedule baseline_schedule;
  for (int k = 0; k < c.scale_count; ++k) baseline_schedule.push_back(ScalePolicy::fixed(1.0));
  RunPolicy baseline{c.sampler, baseline_schedule, c.bisection, c.gumbel_noise};
  RunPolicy adaptive = make_run_policy(c);

  auto [report_a, report_b] = diversity_comparison(model, baseline, adaptive, c.seeds);
  std::ofstream out = cmddetail::open_output(opts, "diversity");
  out << "side,scale,mean_entropy,mean_random_fraction,diversity,seed_count\n";
  auto emit = [&](const char* side, const DiversityReport& report) {
    for (std::size_t s = 0; s < report.entropy_curve.size(); ++s)
      out << side << ',' << (s + 1) << ',' << csvdetail::num(report.entropy_curve[s]) << ','
          << csvdetail::num(report.fraction_curve[s]) << ','
          << csvdetail::num(report.mean_pairwise_distance) << ',' << report.seed_count << "\n";
  };
  emit("baseline", report_a);
  emit("adaptive", report_b);
  (void)diag;
}

// pathsearch: the search-criterion ablation; every criterion runs the same
// window over the same seeds.
inline void cmd_pathsearch(const ExperimentConfig& config, const CommandOptions& opts,
                           std::ostream& diag) {
  ExperimentConfig c = cmddetail::with_seeds(config, opts);
  if (c.seeds.empty()) throw ConfigError("no seeds configured");
  c.search_enabled = true;
  auto issues = validate_config(c);
  if (!issues.empty()) throw ConfigError("invalid config: " + issues.front().message);
  SyntheticModel model = make_model(c);
  RunPolicy policy = make_run_policy(c);

  std::ofstream out = cmddetail::open_output(opts, "pathsearch");
  out << "criterion,seed,candidate_id,aggregate_score,selected\n";
  for (PathCriterion criterion :
       {PathCriterion::neg_log_prob, PathCriterion::entropy, PathCriterion::energy,
        PathCriterion::mean_max_prob, PathCriterion::energy_max_logit}) {
    SearchWindow window = c.window;
    window.criterion = criterion;
    for (std::uint64_t seed : c.seeds) {
      Trajectory t = run_path_search(model, window, policy, seed);
      for (const CandidateRecord& cand : t.candidates)
        out << to_string(criterion) << ',' << seed << ',' << cand.index << ','
            << csvdetail::num(cand.score.aggregate) << ',' << (cand.selected ? 1 : 0) << "\n";
    }
  }
  (void)diag;
}

// mn-sweep: the (M, N) grid; reports winner score and sampled-bit overhead
// relative to plain sequential decoding.
inline void cmd_mn_sweep(const ExperimentConfig& config, const CommandOptions& opts,
                         std::ostream& diag) {
  ExperimentConfig c = cmddetail::with_seeds(config, opts);
  if (c.seeds.empty()) throw ConfigError("no seeds configured");
  auto issues = validate_config(c);
  if (!issues.empty()) throw ConfigError("invalid config: " + issues.front().message);
  SyntheticModel model = make_model(c);
  RunPolicy policy = make_run_policy(c);

  std::uint64_t sequential_bits = 0;
  for (const ScaleSpec& s : model.scales()) sequential_bits += s.bit_count();

  std::ofstream out = cmddetail::open_output(opts, "mn_sweep");
  out << "M,N,mean_winner_score,overhead_ratio,seed_count\n";
  const int max_lookahead = std::min(4, c.scale_count - c.window.anchor);
  for (int m : {1, 2, 4, 8}) {
    for (int n = 1; n <= max_lookahead; ++n) {
      SearchWindow window = c.window;
      window.candidates = m;
      window.lookahead = n;
      double score_sum = 0.0;
      double ratio_sum = 0.0;
      for (std::uint64_t seed : c.seeds) {
        Trajectory t = run_path_search(model, window, policy, seed);
        for (const CandidateRecord& cand : t.candidates)
          if (cand.selected) score_sum += cand.score.aggregate;
        ratio_sum += static_cast<double>(t.sampled_bit_count) /
                     static_cast<double>(sequential_bits);
      }
      const double denom = static_cast<double>(c.seeds.size());
      out << m << ',' << n << ',' << csvdetail::num(score_sum / denom) << ','
          << csvdetail::num(ratio_sum / denom) << ',' << c.seeds.size() << "\n";
    }
  }
  (void)diag;
}

// validate: schema and invariant report without running anything.
inline bool cmd_validate(const ParsedConfig& parsed, std::ostream& out) {
  std::vector<Diagnostic> issues = parsed.issues;
  auto semantic = validate_config(parsed.config);
  issues.insert(issues.end(), semantic.begin(), semantic.end());
  if (issues.empty()) {
    out << "ok\n";
    return true;
  }
  for (const Diagnostic& d : issues) {
    if (d.line > 0) out << "line " << d.line << ": ";
    out << d.message << "\n";
  }
  return false;
}

inline ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  ParsedConfig parsed = parse_config(ss.str());
  if (!parsed.ok()) {
    std::string msg = "config parse errors:";
    for (const Diagnostic& d : parsed.issues)
      msg += "\n  line " + std::to_string(d.line) + ": " + d.message;
    throw ConfigError(msg);
  }
  return parsed.config;
}

}  // namespace diversear
