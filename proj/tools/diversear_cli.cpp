// Experiment CLI: runs the sampling / search / metrics pipelines described
// by a flat key = value config file and emits machine-readable results.
//
// Exit codes: 0 ok, 1 config error, 2 runtime error.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "diversear/experiment.hpp"

namespace {

struct GlobalArgs {
  std::string config_path;
  std::string out_dir = ".";
  std::string seeds;
  std::string format = "csv";
};

void add_common_flags(CLI::App* cmd, GlobalArgs& args, bool out_flags = true) {
  cmd->add_option("--config", args.config_path, "path to the experiment config file")
      ->required();
  if (out_flags) {
    cmd->add_option("--out", args.out_dir, "output directory (created if missing)");
    cmd->add_option("--seeds", args.seeds, "seed count n (runs seeds 1..n) or comma-separated list");
    cmd->add_option("--format", args.format, "output format: csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
  }
}

diversear::CommandOptions make_options(const GlobalArgs& args) {
  diversear::CommandOptions opts;
  opts.out_dir = args.out_dir;
  opts.format = args.format == "json" ? diversear::OutputFormat::json
                                      : diversear::OutputFormat::csv;
  if (!args.seeds.empty()) opts.seeds_override = diversear::parse_seed_spec(args.seeds);
  return opts;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"diversear: decoding-control experiments for bitwise multi-scale generators"};
  app.require_subcommand(1);

  GlobalArgs args;
  CLI::App* sample = app.add_subcommand("sample", "run sampling per seed, emit full run records");
  CLI::App* sweep_tau =
      app.add_subcommand("sweep-tau", "fixed tau {5,10,20} on the first half vs adaptive");
  CLI::App* diversity =
      app.add_subcommand("diversity", "pairwise bit diversity: tau=1 baseline vs config schedule");
  CLI::App* pathsearch =
      app.add_subcommand("pathsearch", "path-search criterion ablation over the config window");
  CLI::App* mn_sweep = app.add_subcommand("mn-sweep", "grid over candidate count M and lookahead N");
  CLI::App* validate = app.add_subcommand("validate", "check a config file without running");
  for (CLI::App* cmd : {sample, sweep_tau, diversity, pathsearch, mn_sweep})
    add_common_flags(cmd, args);
  add_common_flags(validate, args, /*out_flags=*/false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate->parsed()) {
      std::ifstream in(args.config_path);
      if (!in) {
        std::cerr << "cannot open config file: " << args.config_path << "\n";
        return 1;
      }
      std::stringstream ss;
      ss << in.rdbuf();
      return diversear::cmd_validate(diversear::parse_config(ss.str()), std::cout) ? 0 : 1;
    }

    diversear::ExperimentConfig config = diversear::load_config_file(args.config_path);
    diversear::CommandOptions opts = make_options(args);
    if (sample->parsed()) diversear::cmd_sample(config, opts, std::cerr);
    else if (sweep_tau->parsed()) diversear::cmd_sweep_tau(config, opts, std::cerr);
    else if (diversity->parsed()) diversear::cmd_diversity(config, opts, std::cerr);
    else if (pathsearch->parsed()) diversear::cmd_pathsearch(config, opts, std::cerr);
    else if (mn_sweep->parsed()) diversear::cmd_mn_sweep(config, opts, std::cerr);
    return 0;
  } catch (const diversear::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return 2;
  }
}
