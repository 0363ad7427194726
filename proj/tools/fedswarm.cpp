// fedswarm: federated anti-jamming experiment harness.
//
// Subcommands:
//   train-frl  train the federated learner and write checkpoints + metrics
//   train-crl  train the centralized baseline (gated by joint-space size)
//   eval       greedily evaluate a checkpoint and write evaluation CSV
//   sweep      train+eval across swarm sizes for both paradigms
//   compare    read two run directories and emit a comparison CSV
//
// Common flags: --config FILE, --seed N, --episodes N, --swarm-size N,
//               --eval-episodes N, --out DIR, --quiet
// Values resolve as: defaults < config file < FEDSWARM_* env < flags.
//
// Exit codes: 0 success, 1 I/O or internal error, 2 configuration error,
//             3 joint-space infeasibility (explicit train-crl request),
//             4 training divergence.

#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "fedswarm/app.hpp"

namespace {

struct CommonFlags {
  std::optional<std::string> config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> swarm_size;
  bool quiet = false;

  std::vector<std::pair<std::string, std::string>> overrides() const {
    std::vector<std::pair<std::string, std::string>> o;
    if (seed) o.emplace_back("master_seed", std::to_string(*seed));
    if (swarm_size) o.emplace_back("n_uavs", std::to_string(*swarm_size));
    return o;
  }
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "config file (flat key = value)");
  cmd->add_option("--seed", flags.seed, "master seed override");
  cmd->add_option("--swarm-size", flags.swarm_size, "number of UAVs override");
  cmd->add_flag("--quiet", flags.quiet, "suppress progress output");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"federated anti-jamming experiment harness"};
  app.require_subcommand(1);

  CommonFlags train_frl_flags;
  int train_frl_episodes = 500;
  std::string train_frl_out = "out";
  auto* train_frl_cmd = app.add_subcommand("train-frl", "train the federated learner");
  add_common_flags(train_frl_cmd, train_frl_flags);
  train_frl_cmd->add_option("--episodes", train_frl_episodes, "training episodes");
  train_frl_cmd->add_option("--out", train_frl_out, "output directory");

  CommonFlags train_crl_flags;
  int train_crl_episodes = 500;
  std::string train_crl_out = "out";
  auto* train_crl_cmd = app.add_subcommand("train-crl", "train the centralized baseline");
  add_common_flags(train_crl_cmd, train_crl_flags);
  train_crl_cmd->add_option("--episodes", train_crl_episodes, "training episodes");
  train_crl_cmd->add_option("--out", train_crl_out, "output directory");

  CommonFlags eval_flags;
  std::string eval_checkpoint;
  int eval_episodes = 50;
  std::string eval_out = "out";
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint greedily");
  add_common_flags(eval_cmd, eval_flags);
  eval_cmd->add_option("--checkpoint", eval_checkpoint, "policy blob to evaluate")
      ->required();
  eval_cmd->add_option("--eval-episodes", eval_episodes, "evaluation episodes");
  eval_cmd->add_option("--out", eval_out, "output directory");

  CommonFlags sweep_flags;
  std::vector<int> sweep_sizes;
  int sweep_seeds = 3;
  int sweep_episodes = 300;
  int sweep_eval_episodes = 20;
  std::string sweep_out = "out";
  auto* sweep_cmd = app.add_subcommand("sweep", "train+eval across swarm sizes");
  add_common_flags(sweep_cmd, sweep_flags);
  sweep_cmd->add_option("--sizes", sweep_sizes, "swarm sizes (default 5 10 20 30)");
  sweep_cmd->add_option("--seeds", sweep_seeds, "seeds per size");
  sweep_cmd->add_option("--episodes", sweep_episodes, "training episodes per cell");
  sweep_cmd->add_option("--eval-episodes", sweep_eval_episodes, "evaluation episodes per cell");
  sweep_cmd->add_option("--out", sweep_out, "output directory");

  std::string compare_frl_dir, compare_crl_dir, compare_out = "out";
  bool compare_quiet = false;
  auto* compare_cmd = app.add_subcommand("compare", "compare two run directories");
  compare_cmd->add_option("--frl-dir", compare_frl_dir, "federated run directory")->required();
  compare_cmd->add_option("--crl-dir", compare_crl_dir, "centralized run directory")->required();
  compare_cmd->add_option("--out", compare_out, "output directory");
  compare_cmd->add_flag("--quiet", compare_quiet, "suppress progress output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);  // prints help, exit 0
  } catch (const CLI::ParseError& e) {
    std::cerr << "argument error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (*train_frl_cmd) {
      auto cfg = fedswarm::resolve_config(train_frl_flags.config_path,
                                          train_frl_flags.overrides());
      fedswarm::cmd_train_frl(cfg, train_frl_episodes, train_frl_out,
                              train_frl_flags.quiet);
    } else if (*train_crl_cmd) {
      auto cfg = fedswarm::resolve_config(train_crl_flags.config_path,
                                          train_crl_flags.overrides());
      fedswarm::cmd_train_crl(cfg, train_crl_episodes, train_crl_out,
                              train_crl_flags.quiet);
    } else if (*eval_cmd) {
      auto cfg = fedswarm::resolve_config(eval_flags.config_path, eval_flags.overrides());
      fedswarm::cmd_eval(cfg, eval_checkpoint, eval_episodes, eval_out, eval_flags.quiet);
    } else if (*sweep_cmd) {
      auto cfg = fedswarm::resolve_config(sweep_flags.config_path, sweep_flags.overrides(),
                                          /*validate_now=*/false);
      if (sweep_flags.swarm_size) {
        throw fedswarm::ConfigError("swarm-size",
                                    "sweep takes --sizes, not --swarm-size");
      }
      const auto& sizes =
          sweep_sizes.empty() ? fedswarm::default_sweep_sizes() : sweep_sizes;
      fedswarm::cmd_sweep(cfg, sizes, sweep_seeds, sweep_episodes, sweep_eval_episodes,
                          sweep_out, sweep_flags.quiet);
    } else if (*compare_cmd) {
      fedswarm::cmd_compare(compare_frl_dir, compare_crl_dir, compare_out, compare_quiet);
    }
  } catch (const fedswarm::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const fedswarm::InfeasibleError& e) {
    std::cerr << e.what() << "\n";
    return 3;
  } catch (const fedswarm::DivergenceError& e) {
    std::cerr << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
