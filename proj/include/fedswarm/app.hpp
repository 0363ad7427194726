#pragma once

// Subcommand drivers behind the command-line tool: config resolution,
// run-directory layout, manifests, and the train/eval/sweep/compare flows.
// Kept out of main() so tests can drive the exact production paths.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fedswarm/config.hpp"
#include "fedswarm/crl.hpp"
#include "fedswarm/eval.hpp"
#include "fedswarm/metrics.hpp"
#include "fedswarm/policy.hpp"
#include "fedswarm/trainer.hpp"

namespace fedswarm {

// Precedence: built-in defaults < config file < environment < CLI overrides.
// `validate_now` is false only for sweep, whose per-size cells each set
// n_uavs and validate themselves.
inline ExperimentConfig resolve_config(
    const std::optional<std::string>& config_path,
    const std::vector<std::pair<std::string, std::string>>& cli_overrides,
    bool validate_now = true) {
  ExperimentConfig cfg;
  if (config_path) load_config_file(cfg, *config_path);
  apply_env_overrides(cfg);
  for (const auto& [key, value] : cli_overrides) apply_config_value(cfg, key, value);
  if (validate_now) validate(cfg);
  return cfg;
}

namespace detail {

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) throw IoError(path, "cannot open for writing");
  out << content;
  if (!out) throw IoError(path, "write failed");
}

// Manifest: subcommand, run parameters, then the fully resolved config.
// Deliberately free of timestamps and output paths so reruns are
// byte-identical.
inline void write_manifest(const std::string& dir, const std::string& subcommand,
                           const std::vector<std::pair<std::string, std::string>>& params,
                           const ExperimentConfig* cfg) {
  std::string text = "subcommand = " + subcommand + "\n";
  for (const auto& [k, v] : params) text += k + " = " + v + "\n";
  if (cfg) text += serialize_config(*cfg);
  write_text_file(dir + "/manifest.txt", text);
}

inline void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError(dir, "cannot create directory: " + ec.message());
}

inline std::string round_checkpoint_name(int round) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "round_%04d.bin", round);
  return buf;
}

inline std::vector<MetricRecord> tag_records(const std::vector<EpisodeMetrics>& episodes,
                                             int swarm_size, const std::string& paradigm,
                                             std::uint64_t seed) {
  std::vector<MetricRecord> records;
  records.reserve(episodes.size());
  for (const auto& m : episodes) records.push_back({swarm_size, paradigm, seed, m});
  return records;
}

}  // namespace detail

// Trains the federated learner; writes manifest.txt, metrics.csv, rounds.csv,
// per-round checkpoints, and policy_final.bin into `out_dir`.
inline void cmd_train_frl(const ExperimentConfig& cfg, int episodes,
                          const std::string& out_dir, bool quiet,
                          std::ostream& log = std::cout) {
  detail::ensure_dir(out_dir);
  detail::ensure_dir(out_dir + "/checkpoints");
  detail::write_manifest(out_dir, "train-frl", {{"episodes", std::to_string(episodes)}},
                         &cfg);
  std::string rounds_csv = "round,episodes_consumed,alpha,post_checksum,pre_checksums\n";
  auto result = train_frl(cfg, episodes, [&](const FederationRoundLog& round,
                                             const PolicyParams& global) {
    save_policy(global, out_dir + "/checkpoints/" + detail::round_checkpoint_name(round.round));
    rounds_csv += std::to_string(round.round) + "," +
                  std::to_string(round.episodes_consumed) + "," +
                  format_sig9(round.alpha) + "," + std::to_string(round.post_checksum) + ",";
    for (std::size_t i = 0; i < round.pre_checksums.size(); ++i) {
      if (i) rounds_csv += "|";
      rounds_csv += std::to_string(round.pre_checksums[i]);
    }
    rounds_csv += "\n";
  });
  export_csv(detail::tag_records(result.episodes, cfg.n_uavs, "frl", cfg.master_seed),
             out_dir + "/metrics.csv");
  detail::write_text_file(out_dir + "/rounds.csv", rounds_csv);
  save_policy(result.global, out_dir + "/policy_final.bin");
  if (!quiet) {
    log << "train-frl: " << episodes << " episodes, " << result.rounds.size()
        << " federation rounds -> " << out_dir << "\n";
  }
}

// Trains the centralized baseline; writes manifest.txt, metrics.csv, and
// policy_final.bin. Throws InfeasibleError when the joint space exceeds cap.
inline void cmd_train_crl(const ExperimentConfig& cfg, int episodes,
                          const std::string& out_dir, bool quiet,
                          std::ostream& log = std::cout) {
  detail::ensure_dir(out_dir);
  detail::write_manifest(out_dir, "train-crl", {{"episodes", std::to_string(episodes)}},
                         &cfg);
  auto result = train_crl(cfg, episodes);
  export_csv(detail::tag_records(result.episodes, cfg.n_uavs, "crl", cfg.master_seed),
             out_dir + "/metrics.csv");
  save_policy(result.policy, out_dir + "/policy_final.bin");
  if (!quiet) log << "train-crl: " << episodes << " episodes -> " << out_dir << "\n";
}

// Greedy evaluation of a checkpoint. The paradigm is inferred from the
// checkpoint's dimensions against the config.
inline void cmd_eval(const ExperimentConfig& cfg, const std::string& checkpoint,
                     int eval_episodes, const std::string& out_dir, bool quiet,
                     std::ostream& log = std::cout) {
  PolicyParams policy = load_policy(checkpoint);
  std::string paradigm;
  EvalSummary summary;
  if (policy.obs_dim == observation_dim(cfg) && policy.out_dim == kNumActions) {
    paradigm = "frl";
    summary = evaluate_frl(cfg, policy, eval_episodes, cfg.master_seed);
  } else if (policy.obs_dim == cfg.n_uavs * observation_dim(cfg) &&
             check_joint_feasible(cfg.n_uavs).ok &&
             static_cast<std::uint64_t>(policy.out_dim) == joint_action_count(cfg.n_uavs)) {
    paradigm = "crl";
    summary = evaluate_crl(cfg, policy, eval_episodes, cfg.master_seed);
  } else {
    throw ConfigError("checkpoint", "dimensions match neither paradigm for this config");
  }
  detail::ensure_dir(out_dir);
  detail::write_manifest(out_dir, "eval",
                         {{"eval_episodes", std::to_string(eval_episodes)},
                          {"paradigm", paradigm}},
                         &cfg);
  export_csv(detail::tag_records(summary.episodes, cfg.n_uavs, paradigm, cfg.master_seed),
             out_dir + "/eval.csv");
  if (!quiet) {
    log << "eval (" << paradigm << "): asr " << format_sig9(summary.mean.attack_success_rate)
        << ", defense cost " << format_sig9(summary.mean.defense_cost) << " over "
        << eval_episodes << " episodes -> " << out_dir << "\n";
  }
}

inline const std::vector<int>& default_sweep_sizes() {
  static const std::vector<int> sizes = {5, 10, 20, 30};
  return sizes;
}

// Full comparison sweep. For each (size, seed) cell: FRL train+eval always;
// CRL train+eval only where the joint space is feasible, otherwise a
// structured infeasibility report. Merged outputs: sweep_eval.csv with every
// evaluation row and summary.csv with per-size comparisons where both
// paradigms ran.
inline void cmd_sweep(const ExperimentConfig& base_cfg, const std::vector<int>& sizes,
                      int n_seeds, int episodes, int eval_episodes,
                      const std::string& out_dir, bool quiet,
                      std::ostream& log = std::cout) {
  if (sizes.empty()) throw ConfigError("sizes", "sweep needs at least one swarm size");
  if (n_seeds < 1) throw ConfigError("seeds", "sweep needs at least one seed");
  detail::ensure_dir(out_dir);
  std::vector<std::pair<std::string, std::string>> params = {
      {"episodes", std::to_string(episodes)},
      {"eval_episodes", std::to_string(eval_episodes)},
      {"seeds", std::to_string(n_seeds)},
  };
  std::string size_list;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (i) size_list += ",";
    size_list += std::to_string(sizes[i]);
  }
  params.emplace_back("sizes", size_list);
  detail::write_manifest(out_dir, "sweep", params, &base_cfg);

  std::vector<MetricRecord> merged;
  std::vector<ComparisonSummary> summaries;
  for (int size : sizes) {
    std::vector<EpisodeMetrics> frl_seed_means, crl_seed_means;
    bool crl_feasible = check_joint_feasible(size).ok;
    for (int s = 0; s < n_seeds; ++s) {
      ExperimentConfig cell = base_cfg;
      cell.n_uavs = size;
      cell.master_seed = base_cfg.master_seed + static_cast<std::uint64_t>(s);
      validate(cell);
      std::string cell_tag = "n" + std::to_string(size) + "_s" + std::to_string(s);

      std::string frl_dir = out_dir + "/" + cell_tag + "_frl";
      cmd_train_frl(cell, episodes, frl_dir, /*quiet=*/true, log);
      EvalSummary frl_eval = evaluate_frl(cell, load_policy(frl_dir + "/policy_final.bin"),
                                          eval_episodes, cell.master_seed);
      frl_eval.mean.episode = 0;
      frl_seed_means.push_back(frl_eval.mean);
      for (const auto& e : frl_eval.episodes) {
        merged.push_back({size, "frl", cell.master_seed, e});
      }

      if (crl_feasible) {
        std::string crl_dir = out_dir + "/" + cell_tag + "_crl";
        cmd_train_crl(cell, episodes, crl_dir, /*quiet=*/true, log);
        EvalSummary crl_eval = evaluate_crl(cell, load_policy(crl_dir + "/policy_final.bin"),
                                            eval_episodes, cell.master_seed);
        crl_eval.mean.episode = 0;
        crl_seed_means.push_back(crl_eval.mean);
        for (const auto& e : crl_eval.episodes) {
          merged.push_back({size, "crl", cell.master_seed, e});
        }
      }
      if (!quiet) {
        log << "sweep cell " << cell_tag << ": frl done"
            << (crl_feasible ? ", crl done" : ", crl skipped") << "\n";
      }
    }
    if (!crl_feasible) {
      JointFeasibility f = check_joint_feasible(size);
      detail::write_text_file(
          out_dir + "/n" + std::to_string(size) + "_crl_infeasible.txt", f.report() + "\n");
      if (!quiet) log << "sweep: " << f.report() << "\n";
    } else {
      summaries.push_back(summarize_comparison(frl_seed_means, crl_seed_means, size));
    }
  }
  export_csv(std::move(merged), out_dir + "/sweep_eval.csv");
  export_comparison_csv(std::move(summaries), out_dir + "/summary.csv");
  if (!quiet) log << "sweep complete -> " << out_dir << "\n";
}

namespace detail {

// Rows for comparison: a run directory's eval.csv, falling back to its
// training metrics.csv.
inline std::vector<MetricRecord> read_run_rows(const std::string& dir) {
  if (std::filesystem::exists(dir + "/eval.csv")) return parse_metrics_csv(dir + "/eval.csv");
  if (std::filesystem::exists(dir + "/metrics.csv")) {
    return parse_metrics_csv(dir + "/metrics.csv");
  }
  throw IoError(dir, "no eval.csv or metrics.csv in run directory");
}

// Per-seed mean metrics of one paradigm's rows.
inline std::vector<EpisodeMetrics> per_seed_means(const std::vector<MetricRecord>& rows) {
  std::map<std::uint64_t, std::vector<EpisodeMetrics>> by_seed;
  for (const auto& r : rows) by_seed[r.seed].push_back(r.metrics);
  std::vector<EpisodeMetrics> means;
  for (const auto& [seed, eps] : by_seed) {
    EpisodeMetrics m;
    for (const auto& e : eps) {
      m.attack_success_rate += e.attack_success_rate;
      m.defense_cost += e.defense_cost;
      m.mean_reward += e.mean_reward;
      m.agreement_rate += e.agreement_rate;
    }
    const double n = static_cast<double>(eps.size());
    m.attack_success_rate /= n;
    m.defense_cost /= n;
    m.mean_reward /= n;
    m.agreement_rate /= n;
    means.push_back(m);
  }
  return means;
}

}  // namespace detail

// Compares two run directories (one per paradigm) and writes comparison.csv.
inline void cmd_compare(const std::string& frl_dir, const std::string& crl_dir,
                        const std::string& out_dir, bool quiet,
                        std::ostream& log = std::cout) {
  auto frl_rows = detail::read_run_rows(frl_dir);
  auto crl_rows = detail::read_run_rows(crl_dir);
  if (frl_rows.empty() || crl_rows.empty()) {
    throw ConfigError("compare", "run directories contain no metric rows");
  }
  int swarm_size = frl_rows.front().swarm_size;
  for (const auto& r : frl_rows) {
    if (r.swarm_size != swarm_size) throw ConfigError("compare", "mixed swarm sizes in rows");
  }
  for (const auto& r : crl_rows) {
    if (r.swarm_size != swarm_size) {
      throw ConfigError("compare", "run directories disagree on swarm size");
    }
  }
  ComparisonSummary summary = summarize_comparison(
      detail::per_seed_means(frl_rows), detail::per_seed_means(crl_rows), swarm_size);
  detail::ensure_dir(out_dir);
  detail::write_manifest(out_dir, "compare",
                         {{"frl_dir", frl_dir}, {"crl_dir", crl_dir}}, nullptr);
  export_comparison_csv({summary}, out_dir + "/comparison.csv");
  if (!quiet) {
    log << "compare at n=" << swarm_size << ": cost reduction "
        << (summary.cost_reduction_defined
                ? format_sig9(summary.cost_reduction_pct) + "%"
                : std::string("undefined"))
        << ", asr reduction "
        << (summary.asr_reduction_defined
                ? format_sig9(summary.asr_reduction_pct) + "%"
                : std::string("undefined"))
        << " -> " << out_dir << "\n";
  }
}

}  // namespace fedswarm
