#pragma once

// Greedy evaluation of trained parameters: argmax action selection, alpha
// excluded from reported rewards, fresh worlds derived from an eval seed.

#include <cstdint>
#include <vector>

#include "fedswarm/config.hpp"
#include "fedswarm/crl.hpp"
#include "fedswarm/metrics.hpp"
#include "fedswarm/policy.hpp"
#include "fedswarm/trainer.hpp"

namespace fedswarm {

struct EvalSummary {
  EpisodeMetrics mean;    // episode field is 0; means over eval episodes
  EpisodeMetrics stddev;  // sample stddev per metric (0 for n < 2)
  std::vector<EpisodeMetrics> episodes;
};

namespace detail {

inline EvalSummary summarize_eval(std::vector<EpisodeMetrics> episodes) {
  EvalSummary s;
  auto collect = [&](double EpisodeMetrics::* member) {
    std::vector<double> xs;
    xs.reserve(episodes.size());
    for (const auto& e : episodes) xs.push_back(e.*member);
    return mean_std(xs);
  };
  auto asr = collect(&EpisodeMetrics::attack_success_rate);
  auto cost = collect(&EpisodeMetrics::defense_cost);
  auto rew = collect(&EpisodeMetrics::mean_reward);
  auto agree = collect(&EpisodeMetrics::agreement_rate);
  s.mean.attack_success_rate = asr.mean;
  s.mean.defense_cost = cost.mean;
  s.mean.mean_reward = rew.mean;
  s.mean.agreement_rate = agree.mean;
  s.stddev.attack_success_rate = asr.stddev;
  s.stddev.defense_cost = cost.stddev;
  s.stddev.mean_reward = rew.stddev;
  s.stddev.agreement_rate = agree.stddev;
  s.episodes = std::move(episodes);
  return s;
}

}  // namespace detail

// Evaluates one shared (post-broadcast) policy across all agents.
inline EvalSummary evaluate_frl(const ExperimentConfig& cfg, const PolicyParams& global,
                                int n_eval_episodes, std::uint64_t eval_seed) {
  if (n_eval_episodes < 1) {
    throw std::invalid_argument("evaluate_frl: n_eval_episodes must be >= 1");
  }
  std::vector<PolicyParams> policies(static_cast<std::size_t>(cfg.n_uavs), global);
  std::vector<EpisodeMetrics> episodes;
  episodes.reserve(static_cast<std::size_t>(n_eval_episodes));
  for (int j = 0; j < n_eval_episodes; ++j) {
    std::uint64_t world_seed =
        derive_seed(eval_seed, Stream::kEval, static_cast<std::uint64_t>(j));
    EpisodeResult ep = run_episode(cfg, world_seed, policies, /*alpha=*/0.0,
                                   ActionSelect::kGreedy);
    ep.metrics.episode = j;
    episodes.push_back(ep.metrics);
  }
  return detail::summarize_eval(std::move(episodes));
}

inline EvalSummary evaluate_crl(const ExperimentConfig& cfg, const PolicyParams& policy,
                                int n_eval_episodes, std::uint64_t eval_seed) {
  if (n_eval_episodes < 1) {
    throw std::invalid_argument("evaluate_crl: n_eval_episodes must be >= 1");
  }
  std::vector<EpisodeMetrics> episodes;
  episodes.reserve(static_cast<std::size_t>(n_eval_episodes));
  for (int j = 0; j < n_eval_episodes; ++j) {
    std::uint64_t world_seed =
        derive_seed(eval_seed, Stream::kEval, static_cast<std::uint64_t>(j));
    EpisodeResult ep =
        run_episode_crl(cfg, world_seed, policy, /*alpha=*/0.0, ActionSelect::kGreedy);
    ep.metrics.episode = j;
    episodes.push_back(ep.metrics);
  }
  return detail::summarize_eval(std::move(episodes));
}

}  // namespace fedswarm
