#pragma once

// Federated training loop: per-agent episodes with reasoner-shaped rewards,
// local REINFORCE updates, periodic federated averaging at the ground
// station, and broadcast of the global parameters back to every agent.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fedswarm/config.hpp"
#include "fedswarm/env.hpp"
#include "fedswarm/metrics.hpp"
#include "fedswarm/policy.hpp"
#include "fedswarm/reasoner.hpp"
#include "fedswarm/rng.hpp"

namespace fedswarm {

// alpha0 * alpha_decay^episode_index, decayed per episode.
inline double alpha_schedule(double alpha0, double alpha_decay, int episode_index) {
  if (episode_index < 0) throw std::invalid_argument("alpha_schedule: negative episode");
  return alpha0 * std::pow(alpha_decay, episode_index);
}

enum class ActionSelect { kSample, kGreedy };

struct EpisodeResult {
  std::vector<Trajectory> trajectories;  // one per agent
  EpisodeMetrics metrics;
  std::vector<StepOutcome> outcomes;  // one per step
};

// Runs one episode: kinematics -> jammer -> (observe, consult reasoner,
// pick action) per agent -> apply actions -> connectivity -> rewards.
// Observations reflect the previous step's connectivity. All randomness
// comes from sub-streams of world_seed, so episodes are independent and
// reproducible regardless of scheduling.
inline EpisodeResult run_episode(const ExperimentConfig& cfg, std::uint64_t world_seed,
                                 const std::vector<PolicyParams>& policies, double alpha,
                                 ActionSelect select = ActionSelect::kSample) {
  if (policies.size() != static_cast<std::size_t>(cfg.n_uavs)) {
    throw std::invalid_argument("run_episode: need one policy per UAV");
  }
  for (const auto& p : policies) {
    if (!p.same_shape(policies.front())) {
      throw std::invalid_argument("run_episode: policies must share one shape");
    }
    if (p.obs_dim != observation_dim(cfg) || p.out_dim != kNumActions) {
      throw std::invalid_argument("run_episode: policy shape does not match the environment");
    }
  }
  WorldState world = init_world(cfg, world_seed);
  Rng jammer_rng(derive_seed(world_seed, Stream::kJammer));
  std::vector<Rng> action_rngs;
  action_rngs.reserve(policies.size());
  for (int i = 0; i < cfg.n_uavs; ++i) {
    action_rngs.emplace_back(derive_seed(world_seed, Stream::kAction,
                                         static_cast<std::uint64_t>(i)));
  }

  EpisodeResult result;
  result.trajectories.assign(policies.size(), Trajectory{});
  for (auto& t : result.trajectories) t.reserve(static_cast<std::size_t>(cfg.episode_len));
  result.outcomes.reserve(static_cast<std::size_t>(cfg.episode_len));

  int attack_steps = 0;
  double total_cost = 0.0, reward_sum = 0.0;
  long long agree_count = 0;

  std::vector<ToolAction> actions(policies.size());
  std::vector<int> suggestions(static_cast<std::size_t>(cfg.n_uavs));
  std::vector<Observation> observations(static_cast<std::size_t>(cfg.n_uavs));

  for (int step = 0; step < cfg.episode_len; ++step) {
    step_kinematics(world);
    jammer_step(world, jammer_rng);
    for (int i = 0; i < cfg.n_uavs; ++i) {
      const auto idx = static_cast<std::size_t>(i);
      observations[idx] = observe(world, i);
      suggestions[idx] =
          static_cast<int>(suggest(reasoner_context(world, i), cfg.persist_threshold));
      auto probs = forward(policies[idx], observations[idx]);
      int a = select == ActionSelect::kSample ? sample_action(probs, action_rngs[idx])
                                              : greedy_action(probs);
      actions[idx] = static_cast<ToolAction>(a);
    }
    StepOutcome outcome;
    outcome.per_agent_cost = apply_actions(world, actions);
    StepOutcome conn = update_connectivity(world);
    outcome.links_down = conn.links_down;
    outcome.attack_success = conn.attack_success;
    outcome.per_agent_agree.resize(static_cast<std::size_t>(cfg.n_uavs));
    for (int i = 0; i < cfg.n_uavs; ++i) {
      const auto idx = static_cast<std::size_t>(i);
      outcome.per_agent_agree[idx] =
          static_cast<int>(actions[idx]) == suggestions[idx] ? 1 : 0;
    }
    for (int i = 0; i < cfg.n_uavs; ++i) {
      const auto idx = static_cast<std::size_t>(i);
      double r = compute_reward(outcome, i, alpha, cfg);
      result.trajectories[idx].push_back(TrajectoryStep{
          observations[idx], static_cast<int>(actions[idx]), r, suggestions[idx]});
      reward_sum += r;
      total_cost += outcome.per_agent_cost[idx];
      agree_count += outcome.per_agent_agree[idx];
    }
    attack_steps += outcome.attack_success ? 1 : 0;
    result.outcomes.push_back(std::move(outcome));
    ++world.step;
  }

  const double steps = cfg.episode_len;
  result.metrics.attack_success_rate = attack_steps / steps;
  result.metrics.defense_cost = total_cost;
  result.metrics.mean_reward = reward_sum / (steps * cfg.n_uavs);
  result.metrics.agreement_rate =
      static_cast<double>(agree_count) / (steps * cfg.n_uavs);
  return result;
}

// Federated average Theta = sum_i (1/N) theta_i, computed per element over a
// canonical (sorted ascending) summation order so the result is exactly
// permutation-invariant; identical inputs return bit-identical output.
inline PolicyParams fedavg(const std::vector<PolicyParams>& params_list) {
  if (params_list.empty()) throw std::invalid_argument("fedavg: empty parameter list");
  for (const auto& p : params_list) {
    if (!p.same_shape(params_list.front())) {
      throw std::invalid_argument("fedavg: parameter shape mismatch");
    }
  }
  const std::size_t n = params_list.size();
  PolicyParams out = params_list.front();
  if (n == 1) return out;
  std::vector<double> vals(n);
  auto average_tensor = [&](std::vector<double> PolicyParams::* member) {
    auto& dst = out.*member;
    for (std::size_t j = 0; j < dst.size(); ++j) {
      for (std::size_t i = 0; i < n; ++i) vals[i] = (params_list[i].*member)[j];
      std::sort(vals.begin(), vals.end());
      if (vals.front() == vals.back()) {
        dst[j] = vals.front();  // mean of equals, exactly
        continue;
      }
      double sum = 0.0;
      for (double v : vals) sum += v;
      dst[j] = sum / static_cast<double>(n);
    }
  };
  average_tensor(&PolicyParams::w1);
  average_tensor(&PolicyParams::b1);
  average_tensor(&PolicyParams::w2);
  average_tensor(&PolicyParams::b2);
  return out;
}

struct FederationRoundLog {
  int round = 0;
  std::vector<std::uint64_t> pre_checksums;  // per agent, before aggregation
  std::uint64_t post_checksum = 0;           // after broadcast (all agents equal)
  int episodes_consumed = 0;
  double alpha = 0.0;
};

struct TrainFrlResult {
  PolicyParams global;
  std::vector<EpisodeMetrics> episodes;
  std::vector<FederationRoundLog> rounds;
};

// Called after each federation round with the round log and the freshly
// broadcast global parameters (e.g. to write a checkpoint).
using RoundCallback = std::function<void(const FederationRoundLog&, const PolicyParams&)>;

// Synchronous federated REINFORCE: N identical policies initialized from the
// master seed; every fed_period episodes the GCS averages all agents and
// broadcasts the result back. A trailing partial round runs at the end so
// the returned global parameters always reflect every episode.
inline TrainFrlResult train_frl(const ExperimentConfig& cfg, int total_episodes,
                                const RoundCallback& on_round = {}) {
  validate(cfg);
  if (total_episodes < 1) throw std::invalid_argument("train_frl: total_episodes must be >= 1");
  Rng init_rng(derive_seed(cfg.master_seed, Stream::kParamInit));
  PolicyParams initial =
      init_params(observation_dim(cfg), cfg.hidden_dim, kNumActions, init_rng);
  std::vector<PolicyParams> agents(static_cast<std::size_t>(cfg.n_uavs), initial);
  std::vector<double> baselines(static_cast<std::size_t>(cfg.n_uavs), 0.0);
  TrainHyper hyper;
  hyper.learning_rate = cfg.learning_rate;
  hyper.discount = cfg.discount;

  TrainFrlResult result;
  result.episodes.reserve(static_cast<std::size_t>(total_episodes));
  int round_index = 0, episodes_since_round = 0;
  double alpha = cfg.alpha0;

  auto federation_round = [&](int episodes_consumed) {
    FederationRoundLog log;
    log.round = round_index++;
    log.pre_checksums.reserve(agents.size());
    for (const auto& a : agents) log.pre_checksums.push_back(params_checksum(a));
    PolicyParams global = fedavg(agents);
    for (auto& a : agents) a = global;  // broadcast
    log.post_checksum = params_checksum(global);
    log.episodes_consumed = episodes_consumed;
    log.alpha = alpha;
    result.rounds.push_back(log);
    if (on_round) on_round(result.rounds.back(), agents.front());
    episodes_since_round = 0;
  };

  for (int episode = 0; episode < total_episodes; ++episode) {
    alpha = alpha_schedule(cfg.alpha0, cfg.alpha_decay, episode);
    std::uint64_t world_seed =
        derive_seed(cfg.master_seed, Stream::kEpisode, static_cast<std::uint64_t>(episode));
    EpisodeResult ep = run_episode(cfg, world_seed, agents, alpha);
    ep.metrics.episode = episode;
    result.episodes.push_back(ep.metrics);
    for (int i = 0; i < cfg.n_uavs; ++i) {
      const auto idx = static_cast<std::size_t>(i);
      try {
        baselines[idx] =
            reinforce_update(agents[idx], ep.trajectories[idx], hyper, baselines[idx]);
      } catch (const DivergenceError& e) {
        throw DivergenceError(std::string(e.what()) + " (episode " +
                              std::to_string(episode) + ", agent " + std::to_string(i) +
                              ", round " + std::to_string(round_index) + ")");
      }
    }
    if (++episodes_since_round == cfg.fed_period) federation_round(episode + 1);
  }
  if (episodes_since_round > 0) federation_round(total_episodes);

  result.global = agents.front();
  return result;
}

}  // namespace fedswarm
