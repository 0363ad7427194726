#pragma once

// Centralized baseline: one policy over the concatenated observation and the
// joint action space of size 4^N. Demonstrates the joint-space explosion;
// a feasibility gate refuses to allocate the output layer beyond a cap.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "fedswarm/config.hpp"
#include "fedswarm/env.hpp"
#include "fedswarm/metrics.hpp"
#include "fedswarm/policy.hpp"
#include "fedswarm/reasoner.hpp"
#include "fedswarm/rng.hpp"
#include "fedswarm/trainer.hpp"

namespace fedswarm {

inline constexpr std::uint64_t kDefaultMaxJointActions = 65536;

// 4^n as uint64; n must keep the count representable (n <= 31).
inline std::uint64_t joint_action_count(int n_uavs) {
  if (n_uavs < 1) throw std::invalid_argument("joint_action_count: n_uavs must be >= 1");
  if (n_uavs > 31) throw std::overflow_error("joint_action_count: 4^n overflows uint64");
  return 1ull << (2 * n_uavs);
}

// Base-4 digits of `index`; agent 0 is the least-significant digit.
inline std::vector<ToolAction> decode_joint_action(std::uint64_t index, int n_uavs) {
  if (index >= joint_action_count(n_uavs)) {
    throw std::out_of_range("decode_joint_action: index out of range");
  }
  std::vector<ToolAction> actions(static_cast<std::size_t>(n_uavs));
  for (int i = 0; i < n_uavs; ++i) {
    actions[static_cast<std::size_t>(i)] = static_cast<ToolAction>(index & 3ull);
    index >>= 2;
  }
  return actions;
}

inline std::uint64_t encode_joint_action(const std::vector<ToolAction>& actions) {
  if (actions.empty() || actions.size() > 31) {
    throw std::invalid_argument("encode_joint_action: need 1..31 actions");
  }
  std::uint64_t index = 0;
  for (std::size_t i = actions.size(); i-- > 0;) {
    index = (index << 2) | static_cast<std::uint64_t>(actions[i]);
  }
  return index;
}

// Concatenation of all per-agent observations in agent-id order.
inline Observation joint_observe(const WorldState& w) {
  Observation joint;
  joint.reserve(w.uavs.size() * static_cast<std::size_t>(observation_dim(w.config)));
  for (std::size_t i = 0; i < w.uavs.size(); ++i) {
    Observation o = observe(w, static_cast<int>(i));
    joint.insert(joint.end(), o.begin(), o.end());
  }
  return joint;
}

struct JointFeasibility {
  bool ok = false;
  int n_uavs = 0;
  std::uint64_t joint_actions = 0;  // 4^N, or 0 when it overflows uint64
  std::uint64_t max_joint_actions = 0;

  std::string report() const {
    std::string size_text = joint_actions > 0
                                ? std::to_string(joint_actions)
                                : "4^" + std::to_string(n_uavs) + " (exceeds uint64)";
    if (ok) {
      return "centralized baseline feasible at n_uavs=" + std::to_string(n_uavs) +
             ": joint action space " + size_text + " <= cap " +
             std::to_string(max_joint_actions);
    }
    return "centralized baseline infeasible at n_uavs=" + std::to_string(n_uavs) +
           ": joint action space 4^" + std::to_string(n_uavs) + " = " + size_text +
           " exceeds cap " + std::to_string(max_joint_actions) +
           "; the joint softmax head is not allocated";
  }
};

// ok iff 4^n_uavs <= max_joint_actions. Returns (never throws) the verdict.
inline JointFeasibility check_joint_feasible(
    int n_uavs, std::uint64_t max_joint_actions = kDefaultMaxJointActions) {
  JointFeasibility f;
  f.n_uavs = n_uavs;
  f.max_joint_actions = max_joint_actions;
  if (n_uavs >= 1 && n_uavs <= 31) {
    f.joint_actions = joint_action_count(n_uavs);
    f.ok = f.joint_actions <= max_joint_actions;
  } else {
    f.joint_actions = 0;  // 4^N not representable; never feasible
    f.ok = false;
  }
  return f;
}

// Joint action space too large to allocate; carries the structured report.
class InfeasibleError : public std::runtime_error {
 public:
  explicit InfeasibleError(const JointFeasibility& info)
      : std::runtime_error(info.report()), info_(info) {}
  const JointFeasibility& info() const { return info_; }

 private:
  JointFeasibility info_;
};

// One centralized episode. Same step pipeline and seed derivations as the
// federated runner (the action stream uses agent slot 0), with a single
// per-step central reward: -w1*links_down - w2*sum(cost) + alpha*sum(agree).
inline EpisodeResult run_episode_crl(const ExperimentConfig& cfg, std::uint64_t world_seed,
                                     const PolicyParams& policy, double alpha,
                                     ActionSelect select = ActionSelect::kSample) {
  if (policy.obs_dim != cfg.n_uavs * observation_dim(cfg)) {
    throw std::invalid_argument("run_episode_crl: policy obs_dim mismatch");
  }
  if (static_cast<std::uint64_t>(policy.out_dim) != joint_action_count(cfg.n_uavs)) {
    throw std::invalid_argument("run_episode_crl: policy out_dim mismatch");
  }
  WorldState world = init_world(cfg, world_seed);
  Rng jammer_rng(derive_seed(world_seed, Stream::kJammer));
  Rng action_rng(derive_seed(world_seed, Stream::kAction, 0));

  EpisodeResult result;
  result.trajectories.assign(1, Trajectory{});
  result.trajectories[0].reserve(static_cast<std::size_t>(cfg.episode_len));
  result.outcomes.reserve(static_cast<std::size_t>(cfg.episode_len));

  int attack_steps = 0;
  double total_cost = 0.0, reward_sum = 0.0;
  long long agree_count = 0;

  for (int step = 0; step < cfg.episode_len; ++step) {
    step_kinematics(world);
    jammer_step(world, jammer_rng);
    std::vector<int> suggestions(static_cast<std::size_t>(cfg.n_uavs));
    for (int i = 0; i < cfg.n_uavs; ++i) {
      suggestions[static_cast<std::size_t>(i)] =
          static_cast<int>(suggest(reasoner_context(world, i), cfg.persist_threshold));
    }
    Observation joint = joint_observe(world);
    auto probs = forward(policy, joint);
    int joint_index = select == ActionSelect::kSample ? sample_action(probs, action_rng)
                                                      : greedy_action(probs);
    auto actions = decode_joint_action(static_cast<std::uint64_t>(joint_index), cfg.n_uavs);

    StepOutcome outcome;
    outcome.per_agent_cost = apply_actions(world, actions);
    StepOutcome conn = update_connectivity(world);
    outcome.links_down = conn.links_down;
    outcome.attack_success = conn.attack_success;
    outcome.per_agent_agree.resize(static_cast<std::size_t>(cfg.n_uavs));
    double step_cost = 0.0;
    int step_agree = 0;
    for (int i = 0; i < cfg.n_uavs; ++i) {
      const auto idx = static_cast<std::size_t>(i);
      outcome.per_agent_agree[idx] =
          static_cast<int>(actions[idx]) == suggestions[idx] ? 1 : 0;
      step_cost += outcome.per_agent_cost[idx];
      step_agree += outcome.per_agent_agree[idx];
    }
    double reward = -(cfg.w1 * outcome.links_down) - cfg.w2 * step_cost;
    if (alpha != 0.0 && step_agree > 0) reward += alpha * step_agree;
    int joint_suggest = static_cast<int>(encode_joint_action([&] {
      std::vector<ToolAction> s(static_cast<std::size_t>(cfg.n_uavs));
      for (int i = 0; i < cfg.n_uavs; ++i) {
        s[static_cast<std::size_t>(i)] =
            static_cast<ToolAction>(suggestions[static_cast<std::size_t>(i)]);
      }
      return s;
    }()));
    result.trajectories[0].push_back(
        TrajectoryStep{std::move(joint), joint_index, reward, joint_suggest});

    reward_sum += reward;
    total_cost += step_cost;
    agree_count += step_agree;
    attack_steps += outcome.attack_success ? 1 : 0;
    result.outcomes.push_back(std::move(outcome));
    ++world.step;
  }

  const double steps = cfg.episode_len;
  result.metrics.attack_success_rate = attack_steps / steps;
  result.metrics.defense_cost = total_cost;
  result.metrics.mean_reward = reward_sum / steps;  // one central reward per step
  result.metrics.agreement_rate =
      static_cast<double>(agree_count) / (steps * cfg.n_uavs);
  return result;
}

struct TrainCrlResult {
  PolicyParams policy;
  std::vector<EpisodeMetrics> episodes;
};

// Centralized REINFORCE with the same seed protocol, alpha schedule, and
// hyperparameters as the federated trainer. Fails fast (before any
// allocation) when the joint action space exceeds the cap.
inline TrainCrlResult train_crl(const ExperimentConfig& cfg, int total_episodes,
                                std::uint64_t max_joint_actions = kDefaultMaxJointActions) {
  validate(cfg);
  if (total_episodes < 1) throw std::invalid_argument("train_crl: total_episodes must be >= 1");
  JointFeasibility feasibility = check_joint_feasible(cfg.n_uavs, max_joint_actions);
  if (!feasibility.ok) throw InfeasibleError(feasibility);

  Rng init_rng(derive_seed(cfg.master_seed, Stream::kParamInit));
  PolicyParams policy =
      init_params(cfg.n_uavs * observation_dim(cfg), cfg.hidden_dim,
                  static_cast<int>(joint_action_count(cfg.n_uavs)), init_rng);
  double baseline = 0.0;
  TrainHyper hyper;
  hyper.learning_rate = cfg.learning_rate;
  hyper.discount = cfg.discount;

  TrainCrlResult result;
  result.episodes.reserve(static_cast<std::size_t>(total_episodes));
  for (int episode = 0; episode < total_episodes; ++episode) {
    double alpha = alpha_schedule(cfg.alpha0, cfg.alpha_decay, episode);
    std::uint64_t world_seed =
        derive_seed(cfg.master_seed, Stream::kEpisode, static_cast<std::uint64_t>(episode));
    EpisodeResult ep = run_episode_crl(cfg, world_seed, policy, alpha);
    ep.metrics.episode = episode;
    result.episodes.push_back(ep.metrics);
    try {
      baseline = reinforce_update(policy, ep.trajectories[0], hyper, baseline);
    } catch (const DivergenceError& e) {
      throw DivergenceError(std::string(e.what()) + " (episode " +
                            std::to_string(episode) + ", centralized)");
    }
  }
  result.policy = std::move(policy);
  return result;
}

}  // namespace fedswarm
