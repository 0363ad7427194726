#include <catch2/catch_amalgamated.hpp>

#include <cstring>
#include <vector>

#include "fedswarm/crl.hpp"
#include "fedswarm/trainer.hpp"

using namespace fedswarm;

namespace {

bool bitwise_equal(const PolicyParams& a, const PolicyParams& b) {
  if (!a.same_shape(b)) return false;
  auto fa = flatten(a), fb = flatten(b);
  return std::memcmp(fa.data(), fb.data(), fa.size() * sizeof(double)) == 0;
}

ExperimentConfig small_config(int n) {
  ExperimentConfig cfg;
  cfg.n_uavs = n;
  cfg.episode_len = 20;
  cfg.hidden_dim = 4;
  return cfg;
}

}  // namespace

TEST_CASE("joint action count is 4^N with explicit overflow handling", "[crl]") {
  CHECK(joint_action_count(1) == 4);
  CHECK(joint_action_count(2) == 16);
  CHECK(joint_action_count(5) == 1024);
  CHECK(joint_action_count(8) == 65536);
  CHECK(joint_action_count(31) == 4611686018427387904ull);  // 2^62
  CHECK_THROWS_AS(joint_action_count(0), std::invalid_argument);
  CHECK_THROWS_AS(joint_action_count(32), std::overflow_error);
}

TEST_CASE("joint action encoding: agent 0 is the least-significant digit", "[crl]") {
  // 11 = 2*4 + 3: agent 0 reads digit 3 (freq hop), agent 1 digit 2 (reconfig).
  auto a = decode_joint_action(11, 2);
  REQUIRE(a.size() == 2);
  CHECK(a[0] == ToolAction::kFreqHop);
  CHECK(a[1] == ToolAction::kTopologyReconfig);
  CHECK(encode_joint_action(a) == 11);

  auto zero = decode_joint_action(0, 3);
  for (auto act : zero) CHECK(act == ToolAction::kHold);

  // Exhaustive round-trip over the full N=2 space.
  for (std::uint64_t idx = 0; idx < 16; ++idx) {
    CHECK(encode_joint_action(decode_joint_action(idx, 2)) == idx);
  }
  // Spot-check the N=8 space.
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    std::uint64_t idx = rng.uniform_int(65536);
    CHECK(encode_joint_action(decode_joint_action(idx, 8)) == idx);
  }
  CHECK_THROWS_AS(decode_joint_action(16, 2), std::out_of_range);
  CHECK_THROWS_AS(encode_joint_action({}), std::invalid_argument);
}

TEST_CASE("joint observation concatenates per-agent blocks in id order", "[crl]") {
  auto cfg = small_config(3);
  WorldState w = init_world(cfg, 4);
  auto joint = joint_observe(w);
  std::size_t d = static_cast<std::size_t>(observation_dim(cfg));
  REQUIRE(joint.size() == 3 * d);
  for (int i = 0; i < 3; ++i) {
    auto o = observe(w, i);
    for (std::size_t k = 0; k < d; ++k) {
      CHECK(joint[static_cast<std::size_t>(i) * d + k] == o[k]);
    }
  }
}

TEST_CASE("feasibility gate: boundary and structured reports", "[crl]") {
  auto f5 = check_joint_feasible(5);
  CHECK(f5.ok);
  CHECK(f5.joint_actions == 1024);
  auto f8 = check_joint_feasible(8);
  CHECK(f8.ok);  // 65536 <= 65536: the cap is inclusive
  auto f9 = check_joint_feasible(9);
  CHECK_FALSE(f9.ok);
  CHECK(f9.joint_actions == 262144);
  auto f10 = check_joint_feasible(10);
  CHECK_FALSE(f10.ok);
  CHECK(f10.report().find("1048576") != std::string::npos);
  CHECK(f10.report().find("n_uavs=10") != std::string::npos);
  auto f30 = check_joint_feasible(30);
  CHECK_FALSE(f30.ok);
  CHECK(f30.report().find("1152921504606846976") != std::string::npos);  // 4^30
  auto f40 = check_joint_feasible(40);
  CHECK_FALSE(f40.ok);
  CHECK(f40.report().find("exceeds uint64") != std::string::npos);
  // A larger cap admits larger swarms.
  CHECK(check_joint_feasible(10, 1ull << 40).ok);
}

TEST_CASE("centralized training fails fast on an oversized joint space", "[crl]") {
  auto cfg = small_config(10);
  try {
    train_crl(cfg, 5);
    FAIL("expected infeasibility");
  } catch (const InfeasibleError& e) {
    CHECK(e.info().n_uavs == 10);
    CHECK(e.info().joint_actions == 1048576);
    CHECK(std::string(e.what()).find("1048576") != std::string::npos);
  }
  auto big = small_config(30);
  CHECK_THROWS_AS(train_crl(big, 5), InfeasibleError);
}

TEST_CASE("centralized episodes are deterministic and reconstructible", "[crl]") {
  auto cfg = small_config(2);
  Rng rng(derive_seed(cfg.master_seed, Stream::kParamInit));
  auto policy = init_params(cfg.n_uavs * observation_dim(cfg), cfg.hidden_dim,
                            static_cast<int>(joint_action_count(cfg.n_uavs)), rng);
  const double alpha = 0.3;
  auto a = run_episode_crl(cfg, 21, policy, alpha);
  auto b = run_episode_crl(cfg, 21, policy, alpha);
  REQUIRE(a.trajectories.size() == 1);
  REQUIRE(a.trajectories[0].size() == static_cast<std::size_t>(cfg.episode_len));
  CHECK(a.metrics.mean_reward == b.metrics.mean_reward);
  CHECK(a.metrics.defense_cost == b.metrics.defense_cost);
  for (std::size_t t = 0; t < a.trajectories[0].size(); ++t) {
    CHECK(a.trajectories[0][t].action == b.trajectories[0][t].action);
    CHECK(a.trajectories[0][t].reward == b.trajectories[0][t].reward);
  }

  // The logged central reward reconstructs bit-for-bit from the outcome.
  for (std::size_t t = 0; t < a.outcomes.size(); ++t) {
    const auto& out = a.outcomes[t];
    double cost = 0.0;
    int agree = 0;
    for (std::size_t i = 0; i < 2; ++i) {
      cost += out.per_agent_cost[i];
      agree += out.per_agent_agree[i];
    }
    double expect = -(cfg.w1 * out.links_down) - cfg.w2 * cost;
    if (alpha != 0.0 && agree > 0) expect += alpha * agree;
    double got = a.trajectories[0][t].reward;
    CHECK(std::memcmp(&expect, &got, sizeof(double)) == 0);
  }
}

TEST_CASE("centralized episode rejects mismatched policy shapes", "[crl]") {
  auto cfg = small_config(2);
  Rng rng(1);
  auto wrong_obs = init_params(observation_dim(cfg), cfg.hidden_dim, 16, rng);
  CHECK_THROWS_AS(run_episode_crl(cfg, 1, wrong_obs, 0.0), std::invalid_argument);
  auto wrong_out = init_params(cfg.n_uavs * observation_dim(cfg), cfg.hidden_dim, 4, rng);
  CHECK_THROWS_AS(run_episode_crl(cfg, 1, wrong_out, 0.0), std::invalid_argument);
}

TEST_CASE("with one UAV the two paradigms coincide bit-for-bit", "[crl]") {
  // N=1 makes the joint space equal the per-agent space and averaging a
  // one-party no-op, so federated and centralized training must agree exactly.
  auto cfg = small_config(1);
  cfg.hidden_dim = 8;
  const int episodes = 30;
  auto frl = train_frl(cfg, episodes);
  auto crl = train_crl(cfg, episodes);
  CHECK(bitwise_equal(frl.global, crl.policy));
  REQUIRE(frl.episodes.size() == crl.episodes.size());
  for (std::size_t e = 0; e < frl.episodes.size(); ++e) {
    CHECK(frl.episodes[e].attack_success_rate == crl.episodes[e].attack_success_rate);
    CHECK(frl.episodes[e].defense_cost == crl.episodes[e].defense_cost);
    CHECK(frl.episodes[e].mean_reward == crl.episodes[e].mean_reward);
    CHECK(frl.episodes[e].agreement_rate == crl.episodes[e].agreement_rate);
  }
}

TEST_CASE("centralized training is reproducible", "[crl]") {
  auto cfg = small_config(2);
  auto a = train_crl(cfg, 10);
  auto b = train_crl(cfg, 10);
  CHECK(bitwise_equal(a.policy, b.policy));
  for (std::size_t e = 0; e < a.episodes.size(); ++e) {
    CHECK(a.episodes[e].mean_reward == b.episodes[e].mean_reward);
  }
}
