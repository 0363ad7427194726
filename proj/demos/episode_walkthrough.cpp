// Usage: episode_walkthrough
//
// Steps a 5-UAV world by hand against the reactive jammer: every agent asks
// the rule reasoner for a suggestion and executes it directly (no learning),
// printing world snapshots so the jam -> reconfigure -> hop cycle is visible.

#include <cstdio>
#include <vector>

#include "fedswarm/env.hpp"
#include "fedswarm/reasoner.hpp"

int main() {
  using namespace fedswarm;

  ExperimentConfig cfg;
  cfg.n_uavs = 5;
  cfg.episode_len = 12;
  validate(cfg);

  WorldState world = init_world(cfg, /*seed=*/42);
  Rng jammer_rng(derive_seed(42, Stream::kJammer));

  std::printf("initial world:\n%s\n", snapshot(world).c_str());
  for (int step = 0; step < cfg.episode_len; ++step) {
    step_kinematics(world);
    jammer_step(world, jammer_rng);
    std::vector<ToolAction> actions;
    actions.reserve(world.uavs.size());
    for (int i = 0; i < cfg.n_uavs; ++i) {
      actions.push_back(suggest(reasoner_context(world, i), cfg.persist_threshold));
    }
    auto costs = apply_actions(world, actions);
    StepOutcome outcome = update_connectivity(world);
    double total_cost = 0.0;
    for (double c : costs) total_cost += c;
    std::printf("step %d: jammer on %d, links down %d, step cost %.1f\n", step,
                world.jammer.active_channel, outcome.links_down, total_cost);
    for (int i = 0; i < cfg.n_uavs; ++i) {
      std::printf("  uav %d -> %s\n", i, to_string(actions[static_cast<std::size_t>(i)]));
    }
    ++world.step;
  }
  std::printf("\nfinal world:\n%s", snapshot(world).c_str());
  return 0;
}
