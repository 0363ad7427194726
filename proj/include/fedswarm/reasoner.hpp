#pragma once

// Deterministic rule oracle standing in for an onboard fine-tuned language
// model: maps a local context to a suggested defense tool. The interface
// (context in, tool out) is the substitution point for a learned reasoner.

#include "fedswarm/env.hpp"

namespace fedswarm {

struct ReasonerContext {
  bool is_leader = false;
  bool parent_link_up = false;
  int consec_jammed = 0;
  bool physical_normal = true;  // reserved; always true in this simulator
};

inline ReasonerContext reasoner_context(const WorldState& w, int agent_id) {
  const auto& u = w.uavs.at(static_cast<std::size_t>(agent_id));
  const auto& rec = w.links.at(static_cast<std::size_t>(agent_id));
  return {u.role == Role::kLeader, rec.has_value() && rec->up, u.consec_jammed, true};
}

// First matching rule wins, in escalation-severity order:
//   1. leader persistently jammed        -> RoleShuffle
//   2. follower with a down parent link  -> TopologyReconfig
//   3. anyone persistently jammed        -> FreqHop
//   4. otherwise                         -> Hold
// Total, pure, and deterministic.
inline ToolAction suggest(const ReasonerContext& ctx, int persist_threshold) {
  if (ctx.is_leader && ctx.consec_jammed >= persist_threshold) return ToolAction::kRoleShuffle;
  if (!ctx.is_leader && !ctx.parent_link_up) return ToolAction::kTopologyReconfig;
  if (ctx.consec_jammed >= persist_threshold) return ToolAction::kFreqHop;
  return ToolAction::kHold;
}

}  // namespace fedswarm
