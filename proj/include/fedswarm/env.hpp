#pragma once

// Multi-agent environment: UAV formation kinematics on a circle, channelized
// SINR link model, jammer behaviors, defense-tool semantics, observation and
// reward construction. Deterministic given (config, seed) and the action
// sequence.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fedswarm/config.hpp"
#include "fedswarm/rng.hpp"

namespace fedswarm {

// Fixed action encoding; also the policy-output ordering.
enum class ToolAction : int {
  kHold = 0,
  kRoleShuffle = 1,
  kTopologyReconfig = 2,
  kFreqHop = 3,
};

inline constexpr int kNumActions = 4;

inline const char* to_string(ToolAction a) {
  switch (a) {
    case ToolAction::kHold: return "hold";
    case ToolAction::kRoleShuffle: return "role_shuffle";
    case ToolAction::kTopologyReconfig: return "topology_reconfig";
    case ToolAction::kFreqHop: return "freq_hop";
  }
  return "?";
}

inline double tool_cost(const ExperimentConfig& cfg, ToolAction a) {
  switch (a) {
    case ToolAction::kHold: return cfg.cost_hold;
    case ToolAction::kRoleShuffle: return cfg.cost_role;
    case ToolAction::kTopologyReconfig: return cfg.cost_topo;
    case ToolAction::kFreqHop: return cfg.cost_hop;
  }
  return 0.0;
}

// Routing parent: the ground station, another UAV, or none (disconnected).
struct Parent {
  enum class Kind { kGcs, kUav, kNone };
  Kind kind = Kind::kNone;
  int id = -1;  // meaningful only for kUav

  static Parent gcs() { return {Kind::kGcs, -1}; }
  static Parent uav(int id) { return {Kind::kUav, id}; }
  static Parent none() { return {Kind::kNone, -1}; }
  bool operator==(const Parent&) const = default;
};

enum class Role { kLeader, kFollower };

struct UavState {
  int id = 0;
  double angle = 0.0;    // position on the formation circle [rad]
  double heading = 0.0;  // tangent direction [rad]
  double speed = 0.0;    // [m/s]
  std::array<double, 3> position{};  // [m]
  Role role = Role::kFollower;
  int channel = 0;
  Parent parent = Parent::none();
  int consec_jammed = 0;
  ToolAction last_action = ToolAction::kHold;
};

struct JammerState {
  std::array<double, 3> position{};
  JammerStrategy strategy = JammerStrategy::kSweep;
  int active_channel = 0;
  std::deque<int> lag_buffer;  // observed leader channels, oldest first
  std::optional<int> target_link;  // receiver UAV id, or none
};

// One directed parent link, evaluated at the receiver.
struct LinkRecord {
  int tx = -1;  // transmitter UAV id, or -1 for the GCS
  int rx = 0;   // receiver UAV id
  int channel = 0;
  double sinr_db = 0.0;
  bool up = false;
};

// Per-step aggregate filled by update_connectivity and apply_actions.
struct StepOutcome {
  int links_down = 0;        // down parent links co-channel with the jammer
  bool attack_success = false;  // links_down >= 1
  std::vector<double> per_agent_cost;
  std::vector<std::uint8_t> per_agent_agree;
};

using Observation = std::vector<double>;

struct WorldState {
  ExperimentConfig config;
  std::uint64_t seed = 0;
  int step = 0;  // 0-based step counter, incremented by the episode driver
  int gcs_channel = 0;
  std::vector<UavState> uavs;
  JammerState jammer;
  // links[i] is UAV i's parent-link record; nullopt while parent is none.
  std::vector<std::optional<LinkRecord>> links;
};

inline int observation_dim(const ExperimentConfig& cfg) { return 12 + cfg.n_channels; }

inline std::array<double, 3> gcs_position(const ExperimentConfig& cfg) {
  return {cfg.area_size / 2.0, cfg.area_size / 2.0, 0.0};
}

namespace detail {

inline double distance3(const std::array<double, 3>& a, const std::array<double, 3>& b) {
  double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

inline void place_on_circle(const ExperimentConfig& cfg, UavState& u) {
  double cx = cfg.area_size / 2.0, cy = cfg.area_size / 2.0;
  u.position = {cx + cfg.formation_radius * std::cos(u.angle),
                cy + cfg.formation_radius * std::sin(u.angle), cfg.altitude};
  u.heading = u.angle + std::numbers::pi / 2.0;  // tangent, counter-clockwise
}

inline int leader_index(const WorldState& w) {
  for (const auto& u : w.uavs) {
    if (u.role == Role::kLeader) return u.id;
  }
  throw std::logic_error("world has no leader");
}

inline std::array<double, 3> parent_position(const WorldState& w, const Parent& p) {
  if (p.kind == Parent::Kind::kGcs) return gcs_position(w.config);
  return w.uavs.at(static_cast<std::size_t>(p.id)).position;
}

}  // namespace detail

// SINR in dB of a link received at rx_pos on link_channel:
//   10*log10( tx_power*d^-beta / (noise_floor + J) )
// where J = jammer_power*d_jr^-beta if the jammer is co-channel, else 0.
inline double link_sinr(const WorldState& w, const std::array<double, 3>& tx_pos,
                        const std::array<double, 3>& rx_pos, int link_channel) {
  const auto& cfg = w.config;
  double d = detail::distance3(tx_pos, rx_pos);
  if (d <= 0.0) throw std::domain_error("degenerate geometry: zero tx-rx distance");
  double signal = cfg.tx_power * std::pow(d, -cfg.path_loss_exp);
  double interference = 0.0;
  if (w.jammer.active_channel == link_channel) {
    double d_jr = detail::distance3(w.jammer.position, rx_pos);
    if (d_jr <= 0.0) throw std::domain_error("degenerate geometry: zero jammer-rx distance");
    interference = cfg.jammer_power * std::pow(d_jr, -cfg.path_loss_exp);
  }
  return 10.0 * std::log10(signal / (cfg.noise_floor + interference));
}

namespace detail {

// Feasibility for routing: within range and above the SINR threshold,
// evaluated on the receiver's current channel.
inline bool link_feasible(const WorldState& w, const std::array<double, 3>& tx_pos,
                          const UavState& rx) {
  if (distance3(tx_pos, rx.position) > w.config.comm_range) return false;
  return link_sinr(w, tx_pos, rx.position, rx.channel) >= w.config.sinr_threshold;
}

inline std::optional<LinkRecord> eval_parent_link(const WorldState& w, const UavState& u) {
  if (u.parent.kind == Parent::Kind::kNone) return std::nullopt;
  auto tx_pos = parent_position(w, u.parent);
  LinkRecord rec;
  rec.tx = u.parent.kind == Parent::Kind::kGcs ? -1 : u.parent.id;
  rec.rx = u.id;
  rec.channel = u.channel;
  rec.sinr_db = link_sinr(w, tx_pos, u.position, u.channel);
  rec.up = rec.sinr_db >= w.config.sinr_threshold &&
           distance3(tx_pos, u.position) <= w.config.comm_range;
  return rec;
}

inline void refresh_links(WorldState& w) {
  w.links.resize(w.uavs.size());
  for (const auto& u : w.uavs) {
    w.links[static_cast<std::size_t>(u.id)] = eval_parent_link(w, u);
  }
}

}  // namespace detail

// Places N UAVs evenly on the formation circle (UAV 0 at angle 0 is the
// leader, parent Gcs; followers parent the leader), channel 0 everywhere,
// jammer at its configured position. Initial link records are computed so
// step-0 observations see the starting connectivity.
inline WorldState init_world(const ExperimentConfig& cfg, std::uint64_t seed) {
  validate(cfg);
  WorldState w;
  w.config = cfg;
  w.seed = seed;
  w.step = 0;
  w.gcs_channel = 0;
  w.uavs.resize(static_cast<std::size_t>(cfg.n_uavs));
  for (int i = 0; i < cfg.n_uavs; ++i) {
    UavState& u = w.uavs[static_cast<std::size_t>(i)];
    u.id = i;
    u.angle = 2.0 * std::numbers::pi * i / cfg.n_uavs;
    u.speed = cfg.cruise_speed;
    detail::place_on_circle(cfg, u);
    u.role = i == 0 ? Role::kLeader : Role::kFollower;
    u.channel = 0;
    u.parent = i == 0 ? Parent::gcs() : Parent::uav(0);
    u.consec_jammed = 0;
    u.last_action = ToolAction::kHold;
  }
  w.jammer.position = {cfg.jammer_x, cfg.jammer_y, 0.0};
  w.jammer.strategy = cfg.jammer_strategy;
  w.jammer.active_channel = 0;
  w.jammer.target_link = std::nullopt;
  detail::refresh_links(w);
  return w;
}

// Advances every UAV by omega*dt along the circle (omega = speed/radius).
// A rigid rotation: pairwise distances are preserved.
inline void step_kinematics(WorldState& w) {
  for (auto& u : w.uavs) {
    u.angle += (u.speed / w.config.formation_radius) * w.config.dt;
    detail::place_on_circle(w.config, u);
  }
}

// Retunes the jammer for the current step and picks its target link.
inline void jammer_step(WorldState& w, Rng& jammer_rng) {
  const auto& cfg = w.config;
  JammerState& j = w.jammer;
  switch (j.strategy) {
    case JammerStrategy::kSweep:
      j.active_channel = (w.step / cfg.jammer_lag) % cfg.n_channels;
      break;
    case JammerStrategy::kRandom:
      j.active_channel = jammer_rng.uniform_int(cfg.n_channels);
      break;
    case JammerStrategy::kReactiveLeader: {
      // Observe the end-of-previous-step leader channel, act on the one
      // observed jammer_lag steps ago; channel 0 until the buffer fills.
      int leader_ch = w.uavs[static_cast<std::size_t>(detail::leader_index(w))].channel;
      j.lag_buffer.push_back(leader_ch);
      while (j.lag_buffer.size() > static_cast<std::size_t>(cfg.jammer_lag)) {
        j.lag_buffer.pop_front();
      }
      j.active_channel = j.lag_buffer.size() == static_cast<std::size_t>(cfg.jammer_lag)
                             ? j.lag_buffer.front()
                             : 0;
      break;
    }
  }
  if (j.strategy == JammerStrategy::kReactiveLeader) {
    j.target_link = detail::leader_index(w);  // the GCS-leader link
  } else {
    j.target_link = std::nullopt;
    for (const auto& u : w.uavs) {  // lowest-id link on the active channel
      if (u.parent.kind != Parent::Kind::kNone && u.channel == j.active_channel) {
        j.target_link = u.id;
        break;
      }
    }
  }
}

// Applies one action per UAV in three coalesced phases:
//   (1) RoleShuffle: elect the UAV with the best current GCS-link SINR
//       (ties to the lowest id); the old leader follows the new one.
//   (2) TopologyReconfig: rebuild parents as a min-hop tree rooted at the
//       GCS over currently feasible links (pre-hop), ties to the lowest id;
//       unreachable followers get parent none; the leader stays on the GCS.
//   (3) FreqHop: the whole swarm and the GCS move to (channel+1) mod K.
// Every requester pays its own tool's cost regardless of coalescing.
// Returns per-agent costs and records last_action.
inline std::vector<double> apply_actions(WorldState& w, const std::vector<ToolAction>& actions) {
  if (actions.size() != w.uavs.size()) {
    throw std::invalid_argument("apply_actions: need exactly one action per UAV");
  }
  const auto& cfg = w.config;
  std::vector<double> costs(w.uavs.size(), 0.0);
  bool any_role = false, any_topo = false, any_hop = false;
  for (std::size_t i = 0; i < actions.size(); ++i) {
    costs[i] = tool_cost(cfg, actions[i]);
    any_role |= actions[i] == ToolAction::kRoleShuffle;
    any_topo |= actions[i] == ToolAction::kTopologyReconfig;
    any_hop |= actions[i] == ToolAction::kFreqHop;
  }

  if (any_role) {
    auto gcs = gcs_position(cfg);
    int best = -1;
    double best_sinr = 0.0;
    for (const auto& u : w.uavs) {
      double s = link_sinr(w, gcs, u.position, u.channel);
      if (best < 0 || s > best_sinr) {
        best = u.id;
        best_sinr = s;
      }
    }
    int old = detail::leader_index(w);
    if (best != old) {
      auto& prev = w.uavs[static_cast<std::size_t>(old)];
      auto& next = w.uavs[static_cast<std::size_t>(best)];
      prev.role = Role::kFollower;
      prev.parent = Parent::uav(best);
      next.role = Role::kLeader;
      next.parent = Parent::gcs();
    }
  }

  if (any_topo) {
    int n = static_cast<int>(w.uavs.size());
    int leader = detail::leader_index(w);
    auto gcs = gcs_position(cfg);
    std::vector<Parent> parent(static_cast<std::size_t>(n), Parent::none());
    std::vector<bool> reached(static_cast<std::size_t>(n), false);
    std::vector<int> frontier;
    for (int v = 0; v < n; ++v) {  // hop 1: direct GCS links
      if (detail::link_feasible(w, gcs, w.uavs[static_cast<std::size_t>(v)])) {
        parent[static_cast<std::size_t>(v)] = Parent::gcs();
        reached[static_cast<std::size_t>(v)] = true;
        frontier.push_back(v);
      }
    }
    while (!frontier.empty()) {  // level-synchronous; lowest-id parent wins
      std::vector<int> next;
      for (int p : frontier) {
        for (int v = 0; v < n; ++v) {
          if (reached[static_cast<std::size_t>(v)]) continue;
          if (detail::link_feasible(w, w.uavs[static_cast<std::size_t>(p)].position,
                                    w.uavs[static_cast<std::size_t>(v)])) {
            parent[static_cast<std::size_t>(v)] = Parent::uav(p);
            reached[static_cast<std::size_t>(v)] = true;
            next.push_back(v);
          }
        }
      }
      frontier = std::move(next);
    }
    parent[static_cast<std::size_t>(leader)] = Parent::gcs();
    for (auto& u : w.uavs) u.parent = parent[static_cast<std::size_t>(u.id)];
  }

  if (any_hop) {
    for (auto& u : w.uavs) u.channel = (u.channel + 1) % cfg.n_channels;
    w.gcs_channel = (w.gcs_channel + 1) % cfg.n_channels;
  }

  for (std::size_t i = 0; i < actions.size(); ++i) w.uavs[i].last_action = actions[i];
  return costs;
}

// Re-evaluates every parent link against the jammer's current channel and
// counts co-channel down links. consec_jammed advances only for agents whose
// parent link is down AND co-channel with the jammer; it resets otherwise.
inline StepOutcome update_connectivity(WorldState& w) {
  detail::refresh_links(w);
  StepOutcome out;
  out.links_down = 0;
  for (auto& u : w.uavs) {
    const auto& rec = w.links[static_cast<std::size_t>(u.id)];
    bool jammed_down = rec.has_value() && !rec->up && rec->channel == w.jammer.active_channel;
    if (jammed_down) {
      ++u.consec_jammed;
      ++out.links_down;
    } else {
      u.consec_jammed = 0;
    }
  }
  out.attack_success = out.links_down >= 1;
  return out;
}

// Fixed-layout observation of dimension 12 + n_channels:
// [is_leader, x/area, y/area, sin(heading), cos(heading),
//  channel one-hot (K), parent_link_up, min(consec/T_p, 1),
//  sinr clamped [-40,40] dB -> [0,1], last_action one-hot (4)].
inline Observation observe(const WorldState& w, int agent_id) {
  if (agent_id < 0 || agent_id >= static_cast<int>(w.uavs.size())) {
    throw std::out_of_range("observe: unknown agent id " + std::to_string(agent_id));
  }
  const auto& cfg = w.config;
  const auto& u = w.uavs[static_cast<std::size_t>(agent_id)];
  const auto& rec = w.links[static_cast<std::size_t>(agent_id)];
  Observation o;
  o.reserve(static_cast<std::size_t>(observation_dim(cfg)));
  o.push_back(u.role == Role::kLeader ? 1.0 : 0.0);
  o.push_back(u.position[0] / cfg.area_size);
  o.push_back(u.position[1] / cfg.area_size);
  o.push_back(std::sin(u.heading));
  o.push_back(std::cos(u.heading));
  for (int c = 0; c < cfg.n_channels; ++c) o.push_back(c == u.channel ? 1.0 : 0.0);
  o.push_back(rec.has_value() && rec->up ? 1.0 : 0.0);
  o.push_back(std::min(static_cast<double>(u.consec_jammed) / cfg.persist_threshold, 1.0));
  if (rec.has_value()) {
    double clamped = std::clamp(rec->sinr_db, -40.0, 40.0);
    o.push_back((clamped + 40.0) / 80.0);
  } else {
    o.push_back(0.0);
  }
  for (int a = 0; a < kNumActions; ++a) {
    o.push_back(a == static_cast<int>(u.last_action) ? 1.0 : 0.0);
  }
  return o;
}

// Per-agent shaped reward R = -w1*links_down - w2*cost + alpha*agree.
// Written so the alpha = 0 stream is bit-identical to the pure environment
// reward (no -0.0 + 0.0 sign surprises).
inline double compute_reward(const StepOutcome& outcome, int agent_id, double alpha,
                             const ExperimentConfig& cfg) {
  const auto idx = static_cast<std::size_t>(agent_id);
  double r = -(cfg.w1 * outcome.links_down) - cfg.w2 * outcome.per_agent_cost.at(idx);
  if (alpha != 0.0 && outcome.per_agent_agree.at(idx)) r += alpha;
  return r;
}

// Plain-text world dump with a fixed field order, for debugging and
// determinism checks.
inline std::string snapshot(const WorldState& w) {
  std::ostringstream out;
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out << buf;
  };
  out << "step " << w.step << " gcs_channel " << w.gcs_channel << "\n";
  out << "jammer " << to_string(w.jammer.strategy) << " channel "
      << w.jammer.active_channel << " target ";
  if (w.jammer.target_link) out << *w.jammer.target_link;
  else out << "none";
  out << " pos ";
  num(w.jammer.position[0]);
  out << " ";
  num(w.jammer.position[1]);
  out << "\n";
  for (const auto& u : w.uavs) {
    out << "uav " << u.id << (u.role == Role::kLeader ? " leader" : " follower")
        << " ch " << u.channel << " parent ";
    switch (u.parent.kind) {
      case Parent::Kind::kGcs: out << "gcs"; break;
      case Parent::Kind::kUav: out << u.parent.id; break;
      case Parent::Kind::kNone: out << "none"; break;
    }
    out << " consec " << u.consec_jammed << " last " << to_string(u.last_action)
        << " pos ";
    num(u.position[0]);
    out << " ";
    num(u.position[1]);
    out << " ";
    num(u.position[2]);
    const auto& rec = w.links[static_cast<std::size_t>(u.id)];
    if (rec.has_value()) {
      out << " link " << (rec->up ? "up" : "down") << " sinr ";
      num(rec->sinr_db);
    } else {
      out << " link none";
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace fedswarm
