#pragma once

// Experiment configuration: defaults, a flat key = value file format,
// environment-variable overrides, validation, and a deterministic
// key-value dump used for run manifests.

#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fedswarm {

enum class JammerStrategy { kSweep, kReactiveLeader, kRandom };

inline const char* to_string(JammerStrategy s) {
  switch (s) {
    case JammerStrategy::kSweep: return "sweep";
    case JammerStrategy::kReactiveLeader: return "reactive_leader";
    case JammerStrategy::kRandom: return "random";
  }
  return "?";
}

// Invalid or inconsistent configuration. `field` names the offending key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& detail)
      : std::runtime_error("config error: " + field + ": " + detail),
        field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct ExperimentConfig {
  int n_uavs = 0;  // required; validation rejects anything < 1
  double area_size = 1000.0;        // side of the square operating area [m]
  double formation_radius = 200.0;  // [m]
  double altitude = 100.0;          // fixed flight altitude [m]
  double cruise_speed = 10.0;       // [m/s]
  double dt = 1.0;                  // seconds per step
  int n_channels = 4;
  double comm_range = 600.0;   // [m]
  double tx_power = 1.0;       // [W]
  double jammer_power = 10.0;  // [W]; 0 disables the jammer
  double path_loss_exp = 2.0;
  double noise_floor = 1e-9;    // [W]
  double sinr_threshold = 3.0;  // [dB]
  double safety_distance = 40.0;  // min inter-UAV separation [m]
  int episode_len = 200;
  double cost_hold = 0.0;
  double cost_role = 3.0;
  double cost_topo = 2.0;
  double cost_hop = 1.0;
  double w1 = 1.0;   // weight on jammed-link count
  double w2 = 0.1;   // weight on tool cost
  double alpha0 = 1.0;       // initial reasoner-agreement bonus weight
  double alpha_decay = 0.995;  // per-episode multiplicative decay, in (0,1]
  int persist_threshold = 5;   // consecutive jammed steps before escalation
  JammerStrategy jammer_strategy = JammerStrategy::kReactiveLeader;
  int jammer_lag = 3;  // sweep dwell / reactive observation delay [steps]
  double jammer_x = 250.0;
  double jammer_y = 250.0;
  int fed_period = 10;          // episodes between federation rounds
  // Sized for 200-step REINFORCE episodes: much above 0.005 the softmax
  // saturates onto a corner before the return baseline settles.
  double learning_rate = 0.002;
  int hidden_dim = 32;
  double discount = 0.95;  // gamma, in (0,1]
  std::uint64_t master_seed = 1;

  bool operator==(const ExperimentConfig&) const = default;
};

namespace detail {

inline double parse_double_value(const std::string& field, const std::string& text) {
  errno = 0;
  char* end = nullptr;
  double v = std::strtod(text.c_str(), &end);
  if (end == text.c_str() || *end != '\0' || errno == ERANGE || !std::isfinite(v)) {
    throw ConfigError(field, "expected a finite number, got '" + text + "'");
  }
  return v;
}

inline long long parse_int_value(const std::string& field, const std::string& text) {
  errno = 0;
  char* end = nullptr;
  long long v = std::strtoll(text.c_str(), &end, 10);
  if (end == text.c_str() || *end != '\0' || errno == ERANGE) {
    throw ConfigError(field, "expected an integer, got '" + text + "'");
  }
  return v;
}

inline std::uint64_t parse_uint64_value(const std::string& field, const std::string& text) {
  errno = 0;
  char* end = nullptr;
  unsigned long long v = std::strtoull(text.c_str(), &end, 10);
  if (end == text.c_str() || *end != '\0' || errno == ERANGE || text.find('-') != std::string::npos) {
    throw ConfigError(field, "expected an unsigned 64-bit integer, got '" + text + "'");
  }
  return static_cast<std::uint64_t>(v);
}

inline std::string format_double_value(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

// One configurable key: how to parse it from text and how to print it back.
struct ConfigField {
  const char* key;
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

inline const std::vector<ConfigField>& config_fields() {
  using detail::format_double_value;
  using detail::parse_double_value;
  using detail::parse_int_value;
  using detail::parse_uint64_value;
  auto dbl = [](const char* key, double ExperimentConfig::* member) {
    return ConfigField{
        key,
        [key, member](ExperimentConfig& c, const std::string& v) {
          c.*member = parse_double_value(key, v);
        },
        [member](const ExperimentConfig& c) { return format_double_value(c.*member); }};
  };
  auto integer = [](const char* key, int ExperimentConfig::* member) {
    return ConfigField{
        key,
        [key, member](ExperimentConfig& c, const std::string& v) {
          long long x = parse_int_value(key, v);
          if (x < INT32_MIN || x > INT32_MAX) throw ConfigError(key, "out of range");
          c.*member = static_cast<int>(x);
        },
        [member](const ExperimentConfig& c) { return std::to_string(c.*member); }};
  };
  static const std::vector<ConfigField> fields = {
      integer("n_uavs", &ExperimentConfig::n_uavs),
      dbl("area_size", &ExperimentConfig::area_size),
      dbl("formation_radius", &ExperimentConfig::formation_radius),
      dbl("altitude", &ExperimentConfig::altitude),
      dbl("cruise_speed", &ExperimentConfig::cruise_speed),
      dbl("dt", &ExperimentConfig::dt),
      integer("n_channels", &ExperimentConfig::n_channels),
      dbl("comm_range", &ExperimentConfig::comm_range),
      dbl("tx_power", &ExperimentConfig::tx_power),
      dbl("jammer_power", &ExperimentConfig::jammer_power),
      dbl("path_loss_exp", &ExperimentConfig::path_loss_exp),
      dbl("noise_floor", &ExperimentConfig::noise_floor),
      dbl("sinr_threshold", &ExperimentConfig::sinr_threshold),
      dbl("safety_distance", &ExperimentConfig::safety_distance),
      integer("episode_len", &ExperimentConfig::episode_len),
      dbl("cost_hold", &ExperimentConfig::cost_hold),
      dbl("cost_role", &ExperimentConfig::cost_role),
      dbl("cost_topo", &ExperimentConfig::cost_topo),
      dbl("cost_hop", &ExperimentConfig::cost_hop),
      dbl("w1", &ExperimentConfig::w1),
      dbl("w2", &ExperimentConfig::w2),
      dbl("alpha0", &ExperimentConfig::alpha0),
      dbl("alpha_decay", &ExperimentConfig::alpha_decay),
      integer("persist_threshold", &ExperimentConfig::persist_threshold),
      ConfigField{
          "jammer_strategy",
          [](ExperimentConfig& c, const std::string& v) {
            if (v == "sweep") c.jammer_strategy = JammerStrategy::kSweep;
            else if (v == "reactive_leader") c.jammer_strategy = JammerStrategy::kReactiveLeader;
            else if (v == "random") c.jammer_strategy = JammerStrategy::kRandom;
            else throw ConfigError("jammer_strategy",
                                   "expected sweep|reactive_leader|random, got '" + v + "'");
          },
          [](const ExperimentConfig& c) { return std::string(to_string(c.jammer_strategy)); }},
      integer("jammer_lag", &ExperimentConfig::jammer_lag),
      ConfigField{
          "jammer_position",
          [](ExperimentConfig& c, const std::string& v) {
            auto comma = v.find(',');
            if (comma == std::string::npos) {
              throw ConfigError("jammer_position", "expected 'x,y', got '" + v + "'");
            }
            c.jammer_x = detail::parse_double_value("jammer_position", v.substr(0, comma));
            c.jammer_y = detail::parse_double_value("jammer_position", v.substr(comma + 1));
          },
          [](const ExperimentConfig& c) {
            return format_double_value(c.jammer_x) + "," + format_double_value(c.jammer_y);
          }},
      integer("fed_period", &ExperimentConfig::fed_period),
      dbl("learning_rate", &ExperimentConfig::learning_rate),
      integer("hidden_dim", &ExperimentConfig::hidden_dim),
      dbl("discount", &ExperimentConfig::discount),
      ConfigField{
          "master_seed",
          [](ExperimentConfig& c, const std::string& v) {
            c.master_seed = parse_uint64_value("master_seed", v);
          },
          [](const ExperimentConfig& c) { return std::to_string(c.master_seed); }},
  };
  return fields;
}

// Applies `key = value`; throws ConfigError on unknown keys or bad values.
inline void apply_config_value(ExperimentConfig& cfg, const std::string& key,
                               const std::string& value) {
  for (const auto& f : config_fields()) {
    if (key == f.key) {
      f.set(cfg, value);
      return;
    }
  }
  throw ConfigError(key, "unknown key");
}

namespace detail {

inline std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace detail

// Parses flat `key = value` text ('#' starts a comment) onto cfg.
inline void parse_config_text(ExperimentConfig& cfg, const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno), "expected 'key = value'");
    }
    apply_config_value(cfg, detail::trim(line.substr(0, eq)),
                       detail::trim(line.substr(eq + 1)));
  }
}

inline void load_config_file(ExperimentConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  parse_config_text(cfg, ss.str());
}

// Environment overrides: FEDSWARM_<KEY in upper case>, e.g. FEDSWARM_N_UAVS.
inline void apply_env_overrides(ExperimentConfig& cfg) {
  for (const auto& f : config_fields()) {
    std::string name = "FEDSWARM_";
    for (const char* p = f.key; *p; ++p) {
      name += static_cast<char>(std::toupper(static_cast<unsigned char>(*p)));
    }
    if (const char* v = std::getenv(name.c_str())) f.set(cfg, v);
  }
}

// Deterministic resolved dump, one `key = value` per line in fixed order.
// Used verbatim as the run manifest body.
inline std::string serialize_config(const ExperimentConfig& cfg) {
  std::string out;
  for (const auto& f : config_fields()) {
    out += f.key;
    out += " = ";
    out += f.get(cfg);
    out += "\n";
  }
  return out;
}

// Checks every configuration invariant; throws ConfigError naming the field.
inline void validate(const ExperimentConfig& c) {
  auto require = [](bool ok, const char* field, const std::string& detail) {
    if (!ok) throw ConfigError(field, detail);
  };
  require(c.n_uavs >= 1, "n_uavs", "must be >= 1 (required field)");
  require(c.area_size > 0, "area_size", "must be > 0");
  require(c.formation_radius > 0, "formation_radius", "must be > 0");
  require(c.formation_radius < c.area_size / 2, "formation_radius",
          "must be < area_size/2 so the formation stays inside the area");
  require(c.altitude >= 0, "altitude", "must be >= 0");
  require(c.cruise_speed >= 0, "cruise_speed", "must be >= 0");
  require(c.dt > 0, "dt", "must be > 0");
  require(c.n_channels >= 2, "n_channels", "must be >= 2");
  require(c.comm_range > 0, "comm_range", "must be > 0");
  require(c.tx_power > 0, "tx_power", "must be > 0");
  require(c.jammer_power >= 0, "jammer_power", "must be >= 0");
  require(c.path_loss_exp > 0, "path_loss_exp", "must be > 0");
  require(c.noise_floor > 0, "noise_floor", "must be > 0");
  require(c.safety_distance >= 0, "safety_distance", "must be >= 0");
  if (c.n_uavs >= 2) {
    double chord = 2.0 * c.formation_radius * std::sin(std::numbers::pi / c.n_uavs);
    require(chord >= c.safety_distance, "safety_distance",
            "formation infeasible: min inter-UAV distance " +
                detail::format_double_value(chord) + " m < safety_distance");
  }
  require(c.episode_len >= 1, "episode_len", "must be >= 1");
  require(c.cost_hold >= 0, "cost_hold", "must be >= 0");
  require(c.cost_role >= 0, "cost_role", "must be >= 0");
  require(c.cost_topo >= 0, "cost_topo", "must be >= 0");
  require(c.cost_hop >= 0, "cost_hop", "must be >= 0");
  require(c.w1 >= 0, "w1", "must be >= 0");
  require(c.w2 >= 0, "w2", "must be >= 0");
  require(c.alpha0 >= 0, "alpha0", "must be >= 0");
  require(c.alpha_decay > 0 && c.alpha_decay <= 1, "alpha_decay", "must be in (0,1]");
  require(c.persist_threshold >= 1, "persist_threshold", "must be >= 1");
  require(c.jammer_lag >= 1, "jammer_lag", "must be >= 1");
  require(c.jammer_x >= 0 && c.jammer_x <= c.area_size &&
              c.jammer_y >= 0 && c.jammer_y <= c.area_size,
          "jammer_position", "must lie inside the operating area");
  require(c.fed_period >= 1, "fed_period", "must be >= 1");
  require(c.learning_rate >= 0, "learning_rate", "must be >= 0");
  require(c.hidden_dim >= 1, "hidden_dim", "must be >= 1");
  require(c.discount > 0 && c.discount <= 1, "discount", "must be in (0,1]");
}

}  // namespace fedswarm
