#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "hetmtt/catalog.hpp"
#include "hetmtt/errors.hpp"
#include "hetmtt/geometry.hpp"
#include "hetmtt/metrics.hpp"
#include "hetmtt/targets.hpp"
#include "hetmtt/world.hpp"

#ifndef HETMTT_DATA_DIR
#define HETMTT_DATA_DIR "data"
#endif

namespace hetmtt {

enum class Method { zigzag, voronoi, voronoi_cod, power_cod, ccvd_cod };

inline const char* short_name(Method m) {
  switch (m) {
    case Method::zigzag: return "Z";
    case Method::voronoi: return "V";
    case Method::voronoi_cod: return "VC";
    case Method::power_cod: return "PC";
    case Method::ccvd_cod: return "CC";
  }
  return "?";
}

inline Method parse_method(const std::string& s) {
  if (s == "Z" || s == "zigzag") return Method::zigzag;
  if (s == "V" || s == "voronoi") return Method::voronoi;
  if (s == "VC" || s == "voronoi-cod") return Method::voronoi_cod;
  if (s == "PC" || s == "power-cod") return Method::power_cod;
  if (s == "CC" || s == "ccvd-cod") return Method::ccvd_cod;
  throw ConfigError("unknown partition method '" + s + "' (Z, V, VC, PC, CC)");
}

enum class TargetMode { boids, random_heading };

struct TeamEntry {
  std::string sensor;
  std::size_t count = 1;
};

struct InitialPose {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;  // radians
};

/// Everything that defines one run. Loaded from JSON; see configs/README.md.
struct ScenarioConfig {
  std::string name = "scenario";
  std::uint64_t seed = 1;

  // world
  double width = 100.0;
  double height = 100.0;
  double cell_size = 1.0;

  // robots
  std::vector<TeamEntry> team = {{"A", 16}, {"E", 2}};
  std::string start = "random";  // random | lower_edge | poses
  std::vector<InitialPose> poses;
  double robot_max_speed = 2.0;
  double robot_max_turn = 2.0;

  // targets
  TargetMode target_mode = TargetMode::random_heading;
  std::size_t target_count = 30;
  double target_max_speed = 1.0;
  double heading_noise = kPi / 6.0;
  std::optional<double> spawn_rate;  // unset: balanced
  BoidsParams boids;

  // filter
  double survival = 0.99;
  double birth_total = 0.1;      // expected births per scan over the whole world
  double motion_sd = 0.0;        // 0: target max speed * dt / 2
  double initial_mass = 1.0;
  bool quantized_likelihood = true;

  // planner
  Method method = Method::ccvd_cod;
  double mu = 1.0;
  double target_area = 1.0;      // |B|, m^2 holding at most one target
  double comm_radius = 0.0;      // 0: world diagonal
  double deadband_cells = 1.0;
  double zigzag_spacing = 1.0;
  double capacity_floor = 0.0;   // 0: mu / |B|, or 1 when mu = 0
  std::size_t max_swap_sweeps = 100;
  std::size_t consensus_budget = 0;  // 0: 10 n

  // time
  double dt = 1.0;
  double duration = 700.0;
  double steady_window = 400.0;

  // metrics
  OspaParams ospa;
  std::size_t ma_window = 5;

  // catalog and outputs
  std::string sensor_catalog = std::string(HETMTT_DATA_DIR) + "/sensors.json";
  std::size_t snapshot_every = 100;
  bool dump_phd = false;
  bool dump_commands = false;

  std::size_t robot_count() const {
    std::size_t n = 0;
    for (const auto& e : team) n += e.count;
    return n;
  }

  std::vector<std::string> roster() const {
    std::vector<std::string> out;
    for (const auto& e : team) out.insert(out.end(), e.count, e.sensor);
    return out;
  }

  std::size_t steps() const { return static_cast<std::size_t>(std::llround(duration / dt)); }
  /// Trailing steps averaged for steady-state statistics; the whole run when it is shorter.
  std::size_t steady_steps() const {
    return std::min(steps(), static_cast<std::size_t>(std::llround(steady_window / dt)));
  }
  double effective_comm_radius() const { return comm_radius > 0.0 ? comm_radius : std::hypot(width, height); }
  double effective_motion_sd() const { return motion_sd > 0.0 ? motion_sd : target_max_speed * dt / 2.0; }
  double effective_capacity_floor() const {
    if (capacity_floor > 0.0) return capacity_floor;
    return mu > 0.0 ? mu / target_area : 1.0;
  }

  GridWorld world() const {
    try {
      return GridWorld::with_cell_size(width, height, cell_size);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("world: ") + e.what());
    }
  }

  void validate() const {
    if (!(width > 0.0) || !(height > 0.0) || !(cell_size > 0.0)) throw ConfigError("world dimensions must be positive");
    const GridWorld w = world();
    if (std::abs(w.cells_x() * cell_size - width) > 1e-9 * width ||
        std::abs(w.cells_y() * cell_size - height) > 1e-9 * height) {
      throw ConfigError("world: cell_size must divide width and height");
    }
    if (team.empty() || robot_count() == 0) throw ConfigError("team must contain at least one robot");
    if (robot_count() > w.cell_count()) throw ConfigError("more robots than cells");
    if (start != "random" && start != "lower_edge" && start != "poses") {
      throw ConfigError("robots.start must be random, lower_edge or poses");
    }
    if (start == "poses" && poses.size() != robot_count()) throw ConfigError("robots.poses needs one pose per robot");
    if (!(robot_max_speed > 0.0) || !(robot_max_turn > 0.0)) throw ConfigError("robot speed limits must be positive");
    if (!(target_max_speed >= 0.0) || heading_noise < 0.0) throw ConfigError("target motion parameters must be >= 0");
    if (spawn_rate && *spawn_rate < 0.0) throw ConfigError("targets.spawn_rate must be >= 0");
    if (survival < 0.0 || survival > 1.0) throw ConfigError("phd.survival must lie in [0, 1]");
    if (birth_total < 0.0 || motion_sd < 0.0 || initial_mass < 0.0) throw ConfigError("phd parameters must be >= 0");
    if (mu < 0.0) throw ConfigError("planner.mu must be >= 0");
    if (!(target_area > 0.0)) throw ConfigError("planner.target_area must be positive");
    if (comm_radius < 0.0) throw ConfigError("planner.comm_radius must be >= 0");
    if (deadband_cells < 0.0 || !(zigzag_spacing > 0.0)) throw ConfigError("planner deadband/spacing invalid");
    if (capacity_floor < 0.0) throw ConfigError("planner.capacity_floor must be >= 0");
    if (!(dt > 0.0)) throw ConfigError("time.dt must be positive");
    if (duration < 0.0) throw ConfigError("time.duration must be >= 0");
    if (std::abs(static_cast<double>(steps()) * dt - duration) > 1e-9 * std::max(1.0, duration)) {
      throw ConfigError("time.duration must be an integer multiple of dt");
    }
    if (steady_window < 0.0) throw ConfigError("time.steady_window must be non-negative");
    try {
      ospa.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    if (ma_window == 0) throw ConfigError("metrics.ma_window must be >= 1");
  }
};

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::json to_json(const ScenarioConfig& c) {
  using nlohmann::json;
  json team = json::array();
  for (const auto& e : c.team) team.push_back({{"sensor", e.sensor}, {"count", e.count}});
  json poses = json::array();
  for (const auto& p : c.poses) poses.push_back({p.x, p.y, p.heading * 180.0 / kPi});
  json j;
  j["name"] = c.name;
  j["seed"] = c.seed;
  j["world"] = {{"width", c.width}, {"height", c.height}, {"cell_size", c.cell_size}};
  j["robots"] = {{"team", team},
                 {"start", c.start},
                 {"poses", poses},
                 {"max_linear_speed", c.robot_max_speed},
                 {"max_angular_speed", c.robot_max_turn}};
  j["targets"] = {{"mode", c.target_mode == TargetMode::boids ? "boids" : "random"},
                  {"count", c.target_count},
                  {"max_speed", c.target_max_speed},
                  {"heading_noise_deg", c.heading_noise * 180.0 / kPi},
                  {"spawn_rate", c.spawn_rate ? json(*c.spawn_rate) : json("balanced")},
                  {"boids",
                   {{"separation_radius", c.boids.separation_radius},
                    {"neighbor_radius", c.boids.neighbor_radius},
                    {"separation_gain", c.boids.separation_gain},
                    {"alignment_gain", c.boids.alignment_gain},
                    {"cohesion_gain", c.boids.cohesion_gain}}}};
  j["phd"] = {{"survival", c.survival},
              {"birth_total", c.birth_total},
              {"motion_sd", c.motion_sd},
              {"initial_mass", c.initial_mass},
              {"quantized_likelihood", c.quantized_likelihood}};
  j["planner"] = {{"method", short_name(c.method)},
                  {"mu", c.mu},
                  {"target_area", c.target_area},
                  {"comm_radius", c.comm_radius},
                  {"deadband_cells", c.deadband_cells},
                  {"zigzag_spacing", c.zigzag_spacing},
                  {"capacity_floor", c.capacity_floor},
                  {"max_swap_sweeps", c.max_swap_sweeps},
                  {"consensus_budget", c.consensus_budget}};
  j["time"] = {{"dt", c.dt}, {"duration", c.duration}, {"steady_window", c.steady_window}};
  j["metrics"] = {{"ospa_p", c.ospa.p}, {"ospa_c", c.ospa.c}, {"ma_window", c.ma_window}};
  j["sensor_catalog"] = c.sensor_catalog;
  j["output"] = {{"snapshot_every", c.snapshot_every}, {"dump_phd", c.dump_phd}, {"dump_commands", c.dump_commands}};
  return j;
}

namespace detail {

template <typename T>
void read(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

inline void check_keys(const nlohmann::json& j, const std::string& section, std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw ConfigError("'" + section + "' must be an object");
  for (const auto& [k, v] : j.items()) {
    bool known = false;
    for (const char* allowed : keys) known = known || k == allowed;
    if (!known) throw ConfigError("unknown key '" + section + (section.empty() ? "" : ".") + k + "'");
  }
}

}  // namespace detail

/// Unknown keys are rejected so that typos do not silently fall back to defaults.
inline ScenarioConfig config_from_json(const nlohmann::json& j) {
  using detail::check_keys;
  using detail::read;
  ScenarioConfig c;
  try {
    check_keys(j, "", {"name", "seed", "world", "robots", "targets", "phd", "planner", "time", "metrics",
                       "sensor_catalog", "output", "description"});
    read(j, "name", c.name);
    read(j, "seed", c.seed);
    read(j, "sensor_catalog", c.sensor_catalog);
    if (j.contains("world")) {
      const auto& w = j["world"];
      check_keys(w, "world", {"width", "height", "cell_size"});
      read(w, "width", c.width);
      read(w, "height", c.height);
      read(w, "cell_size", c.cell_size);
    }
    if (j.contains("robots")) {
      const auto& r = j["robots"];
      check_keys(r, "robots", {"team", "start", "poses", "max_linear_speed", "max_angular_speed"});
      if (r.contains("team")) {
        c.team.clear();
        for (const auto& e : r["team"]) {
          check_keys(e, "robots.team[]", {"sensor", "count"});
          c.team.push_back({e.at("sensor").get<std::string>(), e.value("count", std::size_t{1})});
        }
      }
      read(r, "start", c.start);
      if (r.contains("poses")) {
        c.poses.clear();
        for (const auto& p : r["poses"]) {
          if (!p.is_array() || p.size() != 3) throw ConfigError("robots.poses entries are [x, y, heading_deg]");
          c.poses.push_back({p[0].get<double>(), p[1].get<double>(), p[2].get<double>() * kPi / 180.0});
        }
      }
      read(r, "max_linear_speed", c.robot_max_speed);
      read(r, "max_angular_speed", c.robot_max_turn);
    }
    if (j.contains("targets")) {
      const auto& t = j["targets"];
      check_keys(t, "targets", {"mode", "count", "max_speed", "heading_noise_deg", "spawn_rate", "boids"});
      if (t.contains("mode")) {
        const std::string mode = t["mode"].get<std::string>();
        if (mode == "boids") {
          c.target_mode = TargetMode::boids;
        } else if (mode == "random" || mode == "random-heading") {
          c.target_mode = TargetMode::random_heading;
        } else {
          throw ConfigError("targets.mode must be boids or random");
        }
      }
      read(t, "count", c.target_count);
      read(t, "max_speed", c.target_max_speed);
      if (t.contains("heading_noise_deg")) c.heading_noise = t["heading_noise_deg"].get<double>() * kPi / 180.0;
      if (t.contains("spawn_rate")) {
        const auto& s = t["spawn_rate"];
        if (s.is_string()) {
          if (s.get<std::string>() != "balanced") throw ConfigError("targets.spawn_rate must be a number or 'balanced'");
          c.spawn_rate.reset();
        } else {
          c.spawn_rate = s.get<double>();
        }
      }
      if (t.contains("boids")) {
        const auto& b = t["boids"];
        check_keys(b, "targets.boids",
                   {"separation_radius", "neighbor_radius", "separation_gain", "alignment_gain", "cohesion_gain"});
        read(b, "separation_radius", c.boids.separation_radius);
        read(b, "neighbor_radius", c.boids.neighbor_radius);
        read(b, "separation_gain", c.boids.separation_gain);
        read(b, "alignment_gain", c.boids.alignment_gain);
        read(b, "cohesion_gain", c.boids.cohesion_gain);
      }
    }
    if (j.contains("phd")) {
      const auto& p = j["phd"];
      check_keys(p, "phd", {"survival", "birth_total", "motion_sd", "initial_mass", "quantized_likelihood"});
      read(p, "survival", c.survival);
      read(p, "birth_total", c.birth_total);
      read(p, "motion_sd", c.motion_sd);
      read(p, "initial_mass", c.initial_mass);
      read(p, "quantized_likelihood", c.quantized_likelihood);
    }
    if (j.contains("planner")) {
      const auto& p = j["planner"];
      check_keys(p, "planner", {"method", "mu", "target_area", "comm_radius", "deadband_cells", "zigzag_spacing",
                                "capacity_floor", "max_swap_sweeps", "consensus_budget"});
      if (p.contains("method")) c.method = parse_method(p["method"].get<std::string>());
      read(p, "mu", c.mu);
      read(p, "target_area", c.target_area);
      read(p, "comm_radius", c.comm_radius);
      read(p, "deadband_cells", c.deadband_cells);
      read(p, "zigzag_spacing", c.zigzag_spacing);
      read(p, "capacity_floor", c.capacity_floor);
      read(p, "max_swap_sweeps", c.max_swap_sweeps);
      read(p, "consensus_budget", c.consensus_budget);
    }
    if (j.contains("time")) {
      const auto& t = j["time"];
      check_keys(t, "time", {"dt", "duration", "steady_window"});
      read(t, "dt", c.dt);
      read(t, "duration", c.duration);
      read(t, "steady_window", c.steady_window);
    }
    if (j.contains("metrics")) {
      const auto& m = j["metrics"];
      check_keys(m, "metrics", {"ospa_p", "ospa_c", "ma_window"});
      read(m, "ospa_p", c.ospa.p);
      read(m, "ospa_c", c.ospa.c);
      read(m, "ma_window", c.ma_window);
    }
    if (j.contains("output")) {
      const auto& o = j["output"];
      check_keys(o, "output", {"snapshot_every", "dump_phd", "dump_commands"});
      read(o, "snapshot_every", c.snapshot_every);
      read(o, "dump_phd", c.dump_phd);
      read(o, "dump_commands", c.dump_commands);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

/// Sets a dotted path (e.g. "planner.method") in a JSON document. The value is
/// parsed as JSON when possible, otherwise stored as a string.
inline void apply_override(nlohmann::json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + assignment + "' is not path=value");
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  nlohmann::json value = nlohmann::json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;

  std::string pointer;
  std::size_t start = 0;
  while (start <= path.size()) {
    const auto dot = path.find('.', start);
    const std::string part = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ConfigError("override '" + assignment + "' has an empty path segment");
    pointer += "/" + part;
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  doc[nlohmann::json::json_pointer(pointer)] = value;
}

inline nlohmann::json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  nlohmann::json doc = nlohmann::json::parse(in, nullptr, false, true);
  if (doc.is_discarded()) throw ConfigError("config '" + path + "' is not valid JSON");
  return doc;
}

inline ScenarioConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {}) {
  nlohmann::json doc = path.empty() ? to_json(ScenarioConfig{}) : load_json_file(path);
  for (const auto& o : overrides) apply_override(doc, o);
  ScenarioConfig c = config_from_json(doc);
  c.validate();
  return c;
}

struct NamedTeam {
  std::string name;
  std::vector<TeamEntry> team;
};

/// Team compositions keyed by name, in name order.
inline std::vector<NamedTeam> load_teams(const std::string& path) {
  const nlohmann::json doc = load_json_file(path);
  std::vector<NamedTeam> out;
  try {
    for (auto it = doc.at("teams").begin(); it != doc.at("teams").end(); ++it) {
      NamedTeam t{it.key(), {}};
      for (auto m = it.value().begin(); m != it.value().end(); ++m) t.team.push_back({m.key(), m.value().get<std::size_t>()});
      out.push_back(std::move(t));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("teams '" + path + "': " + e.what());
  }
  return out;
}

}  // namespace hetmtt
