#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "hetmtt/catalog.hpp"
#include "hetmtt/ccvd.hpp"
#include "hetmtt/config.hpp"
#include "hetmtt/control.hpp"
#include "hetmtt/distributed_phd.hpp"
#include "hetmtt/errors.hpp"
#include "hetmtt/metrics.hpp"
#include "hetmtt/netsim.hpp"
#include "hetmtt/partition.hpp"
#include "hetmtt/phd.hpp"
#include "hetmtt/rng.hpp"
#include "hetmtt/sensors.hpp"
#include "hetmtt/targets.hpp"
#include "hetmtt/world.hpp"

namespace hetmtt {

inline constexpr int kSummarySchemaVersion = 1;

struct Robot {
  RobotState pose;
  SensorSpec spec;
  double c_max = 0.0;
};

struct StepMetrics {
  std::size_t step = 0;
  double t = 0.0;
  double ospa = 0.0;
  std::size_t truth = 0;
  std::size_t estimates = 0;
  double phd_mass = 0.0;
  double area_sd = 0.0;     // the partition actually used
  double area_sd_vc = 0.0;  // COD Voronoi on the same state
  double area_sd_pc = 0.0;  // COD power diagram on the same state
  std::vector<double> unused;
  std::vector<std::size_t> detections;
  std::vector<double> ratio;
};

struct PoseRow {
  std::size_t step;
  RobotState pose;
};

struct TargetRow {
  std::size_t step;
  int id;
  Vec2 position;
};

struct CommandRow {
  std::size_t step;
  RobotId robot;
  ControlCommand cmd;
};

struct Snapshot {
  std::size_t step = 0;
  std::vector<RobotId> owner;
};

/// Per-step simulation of the whole team. Robot-local state (PHD slices, cell
/// sets) only changes through the Network; partitions for the diagram methods are
/// evaluated by the shared pure functions, which is what every robot would obtain
/// from the broadcast generators.
class Simulation {
 public:
  Simulation(const ScenarioConfig& cfg, const SensorCatalog& catalog)
      : cfg_(cfg),
        world_(cfg.world()),
        target_rng_(make_stream(cfg.seed, Stream::targets)),
        measurement_rng_(make_stream(cfg.seed, Stream::measurements)),
        phd_(world_, cfg.robot_count(), PhdGrid::uniform(world_, cfg.initial_mass),
             std::vector<RobotId>(world_.cell_count(), 0)) {
    cfg_.validate();
    Rng robot_rng = make_stream(cfg.seed, Stream::robots);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const auto roster = cfg.roster();
    const std::size_t n = roster.size();
    for (std::size_t i = 0; i < n; ++i) {
      Robot r;
      r.spec = catalog.spec(roster[i]);
      r.c_max = max_capacity(r.spec, cfg.mu, cfg.target_area);
      r.pose.id = static_cast<RobotId>(i);
      r.pose.max_linear_speed = cfg.robot_max_speed;
      r.pose.max_angular_speed = cfg.robot_max_turn;
      if (cfg.start == "poses") {
        r.pose.position = {cfg.poses[i].x, cfg.poses[i].y};
        r.pose.heading = cfg.poses[i].heading;
      } else if (cfg.start == "lower_edge") {
        r.pose.position = {(static_cast<double>(i) + 0.5) * world_.width() / static_cast<double>(n),
                           0.5 * world_.cell_size()};
        r.pose.heading = kPi / 2.0;
      } else {
        r.pose.position = {world_.width() * unit(robot_rng), world_.height() * unit(robot_rng)};
        r.pose.heading = wrap_angle(kTwoPi * unit(robot_rng));
      }
      r.pose = clamp_pose(world_, r.pose);
      robots_.push_back(r);
    }

    targets_ = init_targets(cfg.target_count, world_, cfg.target_max_speed, target_rng_);
    if (cfg.target_mode == TargetMode::boids) {
      boids_ = cfg.boids;
      boids_.max_speed = cfg.target_max_speed;
    }
    walk_.heading_noise = cfg.heading_noise;
    walk_.max_speed = cfg.target_max_speed;
    walk_.spawn_rate = cfg.spawn_rate ? *cfg.spawn_rate
                                      : balanced_spawn_rate(cfg.target_count, world_, 0.5 * cfg.target_max_speed);

    models_.survival = cfg.survival;
    models_.birth_per_cell = cfg.birth_total / static_cast<double>(world_.cell_count());
    models_.motion_sd = cfg.effective_motion_sd();
    models_.quantized_likelihood = cfg.quantized_likelihood;
    models_.validate();

    centers_ = cell_centers(world_);
    const std::vector<Vec2> start = positions();
    owner_ = voronoi_partition(start, world_).owner;
    phd_ = DistributedPhd(world_, n, PhdGrid::uniform(world_, cfg.initial_mass), owner_);
    net_.set_graph(build_graph(start, cfg.effective_comm_radius()));

    if (cfg.method == Method::zigzag) plan_coverage(start);

    for (const Robot& r : robots_) pose_rows_.push_back({0, r.pose});
    for (const Target& t : targets_.items) target_rows_.push_back({0, t.id, t.position});
  }

  const ScenarioConfig& config() const { return cfg_; }
  const GridWorld& world() const { return world_; }
  const std::vector<Robot>& robots() const { return robots_; }
  const TargetSet& targets() const { return targets_; }
  const std::vector<RobotId>& owner() const { return owner_; }
  const DistributedPhd& phd() const { return phd_; }
  const Network& network() const { return net_; }
  const std::vector<StepMetrics>& metrics() const { return metrics_; }
  const std::vector<PoseRow>& pose_rows() const { return pose_rows_; }
  const std::vector<TargetRow>& target_rows() const { return target_rows_; }
  const std::vector<CommandRow>& command_rows() const { return command_rows_; }
  const std::vector<Snapshot>& snapshots() const { return snapshots_; }
  const std::vector<PhdGrid>& phd_dumps() const { return phd_dumps_; }
  const std::vector<std::string>& warnings() const { return warnings_; }
  std::size_t step_count() const { return step_; }
  std::size_t swap_sweeps() const { return swap_sweeps_; }
  bool done() const { return step_ >= cfg_.steps(); }

  std::vector<Vec2> positions() const {
    std::vector<Vec2> out;
    for (const Robot& r : robots_) out.push_back(r.pose.position);
    return out;
  }

  /// One synchronized round of the distributed control loop.
  void step() {
    const std::size_t k = ++step_;
    const std::size_t n = robots_.size();
    const double dt = cfg_.dt;

    targets_ = cfg_.target_mode == TargetMode::boids ? step_boids(targets_, boids_, world_, dt, target_rng_)
                                                     : step_random(targets_, walk_, world_, dt, target_rng_);
    const std::vector<Vec2> truth = targets_.positions();

    const NeighborGraph graph = build_graph(positions(), cfg_.effective_comm_radius());
    if (!connectivity_check(graph).connected) warn("communication graph disconnected");
    net_.set_graph(graph);

    // Unused capacity from the footprint slices of the current posterior.
    std::vector<FovCells> fovs(n);
    std::vector<double> unused(n), floored(n);
    for (std::size_t i = 0; i < n; ++i) {
      fovs[i] = fov_cells(robots_[i].spec, robots_[i].pose, world_);
      const auto values = phd_.gather(static_cast<RobotId>(i), fovs[i].cells, net_);
      unused[i] = unused_capacity(robots_[i].c_max, expected_capacity(fovs[i].pd, values));
      floored[i] = std::max(unused[i], cfg_.effective_capacity_floor());
    }

    // Generators and weights, broadcast to neighbors.
    std::vector<Vec2> cods(n), generators(n);
    std::vector<double> radii(n);
    for (std::size_t i = 0; i < n; ++i) {
      cods[i] = centroid_of_detection(robots_[i].spec, robots_[i].pose);
      generators[i] = cfg_.method == Method::voronoi || cfg_.method == Method::zigzag ? robots_[i].pose.position
                                                                                      : cods[i];
      radii[i] = power_radius(unused[i]);
    }
    if (cfg_.method != Method::zigzag) broadcast_generators(graph);

    switch (cfg_.method) {
      case Method::zigzag:
        break;
      case Method::voronoi:
      case Method::voronoi_cod:
        owner_ = power_owner(generators, std::vector<double>(n, 0.0), world_);
        break;
      case Method::power_cod:
        owner_ = power_owner(generators, radii, world_);
        break;
      case Method::ccvd_cod: {
        CapacityOptions copt;
        copt.floor = cfg_.effective_capacity_floor();
        copt.consensus.budget = cfg_.consensus_budget;
        const CapacityResult caps = ccvd_capacities(unused, world_.cell_count(), graph, copt, &net_);
        SwapOptions sopt;
        sopt.max_sweeps = cfg_.max_swap_sweeps;
        std::vector<RobotId> start = k == 1 ? initial_assignment(caps.caps, world_.cell_count())
                                            : rebalance_assignment(owner_, caps.caps, centers_, generators);
        SwapResult swap = ccvd_swap(centers_, std::move(start), generators, graph, sopt, &net_);
        swap_sweeps_ += swap.sweeps;
        if (!swap.warning.empty()) warn(swap.warning);
        owner_ = std::move(swap.owner);
        break;
      }
    }

    phd_.repartition(owner_, net_);
    phd_.predict(models_, net_);

    std::vector<MeasurementSet> scans(n);
    std::vector<SensorSpec> specs(n);
    std::vector<RobotState> poses(n);
    for (std::size_t i = 0; i < n; ++i) {
      scans[i] = simulate_measurements(truth, robots_[i].spec, robots_[i].pose, measurement_rng_);
      specs[i] = robots_[i].spec;
      poses[i] = robots_[i].pose;
    }
    exchange_slices(phd_, specs, poses, fovs, scans, models_, net_);
    for (const auto& e : phd_.take_events()) warn("phd exchange dropped (" + e.what + ")");

    // Metrics on the merged posterior.
    const PhdGrid merged = phd_.assemble();
    const std::vector<Vec2> estimates = estimate_targets(merged.values, world_);
    StepMetrics m;
    m.step = k;
    m.t = static_cast<double>(k) * dt;
    m.ospa = ospa(truth, estimates, cfg_.ospa);
    m.truth = truth.size();
    m.estimates = estimates.size();
    m.phd_mass = merged.mass();
    m.unused = unused;
    m.detections.resize(n);
    for (std::size_t i = 0; i < n; ++i) m.detections[i] = scans[i].true_detections();
    std::vector<std::size_t> counts(n, 0);
    for (RobotId r : owner_) ++counts[r];
    const auto stats = area_capacity_stats(counts, floored, world_.cell_area());
    m.ratio = stats.ratio;
    m.area_sd = stats.sd;
    m.area_sd_vc = area_sd_of(power_owner(cods, std::vector<double>(n, 0.0), world_), floored);
    m.area_sd_pc = area_sd_of(power_owner(cods, radii, world_), floored);
    metrics_.push_back(std::move(m));

    // Region centroids from each robot's own slice, then motion.
    std::vector<std::vector<CellIndex>> regions(n);
    for (CellIndex x = 0; x < owner_.size(); ++x) regions[owner_[x]].push_back(x);
    const double deadband = cfg_.deadband_cells * world_.cell_size();
    for (std::size_t i = 0; i < n; ++i) {
      Robot& r = robots_[i];
      ControlCommand cmd;
      if (cfg_.method == Method::zigzag) {
        const Vec2 goal = followers_[i].goal(r.pose.position, world_.cell_size());
        cmd = lloyd_drive(r.pose, goal, dt, deadband);
      } else if (!regions[i].empty()) {
        const Vec2 c = region_mass_centroid(phd_.store(static_cast<RobotId>(i)), regions[i], world_).centroid;
        cmd = cfg_.method == Method::voronoi ? lloyd_drive(r.pose, c, dt, deadband)
                                             : cod_drive(r.pose, r.spec, c, dt, deadband);
      }
      if (cfg_.dump_commands) command_rows_.push_back({k, r.pose.id, cmd});
      r.pose = integrate(r.pose, cmd, dt, world_);
    }

    for (const Robot& r : robots_) pose_rows_.push_back({k, r.pose});
    for (const Target& t : targets_.items) target_rows_.push_back({k, t.id, t.position});
    if (cfg_.snapshot_every > 0 && (k == 1 || k % cfg_.snapshot_every == 0)) snapshots_.push_back({k, owner_});
    if (cfg_.dump_phd) phd_dumps_.push_back(merged);
    net_.ledger().close_step(k);
  }

  void run() {
    while (!done()) step();
  }

 private:
  void warn(const std::string& w) {
    if (warned_.insert(w).second) warnings_.push_back(w);
  }

  double area_sd_of(const std::vector<RobotId>& owner, const std::vector<double>& floored) const {
    std::vector<std::size_t> counts(robots_.size(), 0);
    for (RobotId r : owner) ++counts[r];
    return area_capacity_stats(counts, floored, world_.cell_area()).sd;
  }

  void broadcast_generators(const NeighborGraph& graph) {
    for (std::size_t i = 0; i < robots_.size(); ++i) {
      for (RobotId j : graph.neighbors(static_cast<RobotId>(i))) {
        Message m;
        m.from = static_cast<RobotId>(i);
        m.to = j;
        m.kind = MessageKind::generator;
        m.bytes = payload::generator();
        net_.send(std::move(m));
      }
    }
    net_.deliver();
  }

  void plan_coverage(const std::vector<Vec2>& start) {
    const std::vector<Vec2> sites = centroidal_voronoi(start, world_);
    owner_ = voronoi_partition(sites, world_).owner;
    phd_ = DistributedPhd(world_, robots_.size(), PhdGrid::uniform(world_, cfg_.initial_mass), owner_);
    std::vector<std::vector<CellIndex>> regions(robots_.size());
    for (CellIndex x = 0; x < owner_.size(); ++x) regions[owner_[x]].push_back(x);
    for (std::size_t i = 0; i < robots_.size(); ++i) {
      if (regions[i].empty()) {
        followers_.emplace_back();
        warn("zigzag: robot " + std::to_string(i) + " has an empty coverage cell");
        continue;
      }
      CoveragePath path = plan_zigzag(regions[i], world_, cfg_.zigzag_spacing);
      if (!path.warning.empty()) warn(path.warning);
      followers_.emplace_back(std::move(path));
    }
  }

  ScenarioConfig cfg_;
  GridWorld world_;
  std::vector<Robot> robots_;
  TargetSet targets_;
  BoidsParams boids_;
  RandomWalkParams walk_;
  Rng target_rng_;
  Rng measurement_rng_;
  PhdModels models_;
  DistributedPhd phd_;
  Network net_;
  std::vector<Vec2> centers_;
  std::vector<RobotId> owner_;
  std::vector<PathFollower> followers_;

  std::size_t step_ = 0;
  std::size_t swap_sweeps_ = 0;
  std::vector<StepMetrics> metrics_;
  std::vector<PoseRow> pose_rows_;
  std::vector<TargetRow> target_rows_;
  std::vector<CommandRow> command_rows_;
  std::vector<Snapshot> snapshots_;
  std::vector<PhdGrid> phd_dumps_;
  std::vector<std::string> warnings_;
  std::set<std::string> warned_;
};

// ---------------------------------------------------------------------------
// Run summary and artifacts

struct RunSummary {
  std::string name;
  std::string method;
  std::uint64_t seed = 0;
  std::string status = "ok";
  std::string error;
  std::size_t steps = 0;
  double steady_mean_ospa = 0.0;
  double steady_median_ospa = 0.0;
  double steady_mean_ospa_ma = 0.0;
  double initial_mean_ospa = 0.0;  // first 10 steps
  double steady_area_sd = 0.0;
  double steady_area_sd_vc = 0.0;
  double steady_area_sd_pc = 0.0;
  double total_capacity = 0.0;
  double heterogeneity_eq_g = 0.0;
  double heterogeneity_sqrt = 0.0;
  std::size_t robots = 0;
  std::size_t bytes_sent = 0;
  std::vector<std::string> warnings;
};

inline nlohmann::json to_json(const RunSummary& s) {
  return {{"schema_version", kSummarySchemaVersion},
          {"name", s.name},
          {"method", s.method},
          {"seed", s.seed},
          {"status", s.status},
          {"error", s.error},
          {"steps", s.steps},
          {"robots", s.robots},
          {"steady_state",
           {{"mean_ospa", s.steady_mean_ospa},
            {"median_ospa", s.steady_median_ospa},
            {"mean_ospa_moving_average", s.steady_mean_ospa_ma},
            {"area_capacity_sd", s.steady_area_sd},
            {"area_capacity_sd_vc", s.steady_area_sd_vc},
            {"area_capacity_sd_pc", s.steady_area_sd_pc}}},
          {"initial_mean_ospa", s.initial_mean_ospa},
          {"team", {{"total_capacity", s.total_capacity},
                    {"heterogeneity_eq_g", s.heterogeneity_eq_g},
                    {"heterogeneity_sqrt", s.heterogeneity_sqrt}}},
          {"bytes_sent", s.bytes_sent},
          {"warnings", s.warnings}};
}

inline RunSummary summary_from_json(const nlohmann::json& j) {
  if (j.value("schema_version", 0) != kSummarySchemaVersion) throw ConfigError("summary: unsupported schema_version");
  RunSummary s;
  s.name = j.at("name").get<std::string>();
  s.method = j.at("method").get<std::string>();
  s.seed = j.at("seed").get<std::uint64_t>();
  s.status = j.at("status").get<std::string>();
  s.error = j.value("error", std::string{});
  s.steps = j.at("steps").get<std::size_t>();
  s.robots = j.at("robots").get<std::size_t>();
  const auto& ss = j.at("steady_state");
  s.steady_mean_ospa = ss.at("mean_ospa").get<double>();
  s.steady_median_ospa = ss.at("median_ospa").get<double>();
  s.steady_mean_ospa_ma = ss.at("mean_ospa_moving_average").get<double>();
  s.steady_area_sd = ss.at("area_capacity_sd").get<double>();
  s.steady_area_sd_vc = ss.at("area_capacity_sd_vc").get<double>();
  s.steady_area_sd_pc = ss.at("area_capacity_sd_pc").get<double>();
  s.initial_mean_ospa = j.at("initial_mean_ospa").get<double>();
  const auto& team = j.at("team");
  s.total_capacity = team.at("total_capacity").get<double>();
  s.heterogeneity_eq_g = team.at("heterogeneity_eq_g").get<double>();
  s.heterogeneity_sqrt = team.at("heterogeneity_sqrt").get<double>();
  s.bytes_sent = j.at("bytes_sent").get<std::size_t>();
  s.warnings = j.at("warnings").get<std::vector<std::string>>();
  return s;
}

inline RunSummary summarize(const Simulation& sim) {
  const ScenarioConfig& cfg = sim.config();
  RunSummary s;
  s.name = cfg.name;
  s.method = short_name(cfg.method);
  s.seed = cfg.seed;
  s.steps = sim.step_count();
  s.robots = sim.robots().size();
  s.warnings = sim.warnings();

  std::vector<double> c_max;
  for (const Robot& r : sim.robots()) c_max.push_back(r.c_max);
  s.total_capacity = total_capacity(c_max);
  s.heterogeneity_eq_g = heterogeneity_level(c_max, RadiusConvention::eq_g);
  s.heterogeneity_sqrt = heterogeneity_level(c_max, RadiusConvention::sqrt);
  s.bytes_sent = sim.network().ledger().grand_total_sent();

  const auto& m = sim.metrics();
  if (m.empty()) return s;
  std::vector<double> series;
  for (const auto& row : m) series.push_back(row.ospa);
  const std::vector<double> ma = moving_average(series, cfg.ma_window);
  const std::size_t window = std::clamp<std::size_t>(cfg.steady_steps(), 1, m.size());
  const std::size_t from = m.size() - window;
  std::vector<double> steady(series.begin() + static_cast<std::ptrdiff_t>(from), series.end());
  std::vector<double> steady_ma(ma.begin() + static_cast<std::ptrdiff_t>(from), ma.end());
  std::vector<double> sd, sd_vc, sd_pc;
  for (std::size_t k = from; k < m.size(); ++k) {
    sd.push_back(m[k].area_sd);
    sd_vc.push_back(m[k].area_sd_vc);
    sd_pc.push_back(m[k].area_sd_pc);
  }
  s.steady_mean_ospa = mean_of(steady);
  s.steady_median_ospa = median_of(steady);
  s.steady_mean_ospa_ma = mean_of(steady_ma);
  s.initial_mean_ospa = mean_of(std::span<const double>(series).first(std::min<std::size_t>(10, series.size())));
  s.steady_area_sd = mean_of(sd);
  s.steady_area_sd_vc = mean_of(sd_vc);
  s.steady_area_sd_pc = mean_of(sd_pc);
  return s;
}

struct RunResult {
  RunSummary summary;
  std::string metrics_csv;
  std::string targets_csv;
  std::string robots_csv;
  std::string partitions_csv;
  std::string ledger_csv;
  std::string commands_csv;
  std::string phd_csv;
};

/// Shortest round-trip-stable text for a double; fixed so that reruns are byte identical.
inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

inline std::string metrics_csv(const Simulation& sim) {
  std::ostringstream os;
  const std::size_t n = sim.robots().size();
  os << "step,t,ospa,ospa_ma,truth,estimates,phd_mass,area_sd,area_sd_vc,area_sd_pc";
  for (std::size_t i = 0; i < n; ++i) os << ",U_" << i;
  for (std::size_t i = 0; i < n; ++i) os << ",det_" << i;
  for (std::size_t i = 0; i < n; ++i) os << ",ratio_" << i;
  os << '\n';
  std::vector<double> series;
  for (const auto& m : sim.metrics()) series.push_back(m.ospa);
  const auto ma = moving_average(series, sim.config().ma_window);
  for (std::size_t k = 0; k < sim.metrics().size(); ++k) {
    const StepMetrics& m = sim.metrics()[k];
    os << m.step << ',' << num(m.t) << ',' << num(m.ospa) << ',' << num(ma[k]) << ',' << m.truth << ','
       << m.estimates << ',' << num(m.phd_mass) << ',' << num(m.area_sd) << ',' << num(m.area_sd_vc) << ','
       << num(m.area_sd_pc);
    for (double u : m.unused) os << ',' << num(u);
    for (std::size_t d : m.detections) os << ',' << d;
    for (double r : m.ratio) os << ',' << num(r);
    os << '\n';
  }
  return os.str();
}

inline RunResult collect(const Simulation& sim, RunSummary summary) {
  RunResult r;
  r.summary = std::move(summary);
  r.metrics_csv = metrics_csv(sim);
  const double dt = sim.config().dt;
  {
    std::ostringstream os;
    os << "t,id,x,y\n";
    for (const auto& row : sim.target_rows()) {
      os << num(static_cast<double>(row.step) * dt) << ',' << row.id << ',' << num(row.position.x) << ','
         << num(row.position.y) << '\n';
    }
    r.targets_csv = os.str();
  }
  {
    std::ostringstream os;
    os << "t,id,x,y,theta\n";
    for (const auto& row : sim.pose_rows()) {
      os << num(static_cast<double>(row.step) * dt) << ',' << row.pose.id << ',' << num(row.pose.position.x) << ','
         << num(row.pose.position.y) << ',' << num(row.pose.heading) << '\n';
    }
    r.robots_csv = os.str();
  }
  {
    std::ostringstream os;
    os << "step,cell,owner\n";
    for (const auto& snap : sim.snapshots()) {
      for (CellIndex x = 0; x < snap.owner.size(); ++x) os << snap.step << ',' << x << ',' << snap.owner[x] << '\n';
    }
    r.partitions_csv = os.str();
  }
  {
    std::ostringstream os;
    sim.network().ledger().write_csv(os);
    r.ledger_csv = os.str();
  }
  if (sim.config().dump_commands) {
    std::ostringstream os;
    os << "t,robot,u,omega,goal_x,goal_y\n";
    for (const auto& row : sim.command_rows()) {
      os << num(static_cast<double>(row.step) * dt) << ',' << row.robot << ',' << num(row.cmd.u) << ','
         << num(row.cmd.omega) << ',' << num(row.cmd.goal.x) << ',' << num(row.cmd.goal.y) << '\n';
    }
    r.commands_csv = os.str();
  }
  if (sim.config().dump_phd) {
    std::ostringstream os;
    os << "step,cell,v\n";
    for (std::size_t k = 0; k < sim.phd_dumps().size(); ++k) {
      const auto& g = sim.phd_dumps()[k];
      for (CellIndex x = 0; x < g.size(); ++x) os << (k + 1) << ',' << x << ',' << num(g[x]) << '\n';
    }
    r.phd_csv = os.str();
  }
  return r;
}

/// Runs one scenario to completion. Configuration problems throw ConfigError;
/// a failure mid-run is reported in the summary with the partial outputs.
inline RunResult run_scenario(const ScenarioConfig& cfg, const SensorCatalog& catalog) {
  Simulation sim(cfg, catalog);
  RunSummary failure;
  bool failed = false;
  try {
    sim.run();
  } catch (const RuntimeError& e) {
    failed = true;
    failure.error = e.what();
  } catch (const std::logic_error& e) {
    failed = true;
    failure.error = e.what();
  }
  RunSummary s = summarize(sim);
  if (failed) {
    s.status = "error";
    s.error = "step " + std::to_string(sim.step_count()) + ": " + failure.error;
  }
  return collect(sim, std::move(s));
}

inline RunResult run_scenario(const ScenarioConfig& cfg) {
  return run_scenario(cfg, SensorCatalog::load(cfg.sensor_catalog));
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw RuntimeError("cannot write '" + p.string() + "'");
  out << text;
}

inline void write_run(const RunResult& r, const ScenarioConfig& cfg, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_text(dir / "metrics.csv", r.metrics_csv);
  write_text(dir / "targets.csv", r.targets_csv);
  write_text(dir / "robots.csv", r.robots_csv);
  write_text(dir / "partitions.csv", r.partitions_csv);
  write_text(dir / "ledger.csv", r.ledger_csv);
  if (!r.commands_csv.empty()) write_text(dir / "commands.csv", r.commands_csv);
  if (!r.phd_csv.empty()) write_text(dir / "phd.csv", r.phd_csv);
  write_text(dir / "config.json", to_json(cfg).dump(2) + "\n");
  write_text(dir / "summary.json", to_json(r.summary).dump(2) + "\n");
}

}  // namespace hetmtt
