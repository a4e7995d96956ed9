#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hetmtt/hetmtt.hpp"

namespace {

using namespace hetmtt;

std::vector<double> parse_numbers(const std::string& text) {
  std::vector<double> out;
  std::string s = text;
  for (char& c : s) {
    if (c == ',' || c == ';') c = ' ';
  }
  std::istringstream in(s);
  double v;
  while (in >> v) out.push_back(v);
  if (!in.eof()) throw ConfigError("cannot parse number list '" + text + "'");
  return out;
}

struct RunArgs {
  std::string config;
  std::vector<std::string> overrides;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  std::string method;
  std::optional<double> duration;
  std::optional<double> dt;
  std::optional<double> mu;
  std::optional<std::size_t> targets;
  bool quiet = false;
};

ScenarioConfig resolve_run(const RunArgs& a) {
  std::vector<std::string> overrides = a.overrides;
  if (a.seed) overrides.push_back("seed=" + std::to_string(*a.seed));
  if (!a.method.empty()) overrides.push_back("planner.method=\"" + a.method + "\"");
  if (a.duration) overrides.push_back("time.duration=" + num(*a.duration));
  if (a.dt) overrides.push_back("time.dt=" + num(*a.dt));
  if (a.mu) overrides.push_back("planner.mu=" + num(*a.mu));
  if (a.targets) overrides.push_back("targets.count=" + std::to_string(*a.targets));
  return load_config(a.config, overrides);
}

int cmd_run(const RunArgs& a) {
  const ScenarioConfig cfg = resolve_run(a);
  const RunResult r = run_scenario(cfg);
  write_run(r, cfg, a.out);
  if (!a.quiet) std::cout << to_json(r.summary).dump(2) << "\n";
  if (r.summary.status != "ok") {
    std::cerr << "run failed: " << r.summary.error << "\n";
    return 2;
  }
  return 0;
}

int cmd_batch(const std::string& spec_path, const std::string& out, unsigned jobs) {
  BatchSpec b = batch_from_json(load_json_file(spec_path), std::filesystem::path(spec_path).parent_path());
  if (!out.empty()) b.out_dir = out;
  if (b.out_dir.empty()) b.out_dir = "batch-out";
  if (jobs) b.jobs = jobs;
  const auto runs = run_batch(b);
  std::vector<RunSummary> summaries;
  nlohmann::json all = nlohmann::json::array();
  std::size_t failed = 0;
  for (const auto& r : runs) {
    summaries.push_back(r.summary);
    all.push_back(to_json(r.summary));
    if (r.summary.status != "ok") ++failed;
  }
  std::filesystem::create_directories(b.out_dir);
  write_text(std::filesystem::path(b.out_dir) / "summaries.json", all.dump(2) + "\n");
  const std::string table = aggregate_csv(aggregate(summaries));
  write_text(std::filesystem::path(b.out_dir) / "aggregate.csv", table);
  std::cout << table;
  if (failed) std::cerr << failed << " of " << runs.size() << " runs failed\n";
  return 0;
}

int cmd_aggregate(const std::string& summaries_path) {
  const nlohmann::json doc = load_json_file(summaries_path);
  std::vector<RunSummary> summaries;
  for (const auto& j : doc) summaries.push_back(summary_from_json(j));
  std::cout << aggregate_csv(aggregate(summaries));
  return 0;
}

int cmd_capacity_table(const std::string& catalog_path, const std::string& teams_path) {
  const SensorCatalog cat = SensorCatalog::load(catalog_path);
  std::printf("%-8s %8s %10s %12s %12s %12s %9s %9s\n", "sensor", "angle", "radius", "mu/|B|", "C_max(p_d)",
              "C_max(p_d=1)", "printed", "dev%");
  for (const auto& e : cat.entries()) {
    if (!e.reference) continue;
    const double k = e.reference->mu_over_area;
    const double lit = max_capacity(e.spec, k, CapacityConvention::eq9);
    const double unit = max_capacity(e.spec, k, CapacityConvention::unit_pd);
    const double used = e.reference->convention == CapacityConvention::eq9 ? lit : unit;
    const double dev = 100.0 * (used - e.reference->c_max) / e.reference->c_max;
    std::string note;
    if (e.reference->convention == CapacityConvention::unit_pd) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "  printed value matches p_d = 1; literal differs by %+.2f%%",
                    100.0 * (lit - e.reference->c_max) / e.reference->c_max);
      note = buf;
    }
    std::printf("%-8s %8.1f %10.4f %12.3f %12.4f %12.4f %9.3f %+9.3f%s\n", e.spec.name.c_str(),
                e.spec.viewing_angle * 180.0 / kPi, e.spec.radius, k, lit, unit, e.reference->c_max, dev,
                note.c_str());
  }
  if (teams_path.empty()) return 0;
  std::printf("\n%-6s %10s %12s %12s   composition (per-type C_max as recomputed above)\n", "team", "C(S)",
              "L sqrt(C/pi)", "L sqrt(C)");
  for (const auto& t : load_teams(teams_path)) {
    std::vector<double> c;
    std::string comp;
    for (const auto& m : t.team) {
      const auto& e = cat.entry(m.sensor);
      const double v = e.reference ? max_capacity(e.spec, e.reference->mu_over_area, e.reference->convention)
                                    : max_capacity(e.spec, 1.0, 1.0);
      for (std::size_t k = 0; k < m.count; ++k) c.push_back(v);
      comp += std::to_string(m.count) + "x" + m.sensor + " ";
    }
    std::printf("%-6s %10.2f %12.3f %12.3f   %s\n", t.name.c_str(), total_capacity(c),
                heterogeneity_level(c, RadiusConvention::eq_g), heterogeneity_level(c, RadiusConvention::sqrt),
                comp.c_str());
  }
  return 0;
}

int cmd_partition_demo(const std::string& sites_text, const std::string& weights_text,
                       const std::vector<double>& size, double cell, const std::string& mode,
                       const std::string& caps_text) {
  const auto coords = parse_numbers(sites_text);
  if (coords.empty() || coords.size() % 2 != 0) throw ConfigError("--sites needs x,y pairs");
  std::vector<Vec2> sites;
  for (std::size_t k = 0; k < coords.size(); k += 2) sites.push_back({coords[k], coords[k + 1]});
  const GridWorld world = GridWorld::with_cell_size(size.at(0), size.at(1), cell);
  std::vector<RobotId> owner;
  if (mode == "ccvd") {
    const auto raw = parse_numbers(caps_text);
    if (raw.size() != sites.size()) throw ConfigError("--capacities needs one value per site");
    const auto caps = largest_remainder(raw, world.cell_count());
    const auto r = ccvd_swap(cell_centers(world), initial_assignment(caps, world.cell_count()), sites,
                             NeighborGraph::complete(sites.size()), {});
    owner = r.owner;
    std::cout << "sweeps " << r.sweeps << ", cells moved " << r.cells_moved << "\n";
  } else {
    std::vector<double> w = mode == "voronoi" ? std::vector<double>(sites.size(), 0.0) : parse_numbers(weights_text);
    if (w.size() != sites.size()) throw ConfigError("--weights needs one value per site");
    owner = power_owner(sites, w, world);
  }
  std::vector<std::size_t> counts(sites.size(), 0);
  for (RobotId r : owner) ++counts[r];
  for (std::size_t i = 0; i < sites.size(); ++i) std::cout << "site " << i << ": " << counts[i] << " cells\n";
  if (world.cells_x() <= 120) {
    for (int row = world.cells_y() - 1; row >= 0; --row) {
      for (int col = 0; col < world.cells_x(); ++col) {
        const RobotId r = owner[world.index_of(col, row)];
        std::cout << static_cast<char>(r < 10 ? '0' + r : (r < 36 ? 'a' + (r - 10) : '*'));
      }
      std::cout << "\n";
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Heterogeneous multi-robot target tracking simulator"};
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Run one scenario and write its artifacts");
  run_cmd->add_option("-c,--config", run.config, "Scenario config (JSON); defaults when omitted");
  run_cmd->add_option("--set", run.overrides, "Override a config field, e.g. planner.method=CC")->take_all();
  run_cmd->add_option("-o,--out", run.out, "Output directory");
  run_cmd->add_option("--seed", run.seed);
  run_cmd->add_option("--method", run.method, "Z, V, VC, PC or CC");
  run_cmd->add_option("--duration", run.duration, "Seconds");
  run_cmd->add_option("--dt", run.dt, "Seconds per step");
  run_cmd->add_option("--mu", run.mu);
  run_cmd->add_option("--targets", run.targets, "Initial target count");
  run_cmd->add_flag("-q,--quiet", run.quiet, "Do not print the summary");

  std::string batch_spec, batch_out;
  unsigned jobs = 0;
  auto* batch_cmd = app.add_subcommand("batch", "Run a sweep and aggregate steady-state OSPA");
  batch_cmd->add_option("spec", batch_spec, "Batch spec (JSON)")->required();
  batch_cmd->add_option("-o,--out", batch_out, "Output directory");
  batch_cmd->add_option("-j,--jobs", jobs, "Parallel runs (0: all cores)");

  std::string summaries;
  auto* agg_cmd = app.add_subcommand("aggregate", "Re-aggregate a batch from its summaries.json");
  agg_cmd->add_option("summaries", summaries)->required();

  std::string catalog = std::string(HETMTT_DATA_DIR) + "/sensors.json";
  std::string teams = std::string(HETMTT_DATA_DIR) + "/teams.json";
  auto* cap_cmd = app.add_subcommand("capacity-table", "Recompute sensor capacities and team statistics");
  cap_cmd->add_option("--catalog", catalog);
  cap_cmd->add_option("--teams", teams, "Team compositions; empty to skip");

  std::string sites, weights, caps, mode = "power";
  std::vector<double> size = {10.0, 10.0};
  double cell = 1.0;
  auto* part_cmd = app.add_subcommand("partition-demo", "Partition a grid for given sites");
  part_cmd->add_option("--sites", sites, "x,y pairs, e.g. \"1,1;8,3\"")->required();
  part_cmd->add_option("--weights", weights, "Power radii, one per site");
  part_cmd->add_option("--capacities", caps, "Relative capacities for --mode ccvd");
  part_cmd->add_option("--mode", mode)->check(CLI::IsMember({"power", "voronoi", "ccvd"}));
  part_cmd->add_option("--size", size, "Width height")->expected(2);
  part_cmd->add_option("--cell", cell);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*run_cmd) return cmd_run(run);
    if (*batch_cmd) return cmd_batch(batch_spec, batch_out, jobs);
    if (*agg_cmd) return cmd_aggregate(summaries);
    if (*cap_cmd) return cmd_capacity_table(catalog, teams);
    if (*part_cmd) return cmd_partition_demo(sites, weights, size, cell, mode, caps);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
