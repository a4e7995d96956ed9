#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <numeric>

#include "hetmtt/batch.hpp"
#include "hetmtt/config.hpp"
#include "hetmtt/simulation.hpp"

using namespace hetmtt;

namespace {

const std::string kConfigs = std::string(HETMTT_DATA_DIR) + "/../configs/";

ScenarioConfig small(const std::string& method, std::uint64_t seed = 3) {
  return load_config("", {"world.width=20", "world.height=20", "robots.team=[{\"sensor\":\"A\",\"count\":3},"
                                                                "{\"sensor\":\"E\",\"count\":1}]",
                          "targets.count=6", "planner.method=\"" + method + "\"", "time.duration=15",
                          "time.steady_window=10", "seed=" + std::to_string(seed)});
}

}  // namespace

TEST(Config, DefaultsValidate) {
  const ScenarioConfig c = load_config("");
  EXPECT_EQ(c.robot_count(), 18u);
  EXPECT_EQ(c.steps(), 700u);
  EXPECT_EQ(c.steady_steps(), 400u);
  EXPECT_NEAR(c.effective_comm_radius(), std::hypot(100.0, 100.0), 1e-12);
}

TEST(Config, UnknownKeysRejected) {
  nlohmann::json doc = to_json(ScenarioConfig{});
  doc["planner"]["mehtod"] = "CC";
  EXPECT_THROW(config_from_json(doc), ConfigError);
  doc = to_json(ScenarioConfig{});
  doc["extra"] = 1;
  EXPECT_THROW(config_from_json(doc), ConfigError);
}

TEST(Config, RoundTripsThroughJson) {
  const ScenarioConfig a = load_config(kConfigs + "turtlebot.json");
  const ScenarioConfig b = config_from_json(to_json(a));
  EXPECT_EQ(to_json(a).dump(), to_json(b).dump());
}

TEST(Config, OverridesApply) {
  const ScenarioConfig c = load_config(kConfigs + "s4.json", {"planner.method=V", "seed=9", "time.dt=0.5"});
  EXPECT_EQ(c.method, Method::voronoi);
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.steps(), 1400u);
  EXPECT_THROW(load_config("", {"noequals"}), ConfigError);
}

TEST(Config, InvalidValuesRejected) {
  EXPECT_THROW(load_config("", {"time.dt=0"}), ConfigError);
  EXPECT_THROW(load_config("", {"planner.mu=-1"}), ConfigError);
  EXPECT_THROW(load_config("", {"planner.method=\"XX\""}), ConfigError);
  EXPECT_THROW(load_config("", {"world.cell_size=3"}), ConfigError);
  EXPECT_THROW(load_config("/nonexistent.json"), ConfigError);
}

TEST(Config, TeamsFile) {
  const auto teams = load_teams(std::string(HETMTT_DATA_DIR) + "/teams.json");
  ASSERT_EQ(teams.size(), 6u);
  EXPECT_EQ(teams[3].name, "S4");
}

TEST(Simulation, S4Seed7CcSummaryHasSteadyOspa) {
  const ScenarioConfig c = load_config(kConfigs + "s4.json", {"seed=7", "time.duration=20"});
  const RunResult r = run_scenario(c);
  const auto j = to_json(r.summary);
  ASSERT_EQ(r.summary.status, "ok");
  ASSERT_TRUE(j.contains("steady_state"));
  ASSERT_TRUE(j["steady_state"].contains("mean_ospa"));
  EXPECT_GT(j["steady_state"]["mean_ospa"].get<double>(), 0.0);
  EXPECT_EQ(j["method"], "CC");
  EXPECT_NO_THROW(summary_from_json(j));
}

TEST(Simulation, ZeroDurationGivesEmptySeries) {
  const RunResult r = run_scenario(load_config("", {"time.duration=0"}));
  EXPECT_EQ(r.summary.status, "ok");
  EXPECT_EQ(r.summary.steps, 0u);
  EXPECT_EQ(std::count(r.metrics_csv.begin(), r.metrics_csv.end(), '\n'), 1);
}

TEST(Simulation, RerunIsByteIdentical) {
  for (const char* m : {"Z", "V", "VC", "PC", "CC"}) {
    const RunResult a = run_scenario(small(m));
    const RunResult b = run_scenario(small(m));
    ASSERT_EQ(a.summary.status, "ok") << a.summary.error;
    EXPECT_EQ(a.metrics_csv, b.metrics_csv) << m;
    EXPECT_EQ(a.robots_csv, b.robots_csv) << m;
    EXPECT_EQ(a.targets_csv, b.targets_csv) << m;
    EXPECT_EQ(a.partitions_csv, b.partitions_csv) << m;
    EXPECT_EQ(a.ledger_csv, b.ledger_csv) << m;
  }
}

TEST(Simulation, SeedsDiffer) {
  EXPECT_NE(run_scenario(small("V", 1)).metrics_csv, run_scenario(small("V", 2)).metrics_csv);
}

TEST(Simulation, SingleRobotVoronoiDrivesToPhdCentroid) {
  ScenarioConfig c = small("V");
  c.team = {{"A", 1}};
  c.dump_commands = true;
  Simulation sim(c, SensorCatalog::load(c.sensor_catalog));
  sim.step();
  ASSERT_EQ(sim.command_rows().size(), 1u);
  std::vector<CellIndex> all(sim.world().cell_count());
  for (CellIndex x = 0; x < all.size(); ++x) all[x] = x;
  const Vec2 want = region_mass_centroid(sim.phd().store(0), all, sim.world()).centroid;
  EXPECT_EQ(sim.command_rows()[0].cmd.goal, want);
}

TEST(Simulation, CcPartitionMatchesCapacities) {
  ScenarioConfig c = small("CC");
  Simulation sim(c, SensorCatalog::load(c.sensor_catalog));
  for (int k = 0; k < 5; ++k) {
    sim.step();
    const auto& m = sim.metrics().back();
    std::vector<std::size_t> counts(sim.robots().size(), 0);
    for (RobotId r : sim.owner()) ++counts[r];
    std::vector<double> floored;
    for (double u : m.unused) floored.push_back(std::max(u, c.effective_capacity_floor()));
    const double u_sum = std::accumulate(floored.begin(), floored.end(), 0.0);
    for (std::size_t i = 0; i < counts.size(); ++i) {
      EXPECT_GE(counts[i], 1u);
      EXPECT_NEAR(static_cast<double>(counts[i]), floored[i] / u_sum * 400.0, 1.0 + 1e-6);
    }
  }
}

TEST(Simulation, ArtifactsWritten) {
  const auto dir = std::filesystem::temp_directory_path() / "hetmtt-artifacts-test";
  std::filesystem::remove_all(dir);
  const ScenarioConfig c = small("PC");
  write_run(run_scenario(c), c, dir);
  for (const char* f : {"metrics.csv", "targets.csv", "robots.csv", "partitions.csv", "ledger.csv", "config.json",
                        "summary.json"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
  }
  std::filesystem::remove_all(dir);
}

TEST(Batch, TwoMethodsTwoSeeds) {
  nlohmann::json spec = {{"base", to_json(small("V"))},
                         {"grid", {{"planner.method", {"V", "CC"}}}},
                         {"seeds", 2},
                         {"jobs", 1}};
  const BatchSpec b = batch_from_json(spec);
  const auto runs = run_batch(b);
  ASSERT_EQ(runs.size(), 4u);
  std::vector<RunSummary> s;
  for (const auto& r : runs) {
    EXPECT_EQ(r.summary.status, "ok");
    s.push_back(r.summary);
  }
  const auto rows = aggregate(s);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].method, "V");
  EXPECT_EQ(rows[1].method, "CC");
  EXPECT_EQ(rows[0].runs, 2u);
  // Re-aggregating the same summaries is a pure function.
  EXPECT_EQ(aggregate_csv(rows), aggregate_csv(aggregate(s)));
}

TEST(Batch, UnknownKeyRejected) {
  EXPECT_THROW(batch_from_json({{"base", nlohmann::json::object()}, {"seeds", 1}, {"sedes", 1}}), ConfigError);
}

TEST(Batch, AggregateCountsFailuresAndSampleStd) {
  std::vector<RunSummary> s(4);
  const double ospa[] = {1.0, 2.0, 3.0, 0.0};
  for (int k = 0; k < 4; ++k) {
    s[k].name = "cell";
    s[k].method = "V";
    s[k].steady_mean_ospa = ospa[k];
  }
  s[3].status = "error";
  const auto rows = aggregate(s);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].failed, 1u);
  EXPECT_DOUBLE_EQ(rows[0].median, 2.0);
  EXPECT_DOUBLE_EQ(rows[0].std, 1.0);
}

TEST(Batch, HeterogeneityColumn) {
  std::vector<RunSummary> s;
  for (const char* team : {"S4", "S6"}) {
    const ScenarioConfig c = load_config(kConfigs + std::string(team == std::string("S4") ? "s4.json" : "s6.json"),
                                         {"time.duration=0"});
    RunSummary r = run_scenario(c).summary;
    r.name = team;
    s.push_back(r);
  }
  const auto rows = aggregate(s);
  EXPECT_NEAR(rows[0].heterogeneity_sqrt, 6.1, 0.1);
  EXPECT_NEAR(rows[1].heterogeneity_sqrt, 3.1, 0.1);
  EXPECT_NE(aggregate_csv(rows).find("heterogeneity_sqrt"), std::string::npos);
}
