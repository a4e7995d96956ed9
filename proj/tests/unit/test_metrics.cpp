#include <gtest/gtest.h>

#include <random>

#include "hetmtt/catalog.hpp"
#include "hetmtt/config.hpp"
#include "hetmtt/metrics.hpp"
#include "oracles.hpp"

using namespace hetmtt;

namespace {

std::vector<double> team_capacities(const std::string& team) {
  const auto cat = SensorCatalog::load(std::string(HETMTT_DATA_DIR) + "/sensors.json");
  for (const auto& t : load_teams(std::string(HETMTT_DATA_DIR) + "/teams.json")) {
    if (t.name != team) continue;
    std::vector<double> c;
    for (const auto& m : t.team)
      for (std::size_t k = 0; k < m.count; ++k) c.push_back(cat.entry(m.sensor).reference->c_max);
    return c;
  }
  throw std::runtime_error("no team " + team);
}

}  // namespace

TEST(Ospa, IdentityIsZero) {
  const std::vector<Vec2> x = {{1, 2}, {3, 4}, {-1, 0}};
  EXPECT_EQ(ospa(x, x, {1.0, 3.0}), 0.0);
  EXPECT_EQ(ospa({}, {}, {1.0, 3.0}), 0.0);
}

TEST(Ospa, EmptyVersusOneIsCutoff) {
  const std::vector<Vec2> y = {{7, 7}};
  EXPECT_DOUBLE_EQ(ospa({}, y, {1.0, 3.0}), 3.0);
  EXPECT_DOUBLE_EQ(ospa(y, {}, {2.0, 1.0}), 1.0);
}

TEST(Ospa, CardinalityPenaltyCase) {
  const std::vector<Vec2> x = {{0, 0}};
  const std::vector<Vec2> y = {{1, 0}, {5, 0}};
  EXPECT_DOUBLE_EQ(ospa(x, y, {1.0, 3.0}), 2.0);
  EXPECT_DOUBLE_EQ(ospa(y, x, {1.0, 3.0}), 2.0);
}

TEST(Ospa, MatchesBruteForce) {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  std::uniform_int_distribution<int> card(0, 6);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Vec2> x(card(rng)), y(card(rng));
    for (auto& p : x) p = {u(rng), u(rng)};
    for (auto& p : y) p = {u(rng), u(rng)};
    for (double p : {1.0, 2.0})
      for (double c : {1.0, 3.0}) ASSERT_EQ(ospa(x, y, {p, c}), oracle::ospa(x, y, p, c));
  }
}

TEST(Ospa, RejectsBadParams) {
  EXPECT_THROW(ospa({}, {}, {0.5, 3.0}), std::invalid_argument);
  EXPECT_THROW(ospa({}, {}, {1.0, 0.0}), std::invalid_argument);
}

TEST(Hungarian, RectangularAssignment) {
  const std::vector<std::vector<double>> cost = {{4, 1, 3}, {2, 1, 5}};
  const auto a = hungarian(cost);
  EXPECT_EQ(a[0], 1u);
  EXPECT_EQ(a[1], 0u);
}

TEST(Estimates, ZeroPhdIsEmpty) {
  const GridWorld w(10.0, 10.0, 10, 10);
  EXPECT_TRUE(estimate_targets(std::vector<double>(100, 0.0), w).empty());
}

TEST(Estimates, UnitMassInOneCell) {
  const GridWorld w(10.0, 10.0, 10, 10);
  std::vector<double> v(100, 0.0);
  v[w.index_of(3, 6)] = 1.0;
  const auto e = estimate_targets(v, w);
  ASSERT_EQ(e.size(), 1u);
  EXPECT_DOUBLE_EQ(e[0].x, 3.5);
  EXPECT_DOUBLE_EQ(e[0].y, 6.5);
}

TEST(Estimates, TwoSeparatedBlobs) {
  const GridWorld w(20.0, 20.0, 20, 20);
  std::vector<double> v(w.cell_count(), 0.0);
  auto blob = [&](int c, int r) {
    v[w.index_of(c, r)] += 0.6;
    v[w.index_of(c + 1, r)] += 0.2;
    v[w.index_of(c, r + 1)] += 0.2;
  };
  blob(3, 3);
  blob(15, 12);
  auto e = estimate_targets(v, w);
  ASSERT_EQ(e.size(), 2u);
  std::sort(e.begin(), e.end(), [](Vec2 a, Vec2 b) { return a.x < b.x; });
  EXPECT_LE(distance(e[0], {3.7, 3.7}), 1.0);
  EXPECT_LE(distance(e[1], {15.7, 12.7}), 1.0);
}

TEST(Heterogeneity, EqualCapacitiesGiveZero) {
  const std::vector<double> c(5, 24.88);
  EXPECT_NEAR(heterogeneity_level(c, RadiusConvention::sqrt), 0.0, 1e-12);
  EXPECT_NEAR(heterogeneity_level(c), 0.0, 1e-12);
}

TEST(Heterogeneity, PublishedTeams) {
  EXPECT_NEAR(heterogeneity_level(team_capacities("S4"), RadiusConvention::sqrt), 6.15, 0.01);
  EXPECT_NEAR(heterogeneity_level(team_capacities("S6"), RadiusConvention::sqrt), 3.16, 0.01);
  EXPECT_NEAR(heterogeneity_level(team_capacities("S5"), RadiusConvention::sqrt), 4.9, 0.1);
}

TEST(Heterogeneity, ConventionsDifferByRootPi) {
  const std::vector<double> c = {10.0, 40.0, 90.0};
  EXPECT_NEAR(heterogeneity_level(c, RadiusConvention::sqrt),
              std::sqrt(kPi) * heterogeneity_level(c, RadiusConvention::eq_g), 1e-12);
}

TEST(AreaStats, SingleRobotZero) {
  const std::vector<std::size_t> cells = {100};
  const std::vector<double> u = {3.0};
  EXPECT_EQ(area_capacity_stats(cells, u, 1.0).sd, 0.0);
}

TEST(AreaStats, SixtyForty) {
  const std::vector<std::size_t> cells = {60, 40};
  const std::vector<double> u = {2.0, 2.0};
  const auto s = area_capacity_stats(cells, u, 1.0);
  EXPECT_DOUBLE_EQ(s.ratio[0], 30.0);
  EXPECT_DOUBLE_EQ(s.ratio[1], 20.0);
  EXPECT_DOUBLE_EQ(s.sd, 5.0);
}

TEST(AreaStats, ProportionalAreasGiveZero) {
  const std::vector<std::size_t> cells = {25, 75};
  const std::vector<double> u = {1.0, 3.0};
  EXPECT_EQ(area_capacity_stats(cells, u, 1.0).sd, 0.0);
}

TEST(MovingAverage, Cases) {
  const std::vector<double> s = {0, 10, 20};
  EXPECT_EQ(moving_average(s), (std::vector<double>{0, 5, 10}));
  EXPECT_EQ(moving_average(s, 1), s);
  const std::vector<double> flat(9, 4.0);
  EXPECT_EQ(moving_average(flat), flat);
  EXPECT_THROW(moving_average(s, 0), std::invalid_argument);
}

TEST(Stats, Quantiles) {
  EXPECT_DOUBLE_EQ(median_of({3, 1, 2}), 2.0);
  EXPECT_DOUBLE_EQ(median_of({4, 1, 2, 3}), 2.5);
  EXPECT_DOUBLE_EQ(quantile_of({1, 2, 3, 4, 5}, 0.25), 2.0);
  EXPECT_DOUBLE_EQ(mean_of({}), 0.0);
}
