#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "hetmtt/phd.hpp"
#include "hetmtt/rng.hpp"
#include "oracles.hpp"

using namespace hetmtt;

namespace {

SensorSpec wedge(double gamma_deg, double radius, double pd, double clutter = 0.0) {
  SensorSpec s;
  s.name = "test";
  s.viewing_angle = gamma_deg * kPi / 180.0;
  s.radius = radius;
  s.law = DetectionLaw::constant(pd);
  s.clutter_rate = clutter;
  return s;
}

RobotState pose_at(double x, double y, double heading, RobotId id = 0) {
  RobotState p;
  p.id = id;
  p.position = {x, y};
  p.heading = heading;
  return p;
}

PhdGrid random_grid(const GridWorld& w, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 0.05);
  PhdGrid g(w.cell_count());
  for (auto& v : g.values) v = u(rng);
  return g;
}

}  // namespace

TEST(MotionKernel, NormalizedAndSymmetric) {
  for (double sd : {0.3, 0.5, 1.0, 2.2}) {
    const MotionKernel k(sd, 0.5);
    double total = 0.0;
    for (const auto& t : k.taps()) total += t.weight;
    EXPECT_NEAR(total, 1.0, 1e-12);
    EXPECT_EQ(k.reach(), static_cast<int>(std::floor(3.0 * sd / 0.5)));
    for (const auto& a : k.taps()) {
      bool mirrored = false;
      for (const auto& b : k.taps()) mirrored |= (b.dx == -a.dx && b.dy == -a.dy && b.weight == a.weight);
      EXPECT_TRUE(mirrored);
    }
  }
}

TEST(MotionKernel, SubCellSpreadIsIdentity) {
  const MotionKernel k(0.1, 1.0);
  ASSERT_EQ(k.taps().size(), 1u);
  EXPECT_EQ(k.reach(), 0);
}

TEST(Predict, IdentityCase) {
  const GridWorld w(10.0, 10.0, 10, 10);
  const PhdGrid v = random_grid(w, 1);
  PhdModels m;
  m.survival = 1.0;
  m.birth_per_cell = 0.0;
  m.motion_sd = 0.0;
  EXPECT_EQ(predict(v, m, w).values, v.values);
}

TEST(Predict, BirthOnly) {
  const GridWorld w(10.0, 10.0, 10, 10);
  PhdModels m;
  m.birth_per_cell = 0.003;
  m.motion_sd = 1.0;
  const PhdGrid out = predict(PhdGrid(w.cell_count()), m, w);
  for (double v : out.values) EXPECT_DOUBLE_EQ(v, 0.003);
}

TEST(Predict, SurvivalScalesInteriorMass) {
  const GridWorld w(10.0, 10.0, 10, 10);
  PhdGrid v(w.cell_count());
  v[w.index_of(5, 5)] = 1.0;
  PhdModels m;
  m.survival = 0.99;
  EXPECT_NEAR(predict(v, m, w).mass(), 0.99, 1e-15);
  m.motion_sd = 1.0;
  EXPECT_NEAR(predict(v, m, w).mass(), 0.99, 1e-12);
}

TEST(Predict, BoundaryLosesMass) {
  const GridWorld w(10.0, 10.0, 10, 10);
  PhdGrid v(w.cell_count());
  v[w.index_of(0, 0)] = 1.0;
  PhdModels m;
  m.survival = 1.0;
  m.motion_sd = 1.0;
  EXPECT_LT(predict(v, m, w).mass(), 1.0);
}

TEST(Predict, MatchesNaiveConvolution) {
  const GridWorld w(8.0, 6.0, 16, 12);
  const PhdGrid v = random_grid(w, 2);
  PhdModels m;
  m.survival = 0.97;
  m.birth_per_cell = 1e-3;
  m.motion_sd = 0.8;
  oracle::CentralizedPhd ref(w, v.values);
  ref.predict(m.survival, m.birth_per_cell, m.motion_sd);
  const PhdGrid got = predict(v, m, w);
  for (CellIndex x = 0; x < w.cell_count(); ++x) EXPECT_NEAR(got[x], ref.values()[x], 1e-14);
}

TEST(Update, NoMeasurementsScalesByMissProbability) {
  const GridWorld w(10.0, 10.0, 20, 20);
  const PhdGrid v = random_grid(w, 3);
  const SensorSpec s = wedge(90.0, 3.0, 0.8, 1.0);
  const RobotState p = pose_at(5.0, 5.0, 0.3);
  const PhdGrid out = update(v, PhdModels{}, s, p, MeasurementSet{}, w);
  for (CellIndex x = 0; x < w.cell_count(); ++x) {
    const double pd = detection_prob(s, p, w.cell_center(x));
    EXPECT_DOUBLE_EQ(out[x], (1.0 - pd) * v[x]);
    if (pd == 0.0) EXPECT_EQ(out[x], v[x]);
  }
}

TEST(Update, SingleMeasurementWithoutClutterAddsUnitMassToFootprint) {
  const GridWorld w(10.0, 10.0, 20, 20);
  const PhdGrid v = random_grid(w, 4);
  const SensorSpec s = wedge(120.0, 4.0, 1.0, 0.0);
  const RobotState p = pose_at(5.0, 5.0, 1.0);
  MeasurementSet z;
  z.z.push_back({2.0, 0.1, false});
  const PhdGrid out = update(v, PhdModels{}, s, p, z, w);
  const FovCells fov = fov_cells(s, p, w);
  double in = 0.0;
  for (CellIndex x : fov.cells) in += out[x];
  EXPECT_NEAR(in, 1.0, 1e-12);
}

TEST(Update, MatchesNaiveFilter) {
  const GridWorld w(10.0, 10.0, 20, 20);
  const PhdGrid v = random_grid(w, 5);
  SensorSpec s = wedge(200.0, 4.0, 0.9, 2.0);
  s.law = DetectionLaw::affine(0.95, 0.05);
  const RobotState p = pose_at(4.0, 6.0, -0.7);
  MeasurementSet z;
  z.z = {{1.0, 0.2, false}, {3.5, -1.5, false}, {2.2, 1.6, true}};
  oracle::CentralizedPhd ref(w, v.values);
  ref.update(s, p, z.z);
  const PhdGrid got = update(v, PhdModels{}, s, p, z, w);
  for (CellIndex x = 0; x < w.cell_count(); ++x) EXPECT_NEAR(got[x], ref.values()[x], 1e-12);
}

TEST(Update, FootprintVersionIsBitIdentical) {
  const GridWorld w(10.0, 10.0, 20, 20);
  const PhdGrid v = random_grid(w, 6);
  const SensorSpec s = wedge(270.0, 3.5, 0.95, 1.0);
  const RobotState p = pose_at(2.0, 8.0, 2.0);
  MeasurementSet z;
  z.z = {{1.0, 0.2, false}, {2.5, -1.0, false}};
  const PhdGrid full = update(v, PhdModels{}, s, p, z, w);
  const FovCells fov = fov_cells(s, p, w);
  std::vector<double> slice;
  for (CellIndex x : fov.cells) slice.push_back(v[x]);
  const auto post = update_footprint(fov, slice, PhdModels{}, s, p, z.z, w);
  for (std::size_t k = 0; k < fov.size(); ++k) EXPECT_EQ(post[k], full[fov.cells[k]]);
}

TEST(Measurements, NoTargetsNoClutterIsEmpty) {
  Rng rng(1);
  const auto z = simulate_measurements(std::vector<Vec2>{}, wedge(90.0, 3.0, 0.9, 0.0), pose_at(0, 0, 0), rng);
  EXPECT_TRUE(z.empty());
}

TEST(Measurements, NoiselessCertainDetection) {
  Rng rng(2);
  SensorSpec s = wedge(90.0, 3.0, 1.0, 0.0);
  s.range_noise_sd = 0.0;
  s.bearing_noise_sd = 0.0;
  const std::vector<Vec2> t = {{1.0, 1.0}};
  const auto z = simulate_measurements(t, s, pose_at(0, 0, 0), rng);
  ASSERT_EQ(z.size(), 1u);
  EXPECT_NEAR(z.z[0].range, std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(z.z[0].bearing, kPi / 4.0, 1e-12);
  EXPECT_FALSE(z.z[0].clutter);
}

TEST(Measurements, DetectionFrequencyMatchesProbability) {
  Rng rng = make_stream(42, Stream::measurements);
  const SensorSpec s = wedge(90.0, 3.0, 0.7, 0.0);
  const std::vector<Vec2> t = {{1.5, 0.0}};
  std::size_t hits = 0;
  const std::size_t scans = 100000;
  for (std::size_t k = 0; k < scans; ++k) hits += simulate_measurements(t, s, pose_at(0, 0, 0), rng).size();
  EXPECT_NEAR(static_cast<double>(hits) / scans, 0.7, 0.005);
}

TEST(Measurements, ClutterStaysInsideFootprint) {
  Rng rng(3);
  const SensorSpec s = wedge(60.0, 2.0, 0.9, 5.0);
  std::size_t total = 0;
  for (int k = 0; k < 2000; ++k) {
    for (const auto& m : simulate_measurements(std::vector<Vec2>{}, s, pose_at(0, 0, 0), rng).z) {
      EXPECT_TRUE(m.clutter);
      EXPECT_GT(m.range, 0.0);
      EXPECT_LE(m.range, 2.0);
      EXPECT_LE(std::abs(m.bearing), s.viewing_angle / 2.0);
      ++total;
    }
  }
  EXPECT_NEAR(static_cast<double>(total) / 2000.0, 5.0, 0.25);
}

TEST(ClutterDensity, UniformOverRangeBearing) {
  EXPECT_NEAR(clutter_density(wedge(90.0, 4.0, 1.0, 2.0)), 2.0 / (4.0 * kPi / 2.0), 1e-15);
}

TEST(RngStreams, IndependentAndReproducible) {
  Rng a = make_stream(7, Stream::targets);
  Rng b = make_stream(7, Stream::targets);
  Rng c = make_stream(7, Stream::measurements);
  Rng d = make_stream(8, Stream::targets);
  const auto x = a();
  EXPECT_EQ(x, b());
  EXPECT_NE(x, c());
  EXPECT_NE(x, d());
}
