#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "hetmtt/catalog.hpp"
#include "hetmtt/sensors.hpp"
#include "oracles.hpp"

using namespace hetmtt;

namespace {

const SensorCatalog& catalog() {
  static const SensorCatalog cat = SensorCatalog::load(std::string(HETMTT_DATA_DIR) + "/sensors.json");
  return cat;
}

RobotState origin_pose(double heading = 0.0) {
  RobotState p;
  p.heading = heading;
  return p;
}

}  // namespace

TEST(DetectionProb, ConstantWedgeInsideAndBeyondRadius) {
  const SensorSpec& s = catalog().spec("tb3-3");
  EXPECT_DOUBLE_EQ(detection_prob(s, origin_pose(), {1.0, 0.0}), 0.99);
  EXPECT_DOUBLE_EQ(detection_prob(s, origin_pose(), {3.1, 0.0}), 0.0);
}

TEST(DetectionProb, AffineLawInsideWedge) {
  const SensorSpec& s = catalog().spec("tb3-1");
  EXPECT_NEAR(detection_prob(s, origin_pose(), {0.0, 2.0}), 0.79, 1e-12);
}

TEST(DetectionProb, OutsideViewingAngle) {
  const SensorSpec& s = catalog().spec("tb3-3");
  EXPECT_DOUBLE_EQ(detection_prob(s, origin_pose(), {-1.0, 0.0}), 0.0);
  EXPECT_DOUBLE_EQ(detection_prob(s, origin_pose(), {1.0, 1.01}), 0.0);
  EXPECT_DOUBLE_EQ(detection_prob(s, origin_pose(), {1.0, 0.99}), 0.99);
}

TEST(Capability, MatchesIndependentQuadratureForEveryCatalogEntry) {
  for (const auto& e : catalog().entries()) {
    const double got = detection_capability(e.spec);
    EXPECT_NEAR(got, oracle::capability(e.spec), 1e-6 * got) << e.spec.name;
    EXPECT_NEAR(got, oracle::capability_closed(e.spec), 1e-9 * got) << e.spec.name;
  }
}

TEST(Capability, TypeOneAndTypeA) {
  EXPECT_NEAR(detection_capability(catalog().spec("tb3-1")), 16.75, 0.01);
  EXPECT_NEAR(max_capacity(catalog().spec("tb3-1"), 0.1, 1.0), 1.675, 0.001);
  EXPECT_NEAR(detection_capability(catalog().spec("A")), 24.88, 0.01);
  EXPECT_NEAR(detection_capability(catalog().spec("A")), 0.99 * (kPi / 8.0) * 64.0, 1e-9);
}

TEST(Capability, EmptyFieldOfView) {
  SensorSpec s = catalog().spec("A");
  s.viewing_angle = 0.0;
  EXPECT_EQ(detection_capability(s), 0.0);
  s = catalog().spec("A");
  s.radius = 0.0;
  EXPECT_EQ(detection_capability(s), 0.0);
}

TEST(MaxCapacity, TypeTwoAgainstQuadratureOracle) {
  const SensorSpec& s = catalog().spec("tb3-2");
  const double expect = 0.1 * oracle::capability(s);
  EXPECT_NEAR(expect, 2.420, 0.0005);
  EXPECT_NEAR(max_capacity(s, 0.1, 1.0), expect, 1e-6);
  EXPECT_NEAR(max_capacity(s, 0.1, 1.0), 2.422, 0.001 * 2.422);
}

TEST(MaxCapacity, ZeroMuGivesZero) { EXPECT_EQ(max_capacity(catalog().spec("A"), 0.0, 1.0), 0.0); }

TEST(MaxCapacity, TypeDUnderUnitDetectionReading) {
  EXPECT_NEAR(max_capacity(catalog().spec("D"), 1.0, CapacityConvention::unit_pd), 300.86, 0.005 * 300.86);
}

TEST(MaxCapacity, TargetAreaScalesInversely) {
  const SensorSpec& s = catalog().spec("B");
  EXPECT_NEAR(max_capacity(s, 1.0, 0.25), 4.0 * max_capacity(s, 1.0, 1.0), 1e-9);
}

TEST(ExpectedCapacity, UniformDensityConstantLaw) {
  const std::vector<double> pd(7, 0.9);
  const std::vector<double> v(7, 0.3);
  EXPECT_NEAR(expected_capacity(pd, v), 0.9, 1e-12);
}

TEST(ExpectedCapacity, ZeroMassIsZero) {
  const std::vector<double> pd(5, 0.9);
  const std::vector<double> v(5, 0.0);
  EXPECT_EQ(expected_capacity(pd, v), 0.0);
}

TEST(ExpectedCapacity, SingleLoadedCell) {
  const std::vector<double> pd = {0.9, 0.5, 0.2};
  const std::vector<double> v = {0.0, 2.0, 0.0};
  EXPECT_NEAR(expected_capacity(pd, v), 0.5, 1e-12);
}

TEST(UnusedCapacity, Cases) {
  const double cmax_a = max_capacity(catalog().spec("A"), 1.0, 1.0);
  EXPECT_NEAR(unused_capacity(cmax_a, 0.0), 24.88, 0.01);
  EXPECT_EQ(unused_capacity(cmax_a, cmax_a), 0.0);
  const double cmax_5 = max_capacity(catalog().spec("tb3-5"), 0.1, 1.0);
  EXPECT_NEAR(unused_capacity(cmax_5, 0.5), 0.744, 0.0005);
  EXPECT_NEAR(unused_capacity(cmax_5, 0.5), 0.1 * oracle::capability(catalog().spec("tb3-5")) - 0.5, 1e-6);
}

TEST(CentroidOfDetection, FullCircleIsPosition) {
  RobotState p = origin_pose(1.2);
  p.position = {3.0, 4.0};
  const Vec2 c = centroid_of_detection(catalog().spec("tb3-5"), p);
  EXPECT_NEAR(c.x, 3.0, 1e-12);
  EXPECT_NEAR(c.y, 4.0, 1e-12);
}

TEST(CentroidOfDetection, QuarterWedgeMatchesSectorCentroid) {
  SensorSpec s = catalog().spec("tb3-3");
  const Vec2 c = centroid_of_detection(s, origin_pose());
  const double gamma = kPi / 2.0;
  EXPECT_NEAR(c.x, 4.0 * 3.0 * std::sin(gamma / 2.0) / (3.0 * gamma), 1e-9);
  EXPECT_NEAR(c.x, 1.801, 0.0005);
  EXPECT_NEAR(c.y, 0.0, 1e-12);
}

TEST(CentroidOfDetection, AffineLawAgainstPolarQuadrature) {
  const SensorSpec& s = catalog().spec("tb3-1");
  const int nr = 2000, nt = 2000;
  double m = 0.0, mx = 0.0;
  for (int i = 0; i < nr; ++i) {
    const double r = (i + 0.5) * s.radius / nr;
    for (int j = 0; j < nt; ++j) {
      const double t = -s.viewing_angle / 2.0 + (j + 0.5) * s.viewing_angle / nt;
      const double w = s.law(r) * r;
      m += w;
      mx += w * r * std::cos(t);
    }
  }
  const Vec2 c = centroid_of_detection(s, origin_pose());
  EXPECT_NEAR(c.x, mx / m, 1e-4);
}

TEST(CentroidOfDetection, RotatesWithHeading) {
  const SensorSpec& s = catalog().spec("A");
  RobotState p = origin_pose();
  p.position = {10.0, 20.0};
  const Vec2 c0 = centroid_of_detection(s, p);
  for (double th : {0.3, 1.7, -2.5}) {
    p.heading = th;
    const Vec2 c = centroid_of_detection(s, p);
    const Vec2 expect = rotate_about(c0, p.position, th);
    EXPECT_NEAR(c.x, expect.x, 1e-9);
    EXPECT_NEAR(c.y, expect.y, 1e-9);
  }
}

TEST(PowerRadius, Cases) {
  EXPECT_NEAR(power_radius(kPi), 1.0, 1e-12);
  EXPECT_EQ(power_radius(0.0), 0.0);
  EXPECT_NEAR(power_radius(24.88), 2.814, 0.0005);
}

TEST(FovCells, MatchesBruteForceOverGrid) {
  const GridWorld w(20.0, 20.0, 40, 40);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (const auto& e : catalog().entries()) {
    RobotState p;
    p.position = {20.0 * u(rng), 20.0 * u(rng)};
    p.heading = wrap_angle(kTwoPi * u(rng));
    const FovCells f = fov_cells(e.spec, p, w);
    std::vector<CellIndex> expect;
    for (CellIndex x = 0; x < w.cell_count(); ++x) {
      const Vec2 c = w.cell_center(x);
      const double r = std::hypot(c.x - p.position.x, c.y - p.position.y);
      const double b = std::remainder(std::atan2(c.y - p.position.y, c.x - p.position.x) - p.heading, kTwoPi);
      if (r <= e.spec.radius && (e.spec.viewing_angle >= kTwoPi || std::abs(b) <= e.spec.viewing_angle / 2.0)) {
        expect.push_back(x);
      }
    }
    EXPECT_EQ(f.cells, expect) << e.spec.name;
    for (std::size_t k = 0; k < f.size(); ++k) {
      EXPECT_DOUBLE_EQ(f.pd[k], detection_prob(e.spec, p, w.cell_center(f.cells[k])));
    }
  }
}

TEST(Catalog, RejectsUnknownLawAndDuplicates) {
  nlohmann::json doc = {{"sensors",
                         {{{"name", "x"},
                           {"viewing_angle_deg", 90},
                           {"radius", 1},
                           {"detection", {{"law", "cubic"}, {"intercept", 0.5}}}}}}};
  EXPECT_THROW(SensorCatalog::from_json(doc), ConfigError);
  doc["sensors"][0]["detection"]["law"] = "constant";
  doc["sensors"].push_back(doc["sensors"][0]);
  EXPECT_THROW(SensorCatalog::from_json(doc), ConfigError);
}

TEST(Catalog, RejectsLawLeavingUnitInterval) {
  nlohmann::json doc = {{"sensors",
                         {{{"name", "x"},
                           {"viewing_angle_deg", 90},
                           {"radius", 10},
                           {"detection", {{"law", "affine"}, {"intercept", 0.5}, {"slope", 0.1}}}}}}};
  EXPECT_THROW(SensorCatalog::from_json(doc), ConfigError);
}
