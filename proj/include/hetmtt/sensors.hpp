#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hetmtt/errors.hpp"
#include "hetmtt/geometry.hpp"
#include "hetmtt/world.hpp"

namespace hetmtt {

/// Detection probability as a function of range: clamp(intercept - slope * range, 0, 1).
/// A constant law has slope 0.
struct DetectionLaw {
  double intercept = 1.0;
  double slope = 0.0;

  static DetectionLaw constant(double p) { return {p, 0.0}; }
  static DetectionLaw affine(double a, double b) { return {a, b}; }

  bool is_constant() const { return slope == 0.0; }
  double operator()(double range) const { return std::clamp(intercept - slope * range, 0.0, 1.0); }
};

/// Wedge field of view pointing along the robot heading.
struct SensorSpec {
  std::string name;
  double viewing_angle = kTwoPi;  // radians, (0, 2pi]
  double radius = 1.0;            // meters
  DetectionLaw law;
  double range_noise_sd = 0.04;                 // meters
  double bearing_noise_sd = 0.1 * kPi / 180.0;  // radians
  double clutter_rate = 1.0;                    // expected false alarms per scan

  bool full_circle() const { return viewing_angle >= kTwoPi; }

  void validate() const {
    if (!(viewing_angle > 0.0) || viewing_angle > kTwoPi + 1e-12) {
      throw ConfigError("sensor '" + name + "': viewing angle must lie in (0, 2pi]");
    }
    if (!(radius > 0.0)) throw ConfigError("sensor '" + name + "': radius must be positive");
    if (range_noise_sd < 0.0 || bearing_noise_sd < 0.0 || clutter_rate < 0.0) {
      throw ConfigError("sensor '" + name + "': noise and clutter parameters must be non-negative");
    }
    for (double r : {0.0, radius}) {
      const double raw = law.intercept - law.slope * r;
      if (raw < 0.0 || raw > 1.0) {
        throw ConfigError("sensor '" + name + "': detection law leaves [0, 1] on [0, L]");
      }
    }
  }
};

/// Bearing of `x` relative to the sensor heading, in (-pi, pi].
inline double relative_bearing(const RobotState& pose, Vec2 x) {
  return wrap_angle(angle_of(x - pose.position) - pose.heading);
}

inline bool in_fov(const SensorSpec& spec, const RobotState& pose, Vec2 x) {
  const Vec2 d = x - pose.position;
  const double r2 = squared_norm(d);
  if (r2 > spec.radius * spec.radius) return false;
  if (spec.full_circle() || r2 == 0.0) return true;
  return std::abs(relative_bearing(pose, x)) <= 0.5 * spec.viewing_angle;
}

inline double detection_prob(const SensorSpec& spec, const RobotState& pose, Vec2 x) {
  if (!in_fov(spec, pose, x)) return 0.0;
  return spec.law(distance(x, pose.position));
}

namespace detail {

/// Composite 4-point Gauss-Legendre quadrature of f over [a, b].
template <typename F>
double integrate(F&& f, double a, double b, int panels = 256) {
  static constexpr std::array<double, 4> nodes = {-0.8611363115940526, -0.3399810435848563,
                                                  0.3399810435848563, 0.8611363115940526};
  static constexpr std::array<double, 4> weights = {0.3478548451374538, 0.6521451548625461,
                                                    0.6521451548625461, 0.3478548451374538};
  if (!(b > a)) return 0.0;
  const double h = (b - a) / panels;
  double total = 0.0;
  for (int k = 0; k < panels; ++k) {
    const double mid = a + (k + 0.5) * h;
    double s = 0.0;
    for (std::size_t q = 0; q < nodes.size(); ++q) s += weights[q] * f(mid + 0.5 * h * nodes[q]);
    total += 0.5 * h * s;
  }
  return total;
}

/// Radial moment  int_0^L f_d(r) r^k dr.
inline double radial_moment(const SensorSpec& spec, int k) {
  return integrate([&](double r) { return spec.law(r) * std::pow(r, k + 1); }, 0.0, spec.radius);
}

}  // namespace detail

/// Total detecting capability: integral of p_d over the field of view (m^2).
/// Pose independent because p_d depends only on range inside the wedge.
inline double detection_capability(const SensorSpec& spec) {
  if (!(spec.viewing_angle > 0.0) || !(spec.radius > 0.0)) return 0.0;
  return std::min(spec.viewing_angle, kTwoPi) * detail::radial_moment(spec, 0);
}

/// mu * D / |B|, where |B| is the area holding at most one target.
inline double max_capacity(const SensorSpec& spec, double mu, double target_area) {
  if (mu < 0.0) throw ConfigError("max_capacity: mu must be non-negative");
  if (!(target_area > 0.0)) throw std::invalid_argument("max_capacity: target area must be positive");
  return mu * detection_capability(spec) / target_area;
}

/// Cells whose centers fall inside a sensor footprint, in ascending index order,
/// with the detection probability at each center.
struct FovCells {
  std::vector<CellIndex> cells;
  std::vector<double> pd;

  std::size_t size() const { return cells.size(); }
  bool empty() const { return cells.empty(); }
};

inline FovCells fov_cells(const SensorSpec& spec, const RobotState& pose, const GridWorld& world) {
  FovCells out;
  const double h = world.cell_size();
  const Vec2 q = pose.position;
  const int c0 = std::max(0, static_cast<int>(std::floor((q.x - spec.radius) / h)));
  const int c1 = std::min(world.cells_x() - 1, static_cast<int>(std::floor((q.x + spec.radius) / h)));
  const int r0 = std::max(0, static_cast<int>(std::floor((q.y - spec.radius) / h)));
  const int r1 = std::min(world.cells_y() - 1, static_cast<int>(std::floor((q.y + spec.radius) / h)));
  for (int row = r0; row <= r1; ++row) {
    for (int col = c0; col <= c1; ++col) {
      const CellIndex i = world.index_of(col, row);
      const Vec2 x = world.cell_center(i);
      if (!in_fov(spec, pose, x)) continue;
      out.cells.push_back(i);
      out.pd.push_back(spec.law(distance(x, q)));
    }
  }
  return out;
}

/// Expected detection probability over the footprint: sum(p_d v) / sum(v) over FoV cells.
/// Returns 0 when the footprint holds (almost) no density. `values` are aligned with `pd`.
inline double expected_capacity(std::span<const double> pd, std::span<const double> values) {
  double weighted = 0.0;
  double mass = 0.0;
  for (std::size_t k = 0; k < pd.size(); ++k) {
    weighted += pd[k] * values[k];
    mass += values[k];
  }
  if (mass < 1e-12) return 0.0;
  return weighted / mass;
}

/// Same, reading the density of a full grid at the footprint cells.
inline double expected_capacity(const FovCells& fov, std::span<const double> phd) {
  std::vector<double> values(fov.size());
  for (std::size_t k = 0; k < fov.size(); ++k) values[k] = phd[fov.cells[k]];
  return expected_capacity(fov.pd, values);
}

inline double expected_capacity(const SensorSpec& spec, const RobotState& pose, const GridWorld& world,
                                std::span<const double> phd) {
  return expected_capacity(fov_cells(spec, pose, world), phd);
}

/// Normalized unused sensing capacity, floored at zero.
inline double unused_capacity(double c_max, double c_exp) { return std::max(0.0, c_max - c_exp); }

inline double unused_capacity(const SensorSpec& spec, const RobotState& pose, const GridWorld& world,
                              std::span<const double> phd, double mu, double target_area) {
  return unused_capacity(max_capacity(spec, mu, target_area), expected_capacity(spec, pose, world, phd));
}

/// p_d-weighted centroid of the footprint in the world frame.
inline Vec2 centroid_of_detection(const SensorSpec& spec, const RobotState& pose) {
  const double m1 = detail::radial_moment(spec, 0);
  if (!(spec.viewing_angle > 0.0) || !(m1 > 0.0)) {
    throw std::domain_error("centroid_of_detection: sensor '" + spec.name + "' has zero detecting capability");
  }
  if (spec.full_circle()) return pose.position;
  const double m2 = detail::radial_moment(spec, 1);
  const double half = 0.5 * spec.viewing_angle;
  const double offset = (m2 / m1) * (2.0 * std::sin(half) / spec.viewing_angle);
  return pose.position + offset * unit_vector(pose.heading);
}

/// Radius of a perfect isotropic sensor with capability U:  pi g^2 = U.
inline double power_radius(double unused) {
  if (unused < 0.0) throw std::invalid_argument("power_radius: U must be non-negative");
  return std::sqrt(unused / kPi);
}

struct CapacityProfile {
  double detection_capability = 0.0;  // D, m^2
  double max_capacity = 0.0;          // C_max
  double expected_capacity = 0.0;     // C_exp
  double unused_capacity = 0.0;       // U
  double power_radius = 0.0;          // g(U), m
  Vec2 cod;                           // centroid of detection
};

inline CapacityProfile capacity_profile(const SensorSpec& spec, const RobotState& pose, const FovCells& fov,
                                        std::span<const double> phd, double mu, double target_area) {
  CapacityProfile p;
  p.detection_capability = detection_capability(spec);
  p.max_capacity = max_capacity(spec, mu, target_area);
  p.expected_capacity = expected_capacity(fov, phd);
  p.unused_capacity = unused_capacity(p.max_capacity, p.expected_capacity);
  p.power_radius = power_radius(p.unused_capacity);
  p.cod = centroid_of_detection(spec, pose);
  return p;
}

}  // namespace hetmtt
