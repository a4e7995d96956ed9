#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <span>
#include <vector>

#include "hetmtt/errors.hpp"
#include "hetmtt/geometry.hpp"
#include "hetmtt/sensors.hpp"
#include "hetmtt/world.hpp"

namespace hetmtt {

/// Target and sensor models shared by every filter instance. The PHD is stored as
/// expected targets per cell, so every integral is a plain sum.
struct PhdModels {
  double survival = 0.99;        // p_s
  double birth_per_cell = 0.0;   // b, expected births per cell per scan
  double motion_sd = 0.0;        // isotropic Gaussian random walk, meters per step
  bool quantized_likelihood = true;

  void validate() const {
    if (survival < 0.0 || survival > 1.0) throw ConfigError("PHD survival probability must lie in [0, 1]");
    if (birth_per_cell < 0.0) throw ConfigError("PHD birth mass must be non-negative");
    if (motion_sd < 0.0) throw ConfigError("PHD motion sd must be non-negative");
  }
};

struct PhdGrid {
  std::vector<double> values;

  PhdGrid() = default;
  explicit PhdGrid(std::size_t cells, double value = 0.0) : values(cells, value) {}

  static PhdGrid uniform(const GridWorld& world, double total_mass) {
    return PhdGrid(world.cell_count(), total_mass / static_cast<double>(world.cell_count()));
  }

  std::size_t size() const { return values.size(); }
  double mass() const { return std::accumulate(values.begin(), values.end(), 0.0); }
  double& operator[](CellIndex i) { return values[i]; }
  double operator[](CellIndex i) const { return values[i]; }
};

/// Discretized isotropic Gaussian, truncated at 3 sd and normalized to unit sum.
class MotionKernel {
 public:
  struct Tap {
    int dx;
    int dy;
    double weight;
  };

  MotionKernel(double sd, double cell_size) {
    const int reach = sd > 0.0 ? static_cast<int>(std::floor(3.0 * sd / cell_size)) : 0;
    if (reach == 0) {
      taps_.push_back({0, 0, 1.0});
      return;
    }
    const double cutoff2 = 9.0 * sd * sd;
    double total = 0.0;
    for (int dy = -reach; dy <= reach; ++dy) {
      for (int dx = -reach; dx <= reach; ++dx) {
        const double d2 = (dx * dx + dy * dy) * cell_size * cell_size;
        if (d2 > cutoff2) continue;
        const double w = std::exp(-d2 / (2.0 * sd * sd));
        taps_.push_back({dx, dy, w});
        total += w;
      }
    }
    for (auto& t : taps_) t.weight /= total;
    reach_ = reach;
  }

  const std::vector<Tap>& taps() const { return taps_; }
  int reach() const { return reach_; }

 private:
  std::vector<Tap> taps_;
  int reach_ = 0;
};

/// Predicted value of one cell from a prior defined at least on the kernel
/// neighborhood of `x`. Mass carried across the world boundary is lost.
inline double predict_cell(const GridWorld& world, const MotionKernel& kernel, const PhdModels& models,
                           std::span<const double> prior, CellIndex x) {
  const int col = world.col_of(x);
  const int row = world.row_of(x);
  double moved = 0.0;
  for (const auto& t : kernel.taps()) {
    const int c = col - t.dx;
    const int r = row - t.dy;
    if (!world.valid_col_row(c, r)) continue;
    moved += t.weight * prior[world.index_of(c, r)];
  }
  return models.birth_per_cell + models.survival * moved;
}

inline PhdGrid predict(const PhdGrid& phd, const PhdModels& models, const GridWorld& world) {
  const MotionKernel kernel(models.motion_sd, world.cell_size());
  PhdGrid out(phd.size());
  for (CellIndex x = 0; x < phd.size(); ++x) out[x] = predict_cell(world, kernel, models, phd.values, x);
  return out;
}

// ---------------------------------------------------------------------------
// Measurements

struct Measurement {
  double range = 0.0;    // meters, (0, L]
  double bearing = 0.0;  // radians, relative to the sensor heading
  bool clutter = false;  // ground-truth tag, diagnostics only
};

struct MeasurementSet {
  RobotId robot = 0;
  std::vector<Measurement> z;

  std::size_t size() const { return z.size(); }
  bool empty() const { return z.empty(); }
  std::size_t true_detections() const {
    return static_cast<std::size_t>(std::count_if(z.begin(), z.end(), [](const Measurement& m) { return !m.clutter; }));
  }
};

/// Clutter intensity: uniform over the footprint in (range, bearing) space.
inline double clutter_density(const SensorSpec& spec) {
  return spec.clutter_rate / (spec.radius * std::min(spec.viewing_angle, kTwoPi));
}

/// g(z | x, q): independent Gaussians in range and bearing. With quantization on,
/// the within-cell position spread (variance h^2/12 per axis) is added so that a
/// target anywhere inside a cell keeps non-negligible likelihood at its center.
inline double measurement_likelihood(const SensorSpec& spec, const RobotState& pose, Vec2 x, const Measurement& z,
                                     double cell_size, bool quantized) {
  const double r = distance(x, pose.position);
  const double b = r > 0.0 ? relative_bearing(pose, x) : 0.0;
  double var_r = spec.range_noise_sd * spec.range_noise_sd;
  double var_b = spec.bearing_noise_sd * spec.bearing_noise_sd;
  if (quantized) {
    const double q = cell_size * cell_size / 12.0;
    var_r += q;
    var_b += r > 0.0 ? q / (r * r) : kPi * kPi;
  }
  var_b = std::min(var_b, kPi * kPi);
  if (var_r <= 0.0 || var_b <= 0.0) return (z.range == r && z.bearing == b) ? 1.0 : 0.0;
  const double dr = z.range - r;
  const double db = wrap_angle(z.bearing - b);
  return std::exp(-0.5 * (dr * dr / var_r + db * db / var_b)) / (kTwoPi * std::sqrt(var_r * var_b));
}

/// Centralized measurement update of a predicted grid for one sensor:
///   v = (1 - p_d) v_bar + sum_z psi_z v_bar / eta_z,  eta_z = c(z) + sum_x psi_z(x) v_bar(x).
/// Measurements with eta_z = 0 carry no support and are discarded.
inline PhdGrid update(const PhdGrid& predicted, const PhdModels& models, const SensorSpec& spec,
                      const RobotState& pose, const MeasurementSet& measurements, const GridWorld& world) {
  const std::size_t n = predicted.size();
  std::vector<double> pd(n);
  for (CellIndex x = 0; x < n; ++x) pd[x] = detection_prob(spec, pose, world.cell_center(x));

  PhdGrid out(n);
  for (CellIndex x = 0; x < n; ++x) out[x] = (1.0 - pd[x]) * predicted[x];

  const double clutter = clutter_density(spec);
  std::vector<double> psi(n);
  for (const Measurement& z : measurements.z) {
    double eta = clutter;
    for (CellIndex x = 0; x < n; ++x) {
      psi[x] = pd[x] > 0.0 ? measurement_likelihood(spec, pose, world.cell_center(x), z, world.cell_size(),
                                                    models.quantized_likelihood) *
                                 pd[x]
                           : 0.0;
      eta += psi[x] * predicted[x];
    }
    if (!(eta > 0.0)) continue;
    for (CellIndex x = 0; x < n; ++x) out[x] += psi[x] * predicted[x] / eta;
  }
  return out;
}

/// Same update restricted to a footprint: `predicted` holds v_bar at fov.cells (in
/// that order) and the posterior is returned in the same order. Cells outside the
/// footprint are untouched by the update, so this is all a distributed owner needs.
inline std::vector<double> update_footprint(const FovCells& fov, std::span<const double> predicted,
                                            const PhdModels& models, const SensorSpec& spec, const RobotState& pose,
                                            std::span<const Measurement> measurements, const GridWorld& world) {
  const std::size_t n = fov.size();
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) out[k] = (1.0 - fov.pd[k]) * predicted[k];

  const double clutter = clutter_density(spec);
  std::vector<double> psi(n);
  for (const Measurement& z : measurements) {
    double eta = clutter;
    for (std::size_t k = 0; k < n; ++k) {
      psi[k] = fov.pd[k] > 0.0 ? measurement_likelihood(spec, pose, world.cell_center(fov.cells[k]), z,
                                                        world.cell_size(), models.quantized_likelihood) *
                                     fov.pd[k]
                               : 0.0;
      eta += psi[k] * predicted[k];
    }
    if (!(eta > 0.0)) continue;
    for (std::size_t k = 0; k < n; ++k) out[k] += psi[k] * predicted[k] / eta;
  }
  return out;
}

/// Detection with probability p_d(x), Gaussian range/bearing noise, and
/// Poisson(clutter_rate) false alarms uniform over the footprint in (range, bearing).
/// Noisy values are clamped back into the footprint.
template <typename Rng>
MeasurementSet simulate_measurements(std::span<const Vec2> targets, const SensorSpec& spec, const RobotState& pose,
                                     Rng& rng) {
  MeasurementSet out;
  out.robot = pose.id;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double half = 0.5 * std::min(spec.viewing_angle, kTwoPi);
  auto clamp_measurement = [&](Measurement m) {
    m.range = std::clamp(m.range, 1e-9, spec.radius);
    if (spec.full_circle()) {
      m.bearing = wrap_angle(m.bearing);
    } else {
      m.bearing = std::clamp(m.bearing, -half, half);
    }
    return m;
  };

  for (const Vec2& x : targets) {
    const double p = detection_prob(spec, pose, x);
    if (p <= 0.0) continue;
    if (unit(rng) >= p) continue;
    Measurement m;
    m.range = distance(x, pose.position) + spec.range_noise_sd * gauss(rng);
    m.bearing = relative_bearing(pose, x) + spec.bearing_noise_sd * gauss(rng);
    out.z.push_back(clamp_measurement(m));
  }

  if (spec.clutter_rate > 0.0) {
    std::poisson_distribution<int> count(spec.clutter_rate);
    const int k = count(rng);
    for (int c = 0; c < k; ++c) {
      Measurement m;
      m.range = spec.radius * unit(rng);
      m.bearing = -half + 2.0 * half * unit(rng);
      m.clutter = true;
      out.z.push_back(clamp_measurement(m));
    }
  }
  return out;
}

}  // namespace hetmtt
