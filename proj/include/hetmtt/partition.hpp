#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "hetmtt/geometry.hpp"
#include "hetmtt/world.hpp"

namespace hetmtt {

/// Cell ownership plus the generators and weights that produced it.
struct PartitionAssignment {
  std::vector<RobotId> owner;                // A(x), one entry per cell
  std::vector<Vec2> generators;              // p_i
  std::vector<double> weights;               // power radius, 0 for Voronoi
  std::vector<std::size_t> capacities;       // CCVD cell quotas, empty otherwise

  std::size_t robots() const { return generators.size(); }

  std::vector<std::size_t> counts() const {
    std::vector<std::size_t> c(robots(), 0);
    for (RobotId r : owner) ++c[r];
    return c;
  }

  std::vector<std::vector<CellIndex>> regions() const {
    std::vector<std::vector<CellIndex>> out(robots());
    for (CellIndex x = 0; x < owner.size(); ++x) out[owner[x]].push_back(x);
    return out;
  }
};

/// Owner of every cell under the power distance ||x - p||^2 - w^2, lowest id on ties.
inline std::vector<RobotId> power_owner(std::span<const Vec2> generators, std::span<const double> weights,
                                        const GridWorld& world) {
  const std::size_t n = generators.size();
  std::vector<double> w2(n);
  for (std::size_t k = 0; k < n; ++k) w2[k] = weights[k] * weights[k];
  std::vector<RobotId> owner(world.cell_count(), 0);
  for (CellIndex x = 0; x < owner.size(); ++x) {
    const Vec2 c = world.cell_center(x);
    double best = std::numeric_limits<double>::infinity();
    RobotId arg = 0;
    for (std::size_t k = 0; k < n; ++k) {
      const double d = squared_distance(c, generators[k]) - w2[k];
      if (d < best) {
        best = d;
        arg = static_cast<RobotId>(k);
      }
    }
    owner[x] = arg;
  }
  return owner;
}

inline PartitionAssignment power_partition(std::span<const Vec2> generators, std::span<const double> weights,
                                           const GridWorld& world) {
  if (generators.empty()) throw std::invalid_argument("power_partition: no generators");
  if (weights.size() != generators.size()) throw std::invalid_argument("power_partition: one weight per generator");
  for (double w : weights) {
    if (w < 0.0) throw std::invalid_argument("power_partition: weights must be non-negative");
  }
  PartitionAssignment out;
  out.generators.assign(generators.begin(), generators.end());
  out.weights.assign(weights.begin(), weights.end());
  out.owner = power_owner(generators, weights, world);
  return out;
}

inline PartitionAssignment voronoi_partition(std::span<const Vec2> generators, const GridWorld& world) {
  if (generators.empty()) throw std::invalid_argument("voronoi_partition: no generators");
  const std::vector<double> zero(generators.size(), 0.0);
  return power_partition(generators, zero, world);
}

struct MassCentroid {
  double mass = 0.0;
  Vec2 centroid;
};

/// Mass and center of mass of a region; falls back to the geometric centroid
/// when the region holds no density.
inline MassCentroid region_mass_centroid(std::span<const double> phd, std::span<const CellIndex> region,
                                         const GridWorld& world) {
  if (region.empty()) throw std::invalid_argument("region_mass_centroid: empty region");
  MassCentroid out;
  Vec2 moment;
  Vec2 geometric;
  for (CellIndex x : region) {
    const Vec2 c = world.cell_center(x);
    out.mass += phd[x];
    moment += phd[x] * c;
    geometric += c;
  }
  out.centroid = out.mass < 1e-12 ? geometric / static_cast<double>(region.size()) : moment / out.mass;
  return out;
}

/// Power-form coverage cost  sum_i sum_{x in W_i} (||x - p_i||^2 - w_i^2) v(x).
inline double lloyd_functional(std::span<const RobotId> owner, std::span<const Vec2> generators,
                               std::span<const double> weights, std::span<const double> phd, const GridWorld& world) {
  double h = 0.0;
  for (CellIndex x = 0; x < owner.size(); ++x) {
    const RobotId i = owner[x];
    const double w = weights.empty() ? 0.0 : weights[i];
    h += (squared_distance(world.cell_center(x), generators[i]) - w * w) * phd[x];
  }
  return h;
}

/// Unweighted capacity-constrained cost  sum_x ||x - p_A(x)||^2.
inline double assignment_cost(std::span<const RobotId> owner, std::span<const Vec2> generators,
                              const GridWorld& world) {
  double h = 0.0;
  for (CellIndex x = 0; x < owner.size(); ++x) h += squared_distance(world.cell_center(x), generators[owner[x]]);
  return h;
}

}  // namespace hetmtt
