#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "hetmtt/errors.hpp"
#include "hetmtt/geometry.hpp"
#include "hetmtt/world.hpp"

namespace hetmtt {

struct Target {
  int id = 0;
  Vec2 position;
  Vec2 velocity;
  bool alive = true;
};

struct TargetSet {
  std::vector<Target> items;
  int next_id = 0;

  std::size_t alive_count() const {
    return static_cast<std::size_t>(std::count_if(items.begin(), items.end(), [](const Target& t) { return t.alive; }));
  }

  std::vector<Vec2> positions() const {
    std::vector<Vec2> out;
    out.reserve(items.size());
    for (const Target& t : items) {
      if (t.alive) out.push_back(t.position);
    }
    return out;
  }

  void drop_dead() {
    items.erase(std::remove_if(items.begin(), items.end(), [](const Target& t) { return !t.alive; }), items.end());
  }
};

struct BoidsParams {
  double separation_radius = 1.0;
  double neighbor_radius = 3.0;  // alignment and cohesion
  double separation_gain = 1.5;
  double alignment_gain = 1.0;
  double cohesion_gain = 1.0;
  double max_speed = 0.2;
};

struct RandomWalkParams {
  double heading_noise = kPi / 6.0;  // per-step perturbation bound
  double max_speed = 1.0;
  double spawn_rate = 0.0;           // expected entries per second
};

inline Vec2 clamp_speed(Vec2 v, double max_speed) {
  const double s = norm(v);
  if (s > max_speed && s > 0.0) return v * (max_speed / s);
  return v;
}

/// Entry point uniform on the perimeter with an inward velocity. The direction
/// is cosine-distributed about the inward normal and the speed has density
/// proportional to s on [0, max_speed], which is the flux of a uniform,
/// isotropic population crossing the boundary.
template <typename Rng>
Target spawn_on_boundary(const GridWorld& world, double max_speed, Rng& rng, int id) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double w = world.width();
  const double h = world.height();
  const double s = unit(rng) * 2.0 * (w + h);
  Vec2 p;
  double normal = 0.0;
  if (s < w) {
    p = {s, 0.0};
    normal = kPi / 2.0;
  } else if (s < w + h) {
    p = {w, s - w};
    normal = kPi;
  } else if (s < 2.0 * w + h) {
    p = {2.0 * w + h - s, h};
    normal = -kPi / 2.0;
  } else {
    p = {0.0, 2.0 * (w + h) - s};
    normal = 0.0;
  }
  const double off = std::asin(2.0 * unit(rng) - 1.0);
  const double speed = max_speed * std::sqrt(unit(rng));
  Target t;
  t.id = id;
  t.position = p;
  t.velocity = speed * unit_vector(normal + off);
  return t;
}

/// Uniform positions, uniform headings, speed uniform on [0, max_speed].
template <typename Rng>
TargetSet init_targets(std::size_t count, const GridWorld& world, double max_speed, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  TargetSet set;
  for (std::size_t k = 0; k < count; ++k) {
    Target t;
    t.id = set.next_id++;
    t.position = {world.width() * unit(rng), world.height() * unit(rng)};
    const double heading = kTwoPi * unit(rng);
    t.velocity = max_speed * unit(rng) * unit_vector(heading);
    set.items.push_back(t);
  }
  return set;
}

/// Steady-state entry rate that balances exits for `count` targets spread
/// uniformly with isotropic headings: count * perimeter * mean_speed / (pi * area).
inline double balanced_spawn_rate(std::size_t count, const GridWorld& world, double mean_speed) {
  const double perimeter = 2.0 * (world.width() + world.height());
  const double area = world.width() * world.height();
  return static_cast<double>(count) * perimeter * mean_speed / (kPi * area);
}

/// Separation, alignment and cohesion, speed clamp, then motion. A target that
/// leaves the world is replaced by a new one entering at the boundary.
template <typename Rng>
TargetSet step_boids(const TargetSet& in, const BoidsParams& p, const GridWorld& world, double dt, Rng& rng) {
  TargetSet out = in;
  const std::size_t n = in.items.size();
  const double rs2 = p.separation_radius * p.separation_radius;
  const double rn2 = p.neighbor_radius * p.neighbor_radius;
  for (std::size_t i = 0; i < n; ++i) {
    const Target& me = in.items[i];
    if (!me.alive) continue;
    Vec2 sep, vel_sum, pos_sum;
    std::size_t neighbors = 0;
    for (std::size_t j = 0; j < n; ++j) {
      const Target& other = in.items[j];
      if (j == i || !other.alive) continue;
      const Vec2 d = me.position - other.position;
      const double d2 = squared_norm(d);
      if (d2 < rs2 && d2 > 0.0) sep += d / std::sqrt(d2);
      if (d2 < rn2) {
        vel_sum += other.velocity;
        pos_sum += other.position;
        ++neighbors;
      }
    }
    Vec2 accel = p.separation_gain * sep;
    if (neighbors > 0) {
      const double k = 1.0 / static_cast<double>(neighbors);
      accel += p.alignment_gain * (vel_sum * k - me.velocity);
      accel += p.cohesion_gain * (pos_sum * k - me.position);
    }
    out.items[i].velocity = clamp_speed(me.velocity + dt * accel, p.max_speed);
  }
  for (Target& t : out.items) {
    if (!t.alive) continue;
    t.position += dt * t.velocity;
    if (!world.contains(t.position)) t = spawn_on_boundary(world, p.max_speed, rng, out.next_id++);
  }
  return out;
}

/// Headings perturbed by U[-delta, delta], constant speed, exits removed,
/// Poisson entries at the boundary.
template <typename Rng>
TargetSet step_random(const TargetSet& in, const RandomWalkParams& p, const GridWorld& world, double dt, Rng& rng) {
  if (p.spawn_rate < 0.0) throw ConfigError("step_random: spawn rate must be non-negative");
  std::uniform_real_distribution<double> noise(-p.heading_noise, p.heading_noise);
  TargetSet out = in;
  for (Target& t : out.items) {
    if (!t.alive) continue;
    const double speed = std::min(norm(t.velocity), p.max_speed);
    const double heading = angle_of(t.velocity) + (p.heading_noise > 0.0 ? noise(rng) : 0.0);
    t.velocity = speed * unit_vector(heading);
    t.position += dt * t.velocity;
    if (!world.contains(t.position)) t.alive = false;
  }
  out.drop_dead();
  if (p.spawn_rate > 0.0) {
    std::poisson_distribution<int> entries(p.spawn_rate * dt);
    const int k = entries(rng);
    for (int e = 0; e < k; ++e) out.items.push_back(spawn_on_boundary(world, p.max_speed, rng, out.next_id++));
  }
  return out;
}

}  // namespace hetmtt
