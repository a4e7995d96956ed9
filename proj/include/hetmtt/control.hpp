#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hetmtt/geometry.hpp"
#include "hetmtt/partition.hpp"
#include "hetmtt/sensors.hpp"
#include "hetmtt/world.hpp"

namespace hetmtt {

struct ControlCommand {
  double u = 0.0;      // m/s along the heading
  double omega = 0.0;  // rad/s
  Vec2 goal;
};

/// Drive `from` toward `goal`: speed min(d / dt, v_max), bang-bang heading with
/// omega = sign(dtheta) min(|dtheta| / dt, omega_max). Inside the deadband the
/// command is zero.
inline ControlCommand drive_toward(const RobotState& pose, Vec2 from, Vec2 goal, double dt, double deadband) {
  if (!(dt > 0.0)) throw std::invalid_argument("drive_toward: dt must be positive");
  ControlCommand cmd;
  cmd.goal = goal;
  const Vec2 d = goal - from;
  const double dist = norm(d);
  if (dist < deadband || dist == 0.0) return cmd;
  cmd.u = std::min(dist / dt, pose.max_linear_speed);
  const double dtheta = wrap_angle(angle_of(d) - pose.heading);
  const double rate = std::min(std::abs(dtheta) / dt, pose.max_angular_speed);
  cmd.omega = dtheta > 0.0 ? rate : (dtheta < 0.0 ? -rate : 0.0);
  return cmd;
}

/// Moves the centroid of detection toward the region centroid.
inline ControlCommand cod_drive(const RobotState& pose, const SensorSpec& spec, Vec2 region_centroid, double dt,
                                double deadband) {
  return drive_toward(pose, centroid_of_detection(spec, pose), region_centroid, dt, deadband);
}

/// Moves the robot position toward a Voronoi centroid.
inline ControlCommand lloyd_drive(const RobotState& pose, Vec2 centroid, double dt, double deadband) {
  return drive_toward(pose, pose.position, centroid, dt, deadband);
}

/// q += u dt (cos theta, sin theta), theta += omega dt, then clamp to the world.
inline RobotState integrate(const RobotState& pose, const ControlCommand& cmd, double dt, const GridWorld& world) {
  RobotState next = pose;
  next.position += cmd.u * dt * unit_vector(pose.heading);
  next.heading = pose.heading + cmd.omega * dt;
  return clamp_pose(world, next);
}

// ---------------------------------------------------------------------------
// Zigzag baseline

struct CoveragePath {
  std::vector<Vec2> waypoints;
  double spacing = 1.0;
  std::size_t lanes = 0;
  std::string warning;
};

/// 4-connected components of a cell set, largest first (ties: smallest first cell).
inline std::vector<std::vector<CellIndex>> connected_components(std::span<const CellIndex> region,
                                                                const GridWorld& world) {
  std::vector<char> in(world.cell_count(), 0);
  for (CellIndex x : region) in[x] = 1;
  std::vector<char> seen(world.cell_count(), 0);
  std::vector<CellIndex> sorted(region.begin(), region.end());
  std::sort(sorted.begin(), sorted.end());

  std::vector<std::vector<CellIndex>> comps;
  for (CellIndex s : sorted) {
    if (seen[s]) continue;
    std::vector<CellIndex> comp;
    std::queue<CellIndex> q;
    q.push(s);
    seen[s] = 1;
    while (!q.empty()) {
      const CellIndex x = q.front();
      q.pop();
      comp.push_back(x);
      const int c = world.col_of(x);
      const int r = world.row_of(x);
      const int nb[4][2] = {{c - 1, r}, {c + 1, r}, {c, r - 1}, {c, r + 1}};
      for (const auto& p : nb) {
        if (!world.valid_col_row(p[0], p[1])) continue;
        const CellIndex y = world.index_of(p[0], p[1]);
        if (in[y] && !seen[y]) {
          seen[y] = 1;
          q.push(y);
        }
      }
    }
    std::sort(comp.begin(), comp.end());
    comps.push_back(std::move(comp));
  }
  std::stable_sort(comps.begin(), comps.end(), [](const auto& a, const auto& b) { return a.size() > b.size(); });
  return comps;
}

/// Boustrophedon path over a cell region. Lanes run along the longer side of the
/// bounding box, `spacing` apart (rounded to whole cells), visited in serpentine
/// order; each run of region cells on a lane contributes its two end centers.
inline CoveragePath plan_zigzag(std::span<const CellIndex> region, const GridWorld& world, double spacing) {
  if (region.empty()) throw std::invalid_argument("plan_zigzag: empty region");
  if (!(spacing > 0.0)) throw std::invalid_argument("plan_zigzag: spacing must be positive");
  CoveragePath path;
  path.spacing = spacing;

  auto comps = connected_components(region, world);
  if (comps.size() > 1) {
    path.warning = "plan_zigzag: region has " + std::to_string(comps.size()) +
                   " components; planning on the largest (" + std::to_string(comps.front().size()) + " cells)";
  }
  const std::vector<CellIndex>& cells = comps.front();

  int c0 = world.cells_x(), c1 = -1, r0 = world.cells_y(), r1 = -1;
  for (CellIndex x : cells) {
    c0 = std::min(c0, world.col_of(x));
    c1 = std::max(c1, world.col_of(x));
    r0 = std::min(r0, world.row_of(x));
    r1 = std::max(r1, world.row_of(x));
  }
  const bool horizontal = (c1 - c0) >= (r1 - r0);  // lanes of constant row
  const int lo = horizontal ? r0 : c0;
  const int hi = horizontal ? r1 : c1;
  const int step = std::max(1, static_cast<int>(std::lround(spacing / world.cell_size())));
  const int offset = std::min((step - 1) / 2, (hi - lo) / 2);

  std::vector<char> in(world.cell_count(), 0);
  for (CellIndex x : cells) in[x] = 1;

  bool forward = true;
  for (int lane = lo + offset; lane <= hi; lane += step) {
    const int a0 = horizontal ? c0 : r0;
    const int a1 = horizontal ? c1 : r1;
    std::vector<std::pair<int, int>> runs;
    for (int a = a0; a <= a1;) {
      auto inside = [&](int k) {
        const int col = horizontal ? k : lane;
        const int row = horizontal ? lane : k;
        return in[world.index_of(col, row)] != 0;
      };
      if (!inside(a)) {
        ++a;
        continue;
      }
      int b = a;
      while (b + 1 <= a1 && inside(b + 1)) ++b;
      runs.push_back({a, b});
      a = b + 1;
    }
    if (runs.empty()) continue;
    ++path.lanes;
    if (!forward) std::reverse(runs.begin(), runs.end());
    for (auto [a, b] : runs) {
      const int first = forward ? a : b;
      const int last = forward ? b : a;
      auto center = [&](int k) {
        return horizontal ? world.cell_center(world.index_of(k, lane)) : world.cell_center(world.index_of(lane, k));
      };
      path.waypoints.push_back(center(first));
      if (last != first) path.waypoints.push_back(center(last));
    }
    forward = !forward;
  }
  return path;
}

/// Distance from `p` to the polyline through the waypoints.
inline double distance_to_path(const CoveragePath& path, Vec2 p) {
  if (path.waypoints.empty()) return std::numeric_limits<double>::infinity();
  double best = distance(p, path.waypoints.front());
  for (std::size_t k = 1; k < path.waypoints.size(); ++k) {
    const Vec2 a = path.waypoints[k - 1];
    const Vec2 ab = path.waypoints[k] - a;
    const double len2 = squared_norm(ab);
    const double t = len2 > 0.0 ? std::clamp(dot(p - a, ab) / len2, 0.0, 1.0) : 0.0;
    best = std::min(best, distance(p, a + t * ab));
  }
  return best;
}

/// Walks a coverage path back and forth: first to the start, then lane by lane.
class PathFollower {
 public:
  PathFollower() = default;
  explicit PathFollower(CoveragePath path) : path_(std::move(path)) {}

  const CoveragePath& path() const { return path_; }
  std::size_t next_index() const { return next_; }

  /// Current goal, advancing past every waypoint within `reach` of `position`.
  Vec2 goal(Vec2 position, double reach) {
    const std::size_t n = path_.waypoints.size();
    if (n == 0) return position;
    for (std::size_t guard = 0; guard < n && distance(position, path_.waypoints[next_]) <= reach; ++guard) {
      if (n == 1) break;
      if (forward_ && next_ + 1 == n) forward_ = false;
      if (!forward_ && next_ == 0) forward_ = true;
      next_ = forward_ ? next_ + 1 : next_ - 1;
    }
    return path_.waypoints[next_];
  }

 private:
  CoveragePath path_;
  std::size_t next_ = 0;
  bool forward_ = true;
};

/// Centroidal Voronoi generators for a uniform density by Lloyd iteration from `seeds`.
inline std::vector<Vec2> centroidal_voronoi(std::vector<Vec2> seeds, const GridWorld& world,
                                            std::size_t iterations = 200, double tolerance = 1e-9) {
  const std::vector<double> uniform(world.cell_count(), 1.0);
  for (std::size_t it = 0; it < iterations; ++it) {
    const auto part = voronoi_partition(seeds, world);
    const auto regions = part.regions();
    double moved = 0.0;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      if (regions[i].empty()) continue;
      const Vec2 c = region_mass_centroid(uniform, regions[i], world).centroid;
      moved = std::max(moved, distance(c, seeds[i]));
      seeds[i] = c;
    }
    if (moved < tolerance) break;
  }
  return seeds;
}

}  // namespace hetmtt
