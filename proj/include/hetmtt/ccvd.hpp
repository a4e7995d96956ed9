#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <iterator>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hetmtt/errors.hpp"
#include "hetmtt/geometry.hpp"
#include "hetmtt/netsim.hpp"
#include "hetmtt/world.hpp"

namespace hetmtt {

// ---------------------------------------------------------------------------
// Average consensus

struct ConsensusOptions {
  double epsilon = 0.0;          // mixing weight; 0 selects 1 / (max degree + 1)
  std::size_t budget = 0;        // iterations; 0 selects 10 n
  double tolerance = 1e-6;       // relative spread that counts as agreement
};

struct ConsensusResult {
  std::vector<double> values;
  std::size_t iterations = 0;
  bool converged = false;
};

inline double relative_spread(std::span<const double> v) {
  if (v.empty()) return 0.0;
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  const double scale = std::max(std::abs(*lo), std::abs(*hi));
  if (scale == 0.0) return 0.0;
  return (*hi - *lo) / scale;
}

/// One update of the printed rule  x_i += sum_{j in N_i} (x_j - x_i)  (no damping).
inline std::vector<double> undamped_consensus_step(std::span<const double> x, const NeighborGraph& graph) {
  std::vector<double> next(x.begin(), x.end());
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (RobotId j : graph.neighbors(static_cast<RobotId>(i))) next[i] += x[j] - x[i];
  }
  return next;
}

/// Damped average consensus  x_i += eps * sum_{j in N_i} (x_j - x_i), one scalar
/// broadcast per robot per iteration. Stops at agreement or when the budget runs out.
inline ConsensusResult average_consensus(std::vector<double> x, const NeighborGraph& graph,
                                         ConsensusOptions opt = {}, Network* net = nullptr) {
  const std::size_t n = x.size();
  if (graph.size() != n) throw std::invalid_argument("average_consensus: graph size mismatch");
  const double eps = opt.epsilon > 0.0 ? opt.epsilon : 1.0 / static_cast<double>(graph.max_degree() + 1);
  const std::size_t budget = opt.budget > 0 ? opt.budget : 10 * n;

  ConsensusResult out;
  std::vector<double> next(n);
  while (relative_spread(x) > opt.tolerance && out.iterations < budget) {
    if (net) {
      for (std::size_t i = 0; i < n; ++i) {
        for (RobotId j : graph.neighbors(static_cast<RobotId>(i))) {
          Message m;
          m.from = static_cast<RobotId>(i);
          m.to = j;
          m.kind = MessageKind::consensus;
          m.values = {x[i]};
          m.bytes = payload::scalar();
          net->send(std::move(m));
        }
      }
      const auto inboxes = net->deliver();
      for (std::size_t i = 0; i < n; ++i) {
        next[i] = x[i];
        for (const Message& m : inboxes[i]) next[i] += eps * (m.values[0] - x[i]);
      }
    } else {
      for (std::size_t i = 0; i < n; ++i) {
        next[i] = x[i];
        for (RobotId j : graph.neighbors(static_cast<RobotId>(i))) next[i] += eps * (x[j] - x[i]);
      }
    }
    x.swap(next);
    ++out.iterations;
  }
  out.converged = relative_spread(x) <= opt.tolerance;
  out.values = std::move(x);
  return out;
}

// ---------------------------------------------------------------------------
// Capacities

/// Integer apportionment of `total` proportional to `raw`: floors first, then the
/// largest remainders get one more, lower index on ties. Sum is exactly `total`.
inline std::vector<std::size_t> largest_remainder(std::span<const double> raw, std::size_t total) {
  const std::size_t n = raw.size();
  if (n == 0) return {};
  std::vector<std::size_t> out(n);
  std::vector<double> rem(n);
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = std::max(0.0, raw[i]);
    const double f = std::floor(r);
    out[i] = static_cast<std::size_t>(f);
    rem[i] = r - f;
    assigned += out[i];
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  if (assigned <= total) {
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rem[a] > rem[b]; });
    for (std::size_t k = 0; assigned < total; k = (k + 1) % n, ++assigned) ++out[order[k]];
  } else {
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rem[a] < rem[b]; });
    for (std::size_t k = 0; assigned > total; k = (k + 1) % n) {
      if (out[order[k]] > 0) {
        --out[order[k]];
        --assigned;
      }
    }
  }
  return out;
}

struct CapacityOptions {
  double floor = 1.0;  // smallest U a robot is allowed to claim
  ConsensusOptions consensus;
};

struct CapacityResult {
  std::vector<std::size_t> caps;      // U_cap,i, sums to the cell count
  std::vector<double> scale;          // each robot's estimate of I
  std::vector<double> floored;        // U after flooring
  std::size_t iterations = 0;
};

/// U_cap,i = I U_i with I = |X| / sum U. Each robot learns I by consensus on
/// y_i = n U_i / |X| (whose average is 1 / I); rounding is largest remainder and
/// every robot keeps at least one cell.
inline CapacityResult ccvd_capacities(std::span<const double> unused, std::size_t cells, const NeighborGraph& graph,
                                      CapacityOptions opt = {}, Network* net = nullptr) {
  const std::size_t n = unused.size();
  if (n == 0) throw std::invalid_argument("ccvd_capacities: no robots");
  if (cells < n) throw ConfigError("ccvd_capacities: fewer cells than robots");
  if (!(opt.floor > 0.0)) throw ConfigError("ccvd_capacities: capacity floor must be positive");

  CapacityResult out;
  out.floored.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.floored[i] = std::max(unused[i], opt.floor);

  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = static_cast<double>(n) * out.floored[i] / static_cast<double>(cells);
  ConsensusResult cons = average_consensus(std::move(y), graph, opt.consensus, net);
  out.iterations = cons.iterations;
  if (!cons.converged) {
    throw RuntimeError("ccvd_capacities: consensus did not agree within " + std::to_string(cons.iterations) +
                       " iterations (graph disconnected?)");
  }

  out.scale.resize(n);
  std::vector<double> raw(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.scale[i] = 1.0 / cons.values[i];
    raw[i] = out.scale[i] * out.floored[i];
  }
  out.caps = largest_remainder(raw, cells);

  for (std::size_t i = 0; i < n; ++i) {
    if (out.caps[i] > 0) continue;
    std::size_t donor = 0;
    for (std::size_t k = 1; k < n; ++k) {
      if (out.caps[k] > out.caps[donor]) donor = k;
    }
    --out.caps[donor];
    ++out.caps[i];
  }
  return out;
}

/// Robot 0 takes the first caps[0] cells in index order, robot 1 the next block, and so on.
inline std::vector<RobotId> initial_assignment(std::span<const std::size_t> caps, std::size_t cells) {
  if (std::accumulate(caps.begin(), caps.end(), std::size_t{0}) != cells) {
    throw std::invalid_argument("initial_assignment: capacities must sum to the cell count");
  }
  std::vector<RobotId> owner;
  owner.reserve(cells);
  for (std::size_t i = 0; i < caps.size(); ++i) owner.insert(owner.end(), caps[i], static_cast<RobotId>(i));
  return owner;
}

/// Adjusts a previous assignment to new capacities: robots over quota release
/// their cells farthest from their generator, robots under quota (in id order)
/// take the released cells nearest to theirs. Cells already in place stay.
inline std::vector<RobotId> rebalance_assignment(std::vector<RobotId> owner, std::span<const std::size_t> caps,
                                                 std::span<const Vec2> points, std::span<const Vec2> generators) {
  const std::size_t n = caps.size();
  if (std::accumulate(caps.begin(), caps.end(), std::size_t{0}) != owner.size()) {
    throw std::invalid_argument("rebalance_assignment: capacities must sum to the cell count");
  }
  if (generators.size() != n || points.size() != owner.size()) {
    throw std::invalid_argument("rebalance_assignment: size mismatch");
  }
  std::vector<std::vector<std::size_t>> region(n);
  for (std::size_t x = 0; x < owner.size(); ++x) {
    if (owner[x] < 0 || static_cast<std::size_t>(owner[x]) >= n) throw std::invalid_argument("rebalance_assignment: owner out of range");
    region[owner[x]].push_back(x);
  }
  auto nearest_first = [&](const Vec2& g) {
    return [&points, g](std::size_t a, std::size_t b) {
      const double da = squared_distance(points[a], g);
      const double db = squared_distance(points[b], g);
      return da < db || (da == db && a < b);
    };
  };
  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < n; ++i) {
    if (region[i].size() <= caps[i]) continue;
    auto& r = region[i];
    std::nth_element(r.begin(), r.begin() + static_cast<std::ptrdiff_t>(caps[i]), r.end(), nearest_first(generators[i]));
    pool.insert(pool.end(), r.begin() + static_cast<std::ptrdiff_t>(caps[i]), r.end());
  }
  std::sort(pool.begin(), pool.end());
  for (std::size_t i = 0; i < n; ++i) {
    if (region[i].size() >= caps[i]) continue;
    const std::size_t need = caps[i] - region[i].size();
    std::nth_element(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(need), pool.end(),
                     nearest_first(generators[i]));
    for (std::size_t k = 0; k < need; ++k) owner[pool[k]] = static_cast<RobotId>(i);
    pool.erase(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(need));
  }
  return owner;
}

// ---------------------------------------------------------------------------
// Distributed median swap

struct SwapOptions {
  std::size_t max_sweeps = 100;
};

struct SwapResult {
  std::vector<RobotId> owner;
  std::size_t sweeps = 0;
  std::size_t pair_updates = 0;   // pairs whose sets changed
  std::size_t cells_moved = 0;
  bool converged = false;
  std::vector<double> cost;       // sum ||x - p_A(x)||^2 before the first sweep and after each sweep
  std::string warning;
};

namespace detail {

inline double swap_cost(std::span<const Vec2> points, std::span<const RobotId> owner, std::span<const Vec2> gens) {
  double h = 0.0;
  for (std::size_t x = 0; x < points.size(); ++x) h += squared_distance(points[x], gens[owner[x]]);
  return h;
}

/// Best split of `pool` between i and j keeping |W_i| = keep_i: the keep_i cells with
/// the smallest (key, index) go to i, key(x) = ||x - p_i||^2 - ||x - p_j||^2.
inline std::vector<std::size_t> median_split(std::span<const Vec2> points, std::vector<std::size_t> pool,
                                             std::size_t keep_i, Vec2 pi, Vec2 pj) {
  struct Keyed {
    double key;
    std::size_t cell;
  };
  std::vector<Keyed> keyed(pool.size());
  for (std::size_t k = 0; k < pool.size(); ++k) {
    const Vec2 x = points[pool[k]];
    keyed[k] = {squared_distance(x, pi) - squared_distance(x, pj), pool[k]};
  }
  auto less = [](const Keyed& a, const Keyed& b) { return a.key < b.key || (a.key == b.key && a.cell < b.cell); };
  if (keep_i > 0 && keep_i < keyed.size()) std::nth_element(keyed.begin(), keyed.begin() + keep_i, keyed.end(), less);
  std::vector<std::size_t> to_i(keep_i);
  for (std::size_t k = 0; k < keep_i; ++k) to_i[k] = keyed[k].cell;
  std::sort(to_i.begin(), to_i.end());
  return to_i;
}

}  // namespace detail

/// Pairwise median cell swapping over the neighbor graph. In each sweep robots are
/// visited in id order; robot i serves every neighbor j > i: j sends W_j and p_j,
/// i re-splits W_i and W_j at the |W_i|-th smallest key and returns the new W_j.
/// A split is applied only when it strictly lowers the pair's cost; pairs whose
/// sets and generators have not changed since their last check are skipped.
/// Cell counts never change. `points` are the cell positions indexed like `owner`.
inline SwapResult ccvd_swap(std::span<const Vec2> points, std::vector<RobotId> owner, std::span<const Vec2> generators,
                            const NeighborGraph& graph, SwapOptions opt = {}, Network* net = nullptr) {
  const std::size_t n = generators.size();
  if (owner.size() != points.size()) throw std::invalid_argument("ccvd_swap: owner/points size mismatch");
  if (graph.size() != n) throw std::invalid_argument("ccvd_swap: graph size mismatch");

  std::vector<std::vector<std::size_t>> region(n);
  for (std::size_t x = 0; x < owner.size(); ++x) region[owner[x]].push_back(x);

  std::vector<std::size_t> version(n, 1);
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> checked(n);
  for (std::size_t i = 0; i < n; ++i) checked[i].assign(n, {0, 0});

  SwapResult out;
  out.cost.push_back(detail::swap_cost(points, owner, generators));

  for (; out.sweeps < opt.max_sweeps; ++out.sweeps) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      for (RobotId jr : graph.neighbors(static_cast<RobotId>(i))) {
        const std::size_t j = static_cast<std::size_t>(jr);
        if (j <= i) continue;
        if (checked[i][j] == std::pair{version[i], version[j]}) continue;

        std::vector<std::size_t> theirs = region[j];
        if (net) {
          Message req;
          req.from = static_cast<RobotId>(j);
          req.to = static_cast<RobotId>(i);
          req.kind = MessageKind::ccvd_request;
          req.cells.assign(region[j].begin(), region[j].end());
          req.values = {generators[j].x, generators[j].y};
          req.bytes = payload::ccvd_share(region[j].size() + 1, 0);
          net->send(std::move(req));
          auto inbox = net->deliver();
          net->take_dropped();
          if (inbox[i].empty()) continue;
          theirs.assign(inbox[i].back().cells.begin(), inbox[i].back().cells.end());
        }

        std::vector<std::size_t> pool = region[i];
        pool.insert(pool.end(), theirs.begin(), theirs.end());
        const std::size_t keep = region[i].size();
        std::vector<std::size_t> to_i = detail::median_split(points, pool, keep, generators[i], generators[j]);

        double delta = 0.0;
        std::size_t moved = 0;
        {
          std::vector<std::size_t> new_i_sorted = to_i;
          std::vector<std::size_t> old_i_sorted = region[i];
          std::sort(old_i_sorted.begin(), old_i_sorted.end());
          std::vector<std::size_t> gained, lost;
          std::set_difference(new_i_sorted.begin(), new_i_sorted.end(), old_i_sorted.begin(), old_i_sorted.end(),
                              std::back_inserter(gained));
          std::set_difference(old_i_sorted.begin(), old_i_sorted.end(), new_i_sorted.begin(), new_i_sorted.end(),
                              std::back_inserter(lost));
          auto key = [&](std::size_t x) {
            return squared_distance(points[x], generators[i]) - squared_distance(points[x], generators[j]);
          };
          for (std::size_t x : gained) delta += key(x);
          for (std::size_t x : lost) delta -= key(x);
          moved = gained.size() + lost.size();
        }

        if (moved > 0 && delta < 0.0) {
          std::vector<std::size_t> to_j;
          to_j.reserve(pool.size() - to_i.size());
          {
            std::vector<std::size_t> pool_sorted = pool;
            std::sort(pool_sorted.begin(), pool_sorted.end());
            std::set_difference(pool_sorted.begin(), pool_sorted.end(), to_i.begin(), to_i.end(),
                                std::back_inserter(to_j));
          }
          if (net) {
            Message rep;
            rep.from = static_cast<RobotId>(i);
            rep.to = static_cast<RobotId>(j);
            rep.kind = MessageKind::ccvd_assignment;
            rep.cells.assign(to_j.begin(), to_j.end());
            rep.bytes = payload::ccvd_share(to_j.size(), 0);
            net->send(std::move(rep));
            net->deliver();
            net->take_dropped();
          }
          for (std::size_t x : to_i) owner[x] = static_cast<RobotId>(i);
          for (std::size_t x : to_j) owner[x] = static_cast<RobotId>(j);
          region[i] = std::move(to_i);
          region[j] = std::move(to_j);
          ++version[i];
          ++version[j];
          ++out.pair_updates;
          out.cells_moved += moved / 2;
          changed = true;
        }
        checked[i][j] = {version[i], version[j]};
      }
    }
    out.cost.push_back(detail::swap_cost(points, owner, generators));
    if (!changed) {
      out.converged = true;
      ++out.sweeps;
      break;
    }
  }
  if (!out.converged) {
    out.warning = "ccvd_swap: no steady state after " + std::to_string(opt.max_sweeps) + " sweeps";
  }
  out.owner = std::move(owner);
  return out;
}

/// Cell centers of a grid, indexed like the cells.
inline std::vector<Vec2> cell_centers(const GridWorld& world) {
  std::vector<Vec2> out(world.cell_count());
  for (CellIndex x = 0; x < out.size(); ++x) out[x] = world.cell_center(x);
  return out;
}

}  // namespace hetmtt
