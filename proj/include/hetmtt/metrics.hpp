#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "hetmtt/geometry.hpp"
#include "hetmtt/world.hpp"

namespace hetmtt {

// ---------------------------------------------------------------------------
// Assignment

/// Minimum-cost assignment of every row to a distinct column (rows <= cols).
/// Shortest augmenting path with potentials, O(rows^2 cols). Returns the column per row.
inline std::vector<std::size_t> hungarian(const std::vector<std::vector<double>>& cost) {
  const std::size_t n = cost.size();
  if (n == 0) return {};
  const std::size_t m = cost[0].size();
  if (m < n) throw std::invalid_argument("hungarian: more rows than columns");
  const double inf = std::numeric_limits<double>::infinity();
  // 1-based arrays; column 0 is the virtual start.
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<std::size_t> match(m + 1, 0), way(m + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    match[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(m + 1, inf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = match[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> out(n);
  for (std::size_t j = 1; j <= m; ++j) {
    if (match[j] != 0) out[match[j] - 1] = j - 1;
  }
  return out;
}

// ---------------------------------------------------------------------------
// OSPA

struct OspaParams {
  double p = 1.0;
  double c = 3.0;

  void validate() const {
    if (!(p >= 1.0)) throw std::invalid_argument("OSPA order p must be >= 1");
    if (!(c > 0.0)) throw std::invalid_argument("OSPA cutoff c must be positive");
  }
};

/// Sum of assignment terms in ascending order, so equal term multisets give
/// bit-identical sums whatever the order they were found in.
inline double canonical_sum(std::vector<double> terms) {
  std::sort(terms.begin(), terms.end());
  double s = 0.0;
  for (double t : terms) s += t;
  return s;
}

/// Optimal sub-pattern assignment distance between two finite point sets.
inline double ospa(std::span<const Vec2> a, std::span<const Vec2> b, const OspaParams& params) {
  params.validate();
  std::span<const Vec2> x = a.size() <= b.size() ? a : b;
  std::span<const Vec2> y = a.size() <= b.size() ? b : a;
  const std::size_t m = x.size();
  const std::size_t n = y.size();
  if (n == 0) return 0.0;

  const double cp = std::pow(params.c, params.p);
  std::vector<double> terms;
  terms.reserve(m);
  if (m > 0) {
    std::vector<std::vector<double>> cost(m, std::vector<double>(n));
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) cost[i][j] = std::pow(std::min(distance(x[i], y[j]), params.c), params.p);
    const auto assign = hungarian(cost);
    for (std::size_t i = 0; i < m; ++i) terms.push_back(cost[i][assign[i]]);
  }
  const double total = canonical_sum(std::move(terms)) + cp * static_cast<double>(n - m);
  return std::pow(total / static_cast<double>(n), 1.0 / params.p);
}

/// Point estimates from a PHD grid: N = round(sum v) greedy peaks, each reported
/// at the mass-weighted centroid of its 3x3 neighborhood, which is then suppressed.
inline std::vector<Vec2> estimate_targets(std::span<const double> phd, const GridWorld& world) {
  const double mass = std::accumulate(phd.begin(), phd.end(), 0.0);
  const long count = std::lround(std::max(0.0, mass));
  std::vector<double> work(phd.begin(), phd.end());
  std::vector<Vec2> out;
  for (long k = 0; k < count; ++k) {
    const auto it = std::max_element(work.begin(), work.end());
    if (it == work.end() || !(*it > 0.0)) break;
    const CellIndex peak = static_cast<CellIndex>(it - work.begin());
    const int col = world.col_of(peak);
    const int row = world.row_of(peak);
    double w = 0.0;
    Vec2 moment;
    for (int dr = -1; dr <= 1; ++dr) {
      for (int dc = -1; dc <= 1; ++dc) {
        if (!world.valid_col_row(col + dc, row + dr)) continue;
        const CellIndex x = world.index_of(col + dc, row + dr);
        w += work[x];
        moment += work[x] * world.cell_center(x);
        work[x] = 0.0;
      }
    }
    out.push_back(moment / w);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Team statistics

inline double population_sd(std::span<const double> v) {
  if (v.empty()) return 0.0;
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size()));
}

enum class RadiusConvention {
  eq_g,  // g = sqrt(C / pi)
  sqrt,  // g = sqrt(C)
};

/// Standard deviation of the power radii of a team.
inline double heterogeneity_level(std::span<const double> c_max, RadiusConvention convention = RadiusConvention::eq_g) {
  if (c_max.empty()) throw std::invalid_argument("heterogeneity_level: empty team");
  std::vector<double> g(c_max.size());
  for (std::size_t i = 0; i < c_max.size(); ++i) {
    g[i] = convention == RadiusConvention::eq_g ? std::sqrt(c_max[i] / kPi) : std::sqrt(c_max[i]);
  }
  return population_sd(g);
}

inline double total_capacity(std::span<const double> c_max) {
  return std::accumulate(c_max.begin(), c_max.end(), 0.0);
}

struct AreaCapacityStats {
  std::vector<double> ratio;  // |W_i| * cell area / U_i
  double sd = 0.0;
};

inline AreaCapacityStats area_capacity_stats(std::span<const std::size_t> cells_per_robot,
                                             std::span<const double> unused, double cell_area) {
  if (cells_per_robot.size() != unused.size()) throw std::invalid_argument("area_capacity_stats: size mismatch");
  AreaCapacityStats out;
  out.ratio.resize(unused.size());
  for (std::size_t i = 0; i < unused.size(); ++i) {
    if (!(unused[i] > 0.0)) throw std::invalid_argument("area_capacity_stats: U must be positive");
    out.ratio[i] = static_cast<double>(cells_per_robot[i]) * cell_area / unused[i];
  }
  out.sd = population_sd(out.ratio);
  return out;
}

/// Trailing mean over the last `window` points, shorter at the start.
inline std::vector<double> moving_average(std::span<const double> series, std::size_t window = 5) {
  if (window == 0) throw std::invalid_argument("moving_average: window must be >= 1");
  std::vector<double> out(series.size());
  for (std::size_t t = 0; t < series.size(); ++t) {
    const std::size_t len = std::min(window, t + 1);
    double sum = 0.0;
    for (std::size_t k = t + 1 - len; k <= t; ++k) sum += series[k];
    out[t] = sum / static_cast<double>(len);
  }
  return out;
}

inline double mean_of(std::span<const double> v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

/// Linear-interpolation quantile (q in [0, 1]) of an unsorted sample.
inline double quantile_of(std::vector<double> v, double q) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

inline double median_of(std::vector<double> v) { return quantile_of(std::move(v), 0.5); }

}  // namespace hetmtt
