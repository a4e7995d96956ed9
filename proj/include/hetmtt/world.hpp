#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

#include "hetmtt/geometry.hpp"

namespace hetmtt {

using CellIndex = std::size_t;
using RobotId = int;

/// Rectangular task space, origin at the lower-left corner, discretized into
/// square cells indexed row-major (index = row * cells_x + col).
class GridWorld {
 public:
  GridWorld() : GridWorld(1.0, 1.0, 1, 1) {}

  GridWorld(double width, double height, int cells_x, int cells_y)
      : width_(width), height_(height), cells_x_(cells_x), cells_y_(cells_y) {
    if (cells_x < 1 || cells_y < 1) {
      throw std::invalid_argument("GridWorld: cell counts must be >= 1");
    }
    if (!(width > 0.0) || !(height > 0.0)) {
      throw std::invalid_argument("GridWorld: dimensions must be positive");
    }
    cell_size_ = width / cells_x;
    const double other = height / cells_y;
    if (std::abs(cell_size_ - other) > 1e-9 * std::max(cell_size_, other)) {
      throw std::invalid_argument("GridWorld: cells must be square (width/cells_x != height/cells_y)");
    }
  }

  /// World whose cell count follows from a requested cell size.
  static GridWorld with_cell_size(double width, double height, double cell_size) {
    const int nx = static_cast<int>(std::lround(width / cell_size));
    const int ny = static_cast<int>(std::lround(height / cell_size));
    return GridWorld(width, height, nx, ny);
  }

  double width() const { return width_; }
  double height() const { return height_; }
  int cells_x() const { return cells_x_; }
  int cells_y() const { return cells_y_; }
  double cell_size() const { return cell_size_; }
  double cell_area() const { return cell_size_ * cell_size_; }
  std::size_t cell_count() const {
    return static_cast<std::size_t>(cells_x_) * static_cast<std::size_t>(cells_y_);
  }
  double diagonal() const { return std::hypot(width_, height_); }

  int col_of(CellIndex i) const { return static_cast<int>(i % static_cast<std::size_t>(cells_x_)); }
  int row_of(CellIndex i) const { return static_cast<int>(i / static_cast<std::size_t>(cells_x_)); }
  CellIndex index_of(int col, int row) const {
    return static_cast<CellIndex>(row) * static_cast<CellIndex>(cells_x_) + static_cast<CellIndex>(col);
  }
  bool valid_col_row(int col, int row) const {
    return col >= 0 && row >= 0 && col < cells_x_ && row < cells_y_;
  }

  Vec2 cell_center(CellIndex i) const {
    if (i >= cell_count()) {
      throw std::out_of_range("GridWorld::cell_center: index " + std::to_string(i) + " out of range");
    }
    return {(col_of(i) + 0.5) * cell_size_, (row_of(i) + 0.5) * cell_size_};
  }

  /// Index of the cell containing `p`; points on the far boundary belong to the last cell.
  std::optional<CellIndex> cell_at(Vec2 p) const {
    if (!contains(p)) return std::nullopt;
    const int col = std::min(cells_x_ - 1, static_cast<int>(std::floor(p.x / cell_size_)));
    const int row = std::min(cells_y_ - 1, static_cast<int>(std::floor(p.y / cell_size_)));
    return index_of(col, row);
  }

  bool contains(Vec2 p) const { return p.x >= 0.0 && p.y >= 0.0 && p.x <= width_ && p.y <= height_; }

  Vec2 clamp(Vec2 p) const { return {std::clamp(p.x, 0.0, width_), std::clamp(p.y, 0.0, height_)}; }

 private:
  double width_;
  double height_;
  int cells_x_;
  int cells_y_;
  double cell_size_ = 1.0;
};

struct RobotState {
  RobotId id = 0;
  Vec2 position;
  double heading = 0.0;  // radians, (-pi, pi]
  double max_linear_speed = 1.0;
  double max_angular_speed = 1.0;
};

/// Position clamped to the world bounds, heading wrapped into (-pi, pi].
inline RobotState clamp_pose(const GridWorld& world, RobotState pose) {
  pose.position = world.clamp(pose.position);
  pose.heading = wrap_angle(pose.heading);
  return pose;
}

}  // namespace hetmtt
