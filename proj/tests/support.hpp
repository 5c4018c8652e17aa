#pragma once

#include <cmath>
#include <memory>
#include <random>

#include "furnish/env.hpp"
#include "furnish/geometry.hpp"
#include "furnish/scene.hpp"

namespace furnish::testing {

inline constexpr double kRasterCell = 0.001;

// Grid cells whose centers ((k + 0.5) * cell) fall inside [lo, hi].
inline long long raster_count(double lo, double hi, double cell = kRasterCell) {
  const long long first = static_cast<long long>(std::ceil(lo / cell - 0.5));
  const long long last = static_cast<long long>(std::floor(hi / cell - 0.5));
  return last >= first ? last - first + 1 : 0;
}

// Rasterized areas in cell units. A rectangle covers exactly the product of
// its per-axis cell counts, and the shared cells of two rectangles are the
// cells of their overlap rectangle.
inline long long raster_cells(const AxisBox& b, double cell = kRasterCell) {
  return raster_count(b.min_x(), b.max_x(), cell) * raster_count(b.min_y(), b.max_y(), cell);
}

inline long long raster_shared(const AxisBox& a, const AxisBox& b, double cell = kRasterCell) {
  const double x0 = std::max(a.min_x(), b.min_x()), x1 = std::min(a.max_x(), b.max_x());
  const double y0 = std::max(a.min_y(), b.min_y()), y1 = std::min(a.max_y(), b.max_y());
  if (x1 <= x0 || y1 <= y0) return 0;
  return raster_count(x0, x1, cell) * raster_count(y0, y1, cell);
}

inline double raster_iou(const AxisBox& a, const AxisBox& b, double cell = kRasterCell) {
  const long long shared = raster_shared(a, b, cell);
  const long long uni = raster_cells(a, cell) + raster_cells(b, cell) - shared;
  return uni > 0 ? static_cast<double>(shared) / static_cast<double>(uni) : 0.0;
}

// Cell-by-cell scan; only for small boxes.
inline long long raster_shared_scan(const AxisBox& a, const AxisBox& b, double cell) {
  auto inside = [](const AxisBox& box, double x, double y) {
    return x >= box.min_x() && x <= box.max_x() && y >= box.min_y() && y <= box.max_y();
  };
  const double x0 = std::min(a.min_x(), b.min_x()), x1 = std::max(a.max_x(), b.max_x());
  const double y0 = std::min(a.min_y(), b.min_y()), y1 = std::max(a.max_y(), b.max_y());
  long long n = 0;
  for (long long i = static_cast<long long>(std::floor(x0 / cell)) - 1; (i + 0.5) * cell <= x1 + cell; ++i) {
    for (long long j = static_cast<long long>(std::floor(y0 / cell)) - 1; (j + 0.5) * cell <= y1 + cell; ++j) {
      const double x = (i + 0.5) * cell, y = (j + 0.5) * cell;
      if (inside(a, x, y) && inside(b, x, y)) ++n;
    }
  }
  return n;
}

// 10 x 10 room at [0,10]^2 with two 2 x 2 pieces: piece 1 moves vertically
// with its goal at (3, 5), piece 2 horizontally with its goal at (7, 5).
inline SceneInstance simple_scene(double step = 0.1) {
  SceneInstance s;
  s.room_type = RoomType::tatami;
  s.boundary = AxisBox(5, 5, 10, 10);
  s.fixed = {{ElementKind::wall, AxisBox(5, -0.05, 10.2, 0.1), "wall_bottom"},
             {ElementKind::door, AxisBox(9, -0.05, 0.9, 0.1), "door"}};
  s.goal = {AxisBox(3, 5, 2, 2), AxisBox(7, 5, 2, 2)};
  s.start = {AxisBox(3, 3, 2, 2), AxisBox(5, 5, 2, 2)};
  s.furniture = {{ElementKind::furniture, s.start[0], "bed"}, {ElementKind::furniture, s.start[1], "cabinet"}};
  s.axes = {MoveAxis::vertical, MoveAxis::horizontal};
  s.step_size = step;
  return s;
}

inline ScenePtr share(SceneInstance s) { return std::make_shared<const SceneInstance>(std::move(s)); }

inline std::array<AxisBox, 2> boxes_at(const SceneInstance& s, std::array<int, 2> cells) {
  return {place_on_lattice(s, 0, cells[0]), place_on_lattice(s, 1, cells[1])};
}

}  // namespace furnish::testing
