#include "furnish/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace furnish {

AxisBox::AxisBox(double center_x, double center_y, double size_w, double size_h)
    : center_x_(center_x), center_y_(center_y), size_w_(size_w), size_h_(size_h) {
  if (!std::isfinite(center_x) || !std::isfinite(center_y) || !std::isfinite(size_w) ||
      !std::isfinite(size_h)) {
    throw GeometryError("box fields must be finite");
  }
  if (!(size_w > 0.0) || !(size_h > 0.0)) {
    throw GeometryError("box size must be positive, got " + std::to_string(size_w) + " x " +
                        std::to_string(size_h));
  }
}

AxisBox AxisBox::translated(double dx, double dy) const {
  return AxisBox(center_x_ + dx, center_y_ + dy, size_w_, size_h_);
}

AxisBox AxisBox::with_center(double cx, double cy) const {
  return AxisBox(cx, cy, size_w_, size_h_);
}

namespace {

double overlap_1d(double lo_a, double hi_a, double lo_b, double hi_b) {
  return std::max(0.0, std::min(hi_a, hi_b) - std::max(lo_a, lo_b));
}

}  // namespace

double intersection_area(const AxisBox& a, const AxisBox& b) {
  if (a == b) return a.area();
  return overlap_1d(a.min_x(), a.max_x(), b.min_x(), b.max_x()) *
         overlap_1d(a.min_y(), a.max_y(), b.min_y(), b.max_y());
}

double iou(const AxisBox& a, const AxisBox& b) {
  if (a == b) return 1.0;
  const double inter = intersection_area(a, b);
  if (inter <= 0.0) return 0.0;
  const double uni = a.area() + b.area() - inter;
  return std::clamp(inter / uni, 0.0, 1.0);
}

bool contains(const AxisBox& outer, const AxisBox& inner) {
  return inner.min_x() >= outer.min_x() - kContainTolerance &&
         inner.max_x() <= outer.max_x() + kContainTolerance &&
         inner.min_y() >= outer.min_y() - kContainTolerance &&
         inner.max_y() <= outer.max_y() + kContainTolerance;
}

}  // namespace furnish
