#pragma once

#include <stdexcept>

namespace furnish {

// Tolerance (meters) for closed containment, so boxes placed flush against a
// wall by arithmetic on centers still count as inside.
inline constexpr double kContainTolerance = 1e-9;

/// Axis-aligned rectangle stored as center and size, the common geometry of
/// walls, doors, windows and furniture. Zero-area or non-finite boxes cannot
/// be constructed.
class AxisBox {
 public:
  AxisBox() = default;
  AxisBox(double center_x, double center_y, double size_w, double size_h);

  double center_x() const { return center_x_; }
  double center_y() const { return center_y_; }
  double size_w() const { return size_w_; }
  double size_h() const { return size_h_; }

  double min_x() const { return center_x_ - 0.5 * size_w_; }
  double max_x() const { return center_x_ + 0.5 * size_w_; }
  double min_y() const { return center_y_ - 0.5 * size_h_; }
  double max_y() const { return center_y_ + 0.5 * size_h_; }
  double area() const { return size_w_ * size_h_; }

  AxisBox translated(double dx, double dy) const;
  AxisBox with_center(double cx, double cy) const;

  friend bool operator==(const AxisBox&, const AxisBox&) = default;

 private:
  double center_x_ = 0.0;
  double center_y_ = 0.0;
  double size_w_ = 1.0;
  double size_h_ = 1.0;
};

class GeometryError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Exact overlap area; 0 for disjoint or edge-touching boxes.
double intersection_area(const AxisBox& a, const AxisBox& b);

/// Intersection over union in [0, 1]. Identical boxes give exactly 1.
double iou(const AxisBox& a, const AxisBox& b);

/// Closed containment: touching edges count as inside.
bool contains(const AxisBox& outer, const AxisBox& inner);

}  // namespace furnish
