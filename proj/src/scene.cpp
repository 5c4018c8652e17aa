#include "furnish/scene.hpp"

#include <cmath>
#include <random>

namespace furnish {

std::string_view to_string(ElementKind kind) {
  switch (kind) {
    case ElementKind::wall: return "wall";
    case ElementKind::door: return "door";
    case ElementKind::window: return "window";
    case ElementKind::furniture: return "furniture";
  }
  return "?";
}

std::string_view to_string(MoveAxis axis) {
  return axis == MoveAxis::horizontal ? "horizontal" : "vertical";
}

std::string_view to_string(RoomType room) {
  switch (room) {
    case RoomType::tatami: return "tatami";
    case RoomType::bedroom: return "bedroom";
    case RoomType::bathroom: return "bathroom";
    case RoomType::kitchen: return "kitchen";
  }
  return "?";
}

ElementKind parse_element_kind(std::string_view text) {
  for (auto k : {ElementKind::wall, ElementKind::door, ElementKind::window, ElementKind::furniture}) {
    if (to_string(k) == text) return k;
  }
  throw SceneError("unknown element kind '" + std::string(text) + "'");
}

MoveAxis parse_move_axis(std::string_view text) {
  if (text == "horizontal") return MoveAxis::horizontal;
  if (text == "vertical") return MoveAxis::vertical;
  throw SceneError("unknown move axis '" + std::string(text) + "'");
}

RoomType parse_room_type(std::string_view text) {
  for (auto r : kAllRoomTypes) {
    if (to_string(r) == text) return r;
  }
  throw SceneError("unknown room type '" + std::string(text) + "'");
}

double axis_coord(const AxisBox& box, MoveAxis axis) {
  return axis == MoveAxis::horizontal ? box.center_x() : box.center_y();
}

AxisBox place_on_lattice(const SceneInstance& scene, int i, int cell) {
  const AxisBox& g = scene.goal[i];
  const double d = cell * scene.step_size;
  if (scene.axes[i] == MoveAxis::horizontal) return g.with_center(g.center_x() + d, g.center_y());
  return g.with_center(g.center_x(), g.center_y() + d);
}

CellRange lattice_range(const SceneInstance& scene, int i) {
  const double extent = scene.axes[i] == MoveAxis::horizontal ? scene.boundary.size_w()
                                                               : scene.boundary.size_h();
  const int limit = static_cast<int>(std::ceil(extent / scene.step_size)) + 2;
  CellRange range;
  while (range.hi < limit && contains(scene.boundary, place_on_lattice(scene, i, range.hi + 1))) {
    ++range.hi;
  }
  while (range.lo > -limit && contains(scene.boundary, place_on_lattice(scene, i, range.lo - 1))) {
    --range.lo;
  }
  return range;
}

namespace {

constexpr double kSizeTolerance = 1e-9;
constexpr double kGridTolerance = 1e-6;  // in units of cells

bool same_size(const AxisBox& a, const AxisBox& b) {
  return std::abs(a.size_w() - b.size_w()) <= kSizeTolerance &&
         std::abs(a.size_h() - b.size_h()) <= kSizeTolerance;
}

double off_axis_coord(const AxisBox& box, MoveAxis axis) {
  return axis == MoveAxis::horizontal ? box.center_y() : box.center_x();
}

}  // namespace

CellLookup cell_of(const SceneInstance& scene, int i, const AxisBox& box) {
  const AxisBox& g = scene.goal[i];
  const MoveAxis axis = scene.axes[i];
  if (!same_size(box, g)) return {0, "size differs from goal"};
  if (std::abs(off_axis_coord(box, axis) - off_axis_coord(g, axis)) > kSizeTolerance) {
    return {0, "off the movement line of the goal"};
  }
  const double cells = (axis_coord(box, axis) - axis_coord(g, axis)) / scene.step_size;
  const double rounded = std::round(cells);
  if (std::abs(cells - rounded) > kGridTolerance) return {0, "not on the move grid"};
  return {static_cast<int>(rounded), {}};
}

std::vector<std::string> validate(const SceneInstance& scene) {
  std::vector<std::string> out;
  if (!(scene.step_size > 0.0) || !std::isfinite(scene.step_size)) {
    out.emplace_back("step_size: must be positive and finite");
  }
  if (scene.furniture.size() != 2) out.emplace_back("furniture: exactly two furniture required");
  if (scene.goal.size() != 2) out.emplace_back("goal: exactly two goal boxes required");
  if (scene.start.size() != 2) out.emplace_back("start: exactly two start boxes required");
  if (scene.axes.size() != 2) out.emplace_back("axes: exactly two move axes required");
  for (std::size_t k = 0; k < scene.fixed.size(); ++k) {
    if (scene.fixed[k].kind == ElementKind::furniture) {
      out.emplace_back("fixed[" + std::to_string(k) + "]: fixed elements cannot be furniture");
    }
  }
  if (!out.empty()) return out;

  for (int i = 0; i < 2; ++i) {
    const std::string tag = "[" + std::to_string(i + 1) + "]";
    if (scene.furniture[i].kind != ElementKind::furniture) {
      out.emplace_back("furniture" + tag + ": kind must be furniture");
    }
    if (!same_size(scene.goal[i], scene.furniture[i].box)) {
      out.emplace_back("goal" + tag + ": size differs from furniture");
    }
    if (!same_size(scene.start[i], scene.furniture[i].box)) {
      out.emplace_back("start" + tag + ": size differs from furniture");
    }
    if (!contains(scene.boundary, scene.goal[i])) out.emplace_back("goal" + tag + ": goal out of bounds");
    if (!contains(scene.boundary, scene.start[i])) {
      out.emplace_back("start" + tag + ": start out of bounds");
    }
    if (scene.step_size > 0.0) {
      const CellLookup lookup = cell_of(scene, i, scene.start[i]);
      if (!lookup.ok()) {
        out.emplace_back("goal" + tag + ": goal unreachable on move grid (" + lookup.error + ")");
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Procedural generator

namespace {

enum class Placement { flush_wall, centered };

struct FurnitureSpec {
  const char* label;
  MoveAxis axis;
  double w_lo, w_hi, h_lo, h_hi;
  Placement placement;
};

struct RoomSpec {
  FurnitureSpec first;
  FurnitureSpec second;
};

RoomSpec room_spec(RoomType room) {
  using enum MoveAxis;
  switch (room) {
    case RoomType::tatami:
      return {{"tatami_bed", vertical, 1.5, 2.0, 1.8, 2.2, Placement::centered},
              {"cabinet", horizontal, 0.8, 1.6, 0.4, 0.6, Placement::flush_wall}};
    case RoomType::bedroom:
      return {{"bed", vertical, 1.2, 1.8, 1.9, 2.2, Placement::centered},
              {"cabinet", horizontal, 0.8, 1.6, 0.45, 0.6, Placement::flush_wall}};
    case RoomType::bathroom:
      return {{"toilet", vertical, 0.4, 0.5, 0.6, 0.75, Placement::centered},
              {"washer", horizontal, 0.55, 0.65, 0.55, 0.65, Placement::flush_wall}};
    case RoomType::kitchen:
      return {{"cooker", horizontal, 0.6, 0.9, 0.55, 0.65, Placement::flush_wall},
              {"washer", vertical, 0.55, 0.65, 0.55, 0.65, Placement::flush_wall}};
  }
  throw SceneError("invalid room type");
}

constexpr double kRoomMin = 3.0;
constexpr double kRoomMax = 6.0;
constexpr double kWallThickness = 0.1;
constexpr double kClearance = 0.3;
constexpr double kDoorWidth = 0.9;
constexpr double kDoorSwing = 0.9;
constexpr int kMaxAttempts = 1000;

class Sampler {
 public:
  Sampler(RoomType room, std::uint64_t seed) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(room), 0x5ce9e5u};
    rng_.seed(seq);
  }
  double uniform(double lo, double hi) {
    if (hi <= lo) return lo;
    return std::uniform_real_distribution<double>(lo, hi)(rng_);
  }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool coin() { return integer(0, 1) == 1; }

 private:
  std::mt19937_64 rng_;
};

// Walls are numbered 0 = bottom, 1 = right, 2 = top, 3 = left.
AxisBox wall_opening(double room_w, double room_h, int wall, double offset, double width,
                     double depth) {
  switch (wall) {
    case 0: return {offset, 0.0, width, depth};
    case 1: return {room_w, offset, depth, width};
    case 2: return {offset, room_h, width, depth};
    default: return {0.0, offset, depth, width};
  }
}

double wall_length(double room_w, double room_h, int wall) {
  return (wall % 2 == 0) ? room_w : room_h;
}

// Swing clearance in front of a door, inside the room.
AxisBox door_clearance(double room_w, double room_h, int wall, const AxisBox& door) {
  switch (wall) {
    case 0: return {door.center_x(), kDoorSwing / 2, door.size_w(), kDoorSwing};
    case 1: return {room_w - kDoorSwing / 2, door.center_y(), kDoorSwing, door.size_h()};
    case 2: return {door.center_x(), room_h - kDoorSwing / 2, door.size_w(), kDoorSwing};
    default: return {kDoorSwing / 2, door.center_y(), kDoorSwing, door.size_h()};
  }
}

AxisBox place_goal(Sampler& s, const FurnitureSpec& spec, double w, double h, double room_w,
                   double room_h) {
  const bool horizontal = spec.axis == MoveAxis::horizontal;
  // Along-axis coordinate spans the room; the off-axis coordinate is either
  // against a wall or kept away from the walls.
  const double along_extent = horizontal ? room_w : room_h;
  const double along_size = horizontal ? w : h;
  const double off_extent = horizontal ? room_h : room_w;
  const double off_size = horizontal ? h : w;

  double along = 0.0;
  double off = 0.0;
  if (spec.placement == Placement::flush_wall) {
    along = s.uniform(along_size / 2, along_extent - along_size / 2);
    off = s.coin() ? off_size / 2 : off_extent - off_size / 2;
  } else {
    along = s.uniform(along_size / 2 + kClearance, along_extent - along_size / 2 - kClearance);
    off = s.uniform(off_size / 2 + kClearance, off_extent - off_size / 2 - kClearance);
  }
  return horizontal ? AxisBox(along, off, w, h) : AxisBox(off, along, w, h);
}

}  // namespace

SceneInstance generate_scene(RoomType room_type, std::uint64_t seed) {
  const RoomSpec spec = room_spec(room_type);
  Sampler s(room_type, seed);

  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    const double room_w = s.uniform(kRoomMin, kRoomMax);
    const double room_h = s.uniform(kRoomMin, kRoomMax);

    SceneInstance scene;
    scene.room_type = room_type;
    scene.step_size = kDefaultStepSize;
    scene.boundary = AxisBox(room_w / 2, room_h / 2, room_w, room_h);

    const double t = kWallThickness;
    scene.fixed.push_back({ElementKind::wall, {room_w / 2, -t / 2, room_w + 2 * t, t}, "wall_bottom"});
    scene.fixed.push_back({ElementKind::wall, {room_w + t / 2, room_h / 2, t, room_h}, "wall_right"});
    scene.fixed.push_back({ElementKind::wall, {room_w / 2, room_h + t / 2, room_w + 2 * t, t}, "wall_top"});
    scene.fixed.push_back({ElementKind::wall, {-t / 2, room_h / 2, t, room_h}, "wall_left"});

    const int door_wall = s.integer(0, 3);
    const double door_len = wall_length(room_w, room_h, door_wall);
    const double door_at = s.uniform(kDoorWidth / 2 + 0.1, door_len - kDoorWidth / 2 - 0.1);
    const AxisBox door = wall_opening(room_w, room_h, door_wall, door_at, kDoorWidth, 2 * t);
    scene.fixed.push_back({ElementKind::door, door, "door"});

    const int window_wall = (door_wall + s.integer(1, 3)) % 4;
    const double window_len = wall_length(room_w, room_h, window_wall);
    const double window_width = s.uniform(0.8, std::min(1.6, window_len - 0.4));
    const double window_at = s.uniform(window_width / 2 + 0.2, window_len - window_width / 2 - 0.2);
    scene.fixed.push_back(
        {ElementKind::window, wall_opening(room_w, room_h, window_wall, window_at, window_width, t),
         "window"});

    const AxisBox keep_clear = door_clearance(room_w, room_h, door_wall, door);

    bool placed = true;
    for (const FurnitureSpec* f : {&spec.first, &spec.second}) {
      const double w = s.uniform(f->w_lo, f->w_hi);
      const double h = s.uniform(f->h_lo, f->h_hi);
      const double along_room = f->axis == MoveAxis::horizontal ? room_w : room_h;
      const double off_room = f->axis == MoveAxis::horizontal ? room_h : room_w;
      const double along_size = f->axis == MoveAxis::horizontal ? w : h;
      const double off_size = f->axis == MoveAxis::horizontal ? h : w;
      const double margin = f->placement == Placement::centered ? 2 * kClearance : 0.0;
      // Require at least a few cells of travel along the axis.
      if (along_size + margin + 5 * scene.step_size > along_room || off_size + margin > off_room) {
        placed = false;
        break;
      }
      const AxisBox goal = place_goal(s, *f, w, h, room_w, room_h);
      if (intersection_area(goal, keep_clear) > 0.0) {
        placed = false;
        break;
      }
      if (!scene.goal.empty() && intersection_area(goal, scene.goal.front()) > 0.0) {
        placed = false;
        break;
      }
      scene.goal.push_back(goal);
      scene.axes.push_back(f->axis);
      scene.furniture.push_back({ElementKind::furniture, goal, f->label});
    }
    if (!placed) continue;

    for (int i = 0; i < 2; ++i) {
      const CellRange range = lattice_range(scene, i);
      const AxisBox start = place_on_lattice(scene, i, s.integer(range.lo, range.hi));
      scene.start.push_back(start);
      scene.furniture[i].box = start;
    }
    if (!validate(scene).empty()) continue;
    return scene;
  }
  throw SceneError("scene generation failed for room type " + std::string(to_string(room_type)) +
                   " after " + std::to_string(kMaxAttempts) + " attempts");
}

}  // namespace furnish
