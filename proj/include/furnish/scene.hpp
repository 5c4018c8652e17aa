#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "furnish/geometry.hpp"

namespace furnish {

enum class ElementKind { wall, door, window, furniture };
enum class MoveAxis { horizontal, vertical };
enum class RoomType { tatami, bedroom, bathroom, kitchen };

inline constexpr std::array<RoomType, 4> kAllRoomTypes = {RoomType::tatami, RoomType::bedroom,
                                                          RoomType::bathroom, RoomType::kitchen};
inline constexpr double kDefaultStepSize = 0.1;
inline constexpr int kSceneFormatVersion = 1;

std::string_view to_string(ElementKind kind);
std::string_view to_string(MoveAxis axis);
std::string_view to_string(RoomType room);
ElementKind parse_element_kind(std::string_view text);
MoveAxis parse_move_axis(std::string_view text);
RoomType parse_room_type(std::string_view text);

struct Element {
  ElementKind kind = ElementKind::wall;
  AxisBox box;
  std::string label;

  friend bool operator==(const Element&, const Element&) = default;
};

/// A single room with two movable furniture pieces. Index 0 is "furniture 1"
/// (drawn red), index 1 is "furniture 2" (drawn yellow). Furniture i only
/// translates along axes[i], in steps of step_size, on the lattice anchored
/// at goal[i].
///
/// The vectors are sized by the generator or loader; validate() enforces the
/// exactly-two rule, so a malformed document can still be represented and
/// reported.
struct SceneInstance {
  RoomType room_type = RoomType::tatami;
  AxisBox boundary;
  std::vector<Element> fixed;
  std::vector<Element> furniture;
  std::vector<AxisBox> goal;
  std::vector<AxisBox> start;
  std::vector<MoveAxis> axes;
  double step_size = kDefaultStepSize;

  friend bool operator==(const SceneInstance&, const SceneInstance&) = default;
};

class SceneError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inclusive range of lattice cells (relative to the goal) that keep a piece
/// inside the room.
struct CellRange {
  int lo = 0;
  int hi = 0;
  bool contains(int cell) const { return cell >= lo && cell <= hi; }
  int clamp(int cell) const { return cell < lo ? lo : (cell > hi ? hi : cell); }
  int size() const { return hi - lo + 1; }
};

/// Coordinate of a box center along an axis.
double axis_coord(const AxisBox& box, MoveAxis axis);

/// Box of furniture i when displaced `cell` lattice steps from its goal.
AxisBox place_on_lattice(const SceneInstance& scene, int i, int cell);

/// Cells along the axis of furniture i for which the box stays in the room.
CellRange lattice_range(const SceneInstance& scene, int i);

/// Lattice cell of `box` for furniture i, or an error message when the box
/// has the wrong size, leaves the movement line, or sits between cells.
struct CellLookup {
  int cell = 0;
  std::string error;
  bool ok() const { return error.empty(); }
};
CellLookup cell_of(const SceneInstance& scene, int i, const AxisBox& box);

/// Empty when every invariant holds; otherwise one line per violation naming
/// the field and the broken rule.
std::vector<std::string> validate(const SceneInstance& scene);

/// Deterministic procedural room. Throws SceneError if bounded rejection
/// sampling cannot place the furniture.
SceneInstance generate_scene(RoomType room_type, std::uint64_t seed);

std::string save_scene(const SceneInstance& scene);
SceneInstance load_scene(std::string_view document);

}  // namespace furnish
