#pragma once

#include <array>
#include <string>
#include <vector>

#include "furnish/scene.hpp"
#include "furnish/trajectory.hpp"

namespace furnish {

struct RenderOptions {
  bool grid = false;        // faint step-size lattice over the room
  double pixels_per_meter = 100.0;
  double frame_seconds = 0.25;  // animation time per trajectory frame
};

/// Furniture 1 is drawn red and furniture 2 yellow; goals are dashed
/// outlines in the same colors. The pieces sit at their start boxes.
std::string render_scene_svg(const SceneInstance& scene, const RenderOptions& options = {});

/// One <g class="frame"> per entry of trajectory_frames(); the frames play
/// in sequence and the last one stays visible.
std::string render_trajectory_svg(const Trajectory& trajectory, const RenderOptions& options = {});

}  // namespace furnish
