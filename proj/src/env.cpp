#include "furnish/env.hpp"

#include <string>

namespace furnish {

std::string_view to_string(AgentAction a) {
  switch (a) {
    case AgentAction::negative: return "negative";
    case AgentAction::hold: return "hold";
    case AgentAction::positive: return "positive";
  }
  return "?";
}

AgentAction parse_agent_action(std::string_view text) {
  for (auto a : kAgentActions) {
    if (to_string(a) == text) return a;
  }
  throw EnvError("unknown agent action '" + std::string(text) + "'");
}

EnvState::EnvState(ScenePtr scene, std::array<int, 2> cells, int step_count, EnvRules rules)
    : scene_(std::move(scene)), cells_(cells), step_count_(step_count), rules_(rules) {
  if (!scene_) throw EnvError("environment state needs a scene");
  ranges_ = {lattice_range(*scene_, 0), lattice_range(*scene_, 1)};
}

EnvState EnvState::with_cells(std::array<int, 2> cells, int step_count) const {
  EnvState next = *this;
  next.cells_ = cells;
  next.step_count_ = step_count;
  return next;
}

EnvState reset(ScenePtr scene, std::optional<std::array<AxisBox, 2>> start_override, EnvRules rules) {
  if (!scene) throw EnvError("reset needs a scene");
  const auto& starts = start_override ? *start_override
                                      : std::array<AxisBox, 2>{scene->start[0], scene->start[1]};
  std::array<int, 2> cells{};
  for (int i = 0; i < 2; ++i) {
    if (!contains(scene->boundary, starts[i])) {
      throw EnvError("start of furniture " + std::to_string(i + 1) + " is outside the room");
    }
    const CellLookup lookup = cell_of(*scene, i, starts[i]);
    if (!lookup.ok()) {
      throw EnvError("start of furniture " + std::to_string(i + 1) + " is " + lookup.error);
    }
    cells[i] = lookup.cell;
  }
  return EnvState(std::move(scene), cells, 0, rules);
}

double lattice_iou(const SceneInstance& scene, int i, int cell, int target_cell) {
  if (cell == target_cell) return 1.0;
  return iou(place_on_lattice(scene, i, target_cell), place_on_lattice(scene, i, cell));
}

std::array<double, 2> reward(const EnvState& state) {
  const SceneInstance& scene = state.scene();
  return {iou(scene.goal[0], state.furniture_pos(0)), iou(scene.goal[1], state.furniture_pos(1))};
}

std::array<bool, 2> goal_reached(const EnvState& state, double threshold) {
  const auto r = reward(state);
  return {r[0] > threshold, r[1] > threshold};
}

StepResult step(const EnvState& state, const JointAction& action) {
  const SceneInstance& scene = state.scene();
  std::array<int, 2> cells = state.cells();
  std::array<bool, 2> dropped{false, false};

  for (int i = 0; i < 2; ++i) {
    const int delta = static_cast<int>(action.moves[i]);
    if (delta == 0) continue;
    const int target = cells[i] + delta;
    if (!contains(scene.boundary, place_on_lattice(scene, i, target))) {
      dropped[i] = true;
      continue;
    }
    if (state.rules().block_overlap) {
      // Resolved in index order: piece 2 sees piece 1's updated position.
      const int other = 1 - i;
      const AxisBox other_box = place_on_lattice(scene, other, cells[other]);
      const double before = intersection_area(place_on_lattice(scene, i, cells[i]), other_box);
      const double after = intersection_area(place_on_lattice(scene, i, target), other_box);
      if (after > before + 1e-12) {
        dropped[i] = true;
        continue;
      }
    }
    cells[i] = target;
  }

  EnvState next = state.with_cells(cells, state.step_count() + 1);
  const auto r = reward(next);
  return StepResult{std::move(next), r, dropped};
}

}  // namespace furnish
