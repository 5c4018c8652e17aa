#pragma once

#include <array>
#include <vector>

#include "furnish/env.hpp"
#include "furnish/hac.hpp"

namespace furnish::oracle {

struct Plan {
  std::vector<JointAction> actions;
  std::vector<std::array<double, 2>> per_step_iou;  // reward after each action
  int length = 0;
};

/// Minimal-length plan bringing both pieces to IoU 1.0. Moves each piece
/// straight toward its goal under the default rules; falls back to
/// breadth-first search when overlap blocking is enabled. Throws EnvError for
/// an off-grid or out-of-room start.
Plan optimal_plan(const ScenePtr& scene, const std::array<AxisBox, 2>& start, EnvRules rules = {});

/// Breadth-first search over the joint lattice using the simulator itself.
Plan bfs_plan(const ScenePtr& scene, const std::array<AxisBox, 2>& start, EnvRules rules = {});

/// Best per-piece IoU reachable within `budget` primitive steps.
std::array<double, 2> max_achievable_iou(const ScenePtr& scene, const std::array<AxisBox, 2>& start,
                                         int budget);

/// Perfect policy: proposes the goal clamped to H cells away and moves each
/// piece straight at its subgoal.
class OracleController final : public Controller {
 public:
  explicit OracleController(int H) : H_(H) {}
  Decision<Subgoal> propose(const EnvState& state, const GoalSpec& goal, const Exploration&) const override;
  Decision<JointAction> act(const EnvState& state, const GoalSpec& subgoal, const Exploration&) const override;

 private:
  int H_;
};

}  // namespace furnish::oracle
