#pragma once

#include <array>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string_view>

#include "furnish/scene.hpp"

namespace furnish {

/// Per-agent move along that furniture's axis: positive is +x (right) or
/// +y (up). `hold` leaves the piece in place.
enum class AgentAction : int { negative = -1, hold = 0, positive = 1 };

inline constexpr std::array<AgentAction, 3> kAgentActions = {AgentAction::negative, AgentAction::hold,
                                                             AgentAction::positive};

std::string_view to_string(AgentAction a);
AgentAction parse_agent_action(std::string_view text);

struct JointAction {
  std::array<AgentAction, 2> moves{AgentAction::hold, AgentAction::hold};

  friend bool operator==(const JointAction&, const JointAction&) = default;
};

struct EnvRules {
  /// Also drop moves that increase the overlap between the two pieces.
  bool block_overlap = false;

  friend bool operator==(const EnvRules&, const EnvRules&) = default;
};

using ScenePtr = std::shared_ptr<const SceneInstance>;

/// Simulator state. Furniture positions are lattice cells relative to each
/// goal, so positions stay exactly on the move grid.
class EnvState {
 public:
  EnvState(ScenePtr scene, std::array<int, 2> cells, int step_count, EnvRules rules);

  const SceneInstance& scene() const { return *scene_; }
  const ScenePtr& scene_ptr() const { return scene_; }
  const std::array<int, 2>& cells() const { return cells_; }
  int cell(int i) const { return cells_[i]; }
  int step_count() const { return step_count_; }
  const EnvRules& rules() const { return rules_; }
  const CellRange& range(int i) const { return ranges_[i]; }

  AxisBox furniture_pos(int i) const { return place_on_lattice(*scene_, i, cells_[i]); }

  EnvState with_cells(std::array<int, 2> cells, int step_count) const;

  friend bool operator==(const EnvState& a, const EnvState& b) {
    return *a.scene_ == *b.scene_ && a.cells_ == b.cells_ && a.step_count_ == b.step_count_ &&
           a.rules_ == b.rules_;
  }

 private:
  ScenePtr scene_;
  std::array<int, 2> cells_;
  int step_count_;
  EnvRules rules_;
  std::array<CellRange, 2> ranges_;
};

struct StepResult {
  EnvState next_state;
  std::array<double, 2> rewards;
  std::array<bool, 2> dropped;
};

class EnvError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

EnvState reset(ScenePtr scene, std::optional<std::array<AxisBox, 2>> start_override = std::nullopt,
               EnvRules rules = {});

StepResult step(const EnvState& state, const JointAction& action);

/// Per-furniture IoU against the scene goals.
std::array<double, 2> reward(const EnvState& state);

/// Component i is true iff the IoU of furniture i is strictly above threshold.
std::array<bool, 2> goal_reached(const EnvState& state, double threshold);

/// IoU of furniture i at `cell` against the same piece at `target_cell`.
double lattice_iou(const SceneInstance& scene, int i, int cell, int target_cell);

}  // namespace furnish
