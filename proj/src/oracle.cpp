#include "furnish/oracle.hpp"

#include <algorithm>
#include <cstdlib>
#include <map>
#include <queue>
#include <stdexcept>

namespace furnish::oracle {

namespace {

AgentAction toward(int from, int to) {
  if (to > from) return AgentAction::positive;
  if (to < from) return AgentAction::negative;
  return AgentAction::hold;
}

Plan replay(EnvState state, std::vector<JointAction> actions) {
  Plan plan;
  for (const auto& a : actions) {
    StepResult res = step(state, a);
    plan.per_step_iou.push_back(res.rewards);
    state = std::move(res.next_state);
  }
  plan.length = static_cast<int>(actions.size());
  plan.actions = std::move(actions);
  return plan;
}

}  // namespace

Plan bfs_plan(const ScenePtr& scene, const std::array<AxisBox, 2>& start, EnvRules rules) {
  const EnvState initial = reset(scene, start, rules);
  using Key = std::array<int, 2>;
  std::map<Key, std::pair<Key, JointAction>> parent;
  std::queue<EnvState> frontier;
  parent.emplace(initial.cells(), std::make_pair(initial.cells(), JointAction{}));
  frontier.push(initial);
  const Key goal{0, 0};
  bool found = initial.cells() == goal;
  while (!frontier.empty() && !found) {
    const EnvState s = frontier.front();
    frontier.pop();
    for (auto a0 : kAgentActions) {
      for (auto a1 : kAgentActions) {
        const JointAction a{{a0, a1}};
        StepResult res = step(s, a);
        const Key k = res.next_state.cells();
        if (parent.count(k)) continue;
        parent.emplace(k, std::make_pair(s.cells(), a));
        if (k == goal) {
          found = true;
          break;
        }
        frontier.push(res.next_state.with_cells(k, 0));
      }
      if (found) break;
    }
  }
  if (!found) throw std::runtime_error("goal unreachable from start");
  std::vector<JointAction> actions;
  for (Key k = goal; k != initial.cells();) {
    const auto& [prev, a] = parent.at(k);
    actions.push_back(a);
    k = prev;
  }
  std::reverse(actions.begin(), actions.end());
  return replay(initial, std::move(actions));
}

Plan optimal_plan(const ScenePtr& scene, const std::array<AxisBox, 2>& start, EnvRules rules) {
  if (rules.block_overlap) return bfs_plan(scene, start, rules);
  const EnvState initial = reset(scene, start, rules);
  std::vector<JointAction> actions;
  std::array<int, 2> cells = initial.cells();
  while (cells[0] != 0 || cells[1] != 0) {
    JointAction a{{toward(cells[0], 0), toward(cells[1], 0)}};
    for (int i = 0; i < 2; ++i) cells[i] += static_cast<int>(a.moves[i]);
    actions.push_back(a);
  }
  return replay(initial, std::move(actions));
}

std::array<double, 2> max_achievable_iou(const ScenePtr& scene, const std::array<AxisBox, 2>& start,
                                         int budget) {
  if (budget < 0) throw std::invalid_argument("budget must be non-negative");
  const EnvState initial = reset(scene, start);
  std::array<double, 2> best{0.0, 0.0};
  for (int i = 0; i < 2; ++i) {
    const CellRange& range = initial.range(i);
    const int lo = std::max(range.lo, initial.cell(i) - budget);
    const int hi = std::min(range.hi, initial.cell(i) + budget);
    for (int c = lo; c <= hi; ++c) best[i] = std::max(best[i], lattice_iou(*scene, i, c, 0));
  }
  return best;
}

Decision<Subgoal> OracleController::propose(const EnvState& state, const GoalSpec& goal,
                                            const Exploration&) const {
  Decision<Subgoal> d;
  for (int i = 0; i < 2; ++i) {
    d.action.cells[i] = state.cell(i) + std::clamp(goal.cells[i] - state.cell(i), -H_, H_);
  }
  return d;
}

Decision<JointAction> OracleController::act(const EnvState& state, const GoalSpec& subgoal,
                                            const Exploration&) const {
  Decision<JointAction> d;
  for (int i = 0; i < 2; ++i) d.action.moves[i] = toward(state.cell(i), subgoal.cells[i]);
  return d;
}

}  // namespace furnish::oracle
