#include "furnish/trajectory.hpp"

#include <cmath>
#include <sstream>

#include "furnish/env.hpp"
#include "furnish/scene_json.hpp"

namespace furnish {

using nlohmann::json;

namespace {

json vector_to_json(const nn::Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

nn::Vector vector_from_json(const json& j) {
  const auto values = j.get<std::vector<double>>();
  nn::Vector v(static_cast<Eigen::Index>(values.size()));
  for (std::size_t k = 0; k < values.size(); ++k) v(static_cast<Eigen::Index>(k)) = values[k];
  return v;
}

}  // namespace

json record_to_json(const TransitionRecord& r) {
  json j;
  j["level"] = r.level;
  j["kind"] = std::string(to_string(r.kind));
  j["cells"] = r.cells;
  j["next_cells"] = r.next_cells;
  if (const auto* move = std::get_if<JointAction>(&r.action)) {
    j["action"] = {{"moves", {std::string(to_string(move->moves[0])), std::string(to_string(move->moves[1]))}}};
  } else {
    j["action"] = {{"subgoal", std::get<Subgoal>(r.action).cells}};
  }
  j["rewards"] = r.rewards;
  j["goal"] = {{"cells", r.goal.cells}, {"threshold", r.goal.threshold}};
  j["done"] = r.done;
  j["primitive_steps"] = r.primitive_steps;
  j["lower_greedy"] = r.lower_greedy;
  j["log_prob"] = r.log_prob;
  j["state"] = vector_to_json(r.state);
  j["next_state"] = vector_to_json(r.next_state);
  return j;
}

TransitionRecord record_from_json(const json& j, const ScenePtr& scene) {
  TransitionRecord r;
  r.scene = scene;
  r.level = j.at("level").get<int>();
  if (r.level != 0 && r.level != 1) throw TrajectoryError("level must be 0 or 1");
  r.kind = parse_transition_kind(j.at("kind").get<std::string>());
  r.cells = j.at("cells").get<std::array<int, 2>>();
  r.next_cells = j.at("next_cells").get<std::array<int, 2>>();
  const json& action = j.at("action");
  if (action.contains("moves")) {
    const auto moves = action.at("moves").get<std::array<std::string, 2>>();
    r.action = JointAction{{parse_agent_action(moves[0]), parse_agent_action(moves[1])}};
  } else {
    r.action = Subgoal{action.at("subgoal").get<std::array<int, 2>>()};
  }
  r.rewards = j.at("rewards").get<std::array<double, 2>>();
  r.goal.cells = j.at("goal").at("cells").get<std::array<int, 2>>();
  r.goal.threshold = j.at("goal").at("threshold").get<double>();
  r.done = j.at("done").get<bool>();
  r.primitive_steps = j.at("primitive_steps").get<int>();
  r.lower_greedy = j.at("lower_greedy").get<bool>();
  r.log_prob = j.at("log_prob").get<double>();
  r.state = vector_from_json(j.at("state"));
  r.next_state = vector_from_json(j.at("next_state"));
  return r;
}

std::string write_trajectory(const SceneInstance& scene, const std::array<int, 2>& start_cells,
                             const std::vector<TransitionRecord>& records) {
  std::string out;
  json header{{"format", "furnish-trajectory"},
              {"version", kTrajectoryVersion},
              {"scene", scene_to_json(scene)},
              {"start_cells", start_cells}};
  out += header.dump();
  out += '\n';
  for (const auto& r : records) {
    out += record_to_json(r).dump();
    out += '\n';
  }
  return out;
}

bool looks_like_trajectory(std::string_view text) {
  const std::string_view first = text.substr(0, text.find('\n'));
  return first.find("\"furnish-trajectory\"") != std::string_view::npos;
}

Trajectory read_trajectory(std::string_view text) {
  Trajectory t;
  std::size_t at = 0;
  int line_no = 0;
  while (at < text.size()) {
    std::size_t end = text.find('\n', at);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(at, end - at);
    at = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw TrajectoryError("line " + std::to_string(line_no) + ": invalid JSON at byte " + std::to_string(e.byte));
    }
    try {
      if (!t.scene) {
        if (j.value("format", "") != "furnish-trajectory") {
          throw TrajectoryError("line 1: missing furnish-trajectory header");
        }
        const int version = j.at("version").get<int>();
        if (version != kTrajectoryVersion) {
          throw TrajectoryError("line 1: unsupported trajectory version " + std::to_string(version));
        }
        SceneInstance scene = scene_from_json(j.at("scene"));
        const auto violations = validate(scene);
        if (!violations.empty()) throw TrajectoryError("line 1: invalid scene: " + violations.front());
        t.scene = std::make_shared<const SceneInstance>(std::move(scene));
        t.start_cells = j.at("start_cells").get<std::array<int, 2>>();
        for (int i = 0; i < 2; ++i) {
          if (!lattice_range(*t.scene, i).contains(t.start_cells[i])) {
            throw TrajectoryError("line 1: start cell of piece " + std::to_string(i + 1) + " leaves the room");
          }
        }
      } else {
        t.records.push_back(record_from_json(j, t.scene));
      }
    } catch (const TrajectoryError& e) {
      const std::string what = e.what();
      if (what.rfind("line ", 0) == 0) throw;
      throw TrajectoryError("line " + std::to_string(line_no) + ": " + what);
    } catch (const std::exception& e) {
      throw TrajectoryError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!t.scene) throw TrajectoryError("empty trajectory");
  return t;
}

std::vector<std::array<int, 2>> trajectory_frames(const Trajectory& trajectory) {
  std::vector<std::array<int, 2>> frames{trajectory.start_cells};
  for (const auto& r : trajectory.records) {
    if (r.level == 0 && r.kind == TransitionKind::regular) frames.push_back(r.next_cells);
  }
  return frames;
}

ReplayReport replay(const Trajectory& trajectory) {
  ReplayReport report;
  EnvState state(trajectory.scene, trajectory.start_cells, 0, EnvRules{});
  for (const auto& r : trajectory.records) {
    if (r.level != 0 || r.kind != TransitionKind::regular) continue;
    if (state.cells() != r.cells) {
      ++report.mismatches;
      report.problems.push_back("step " + std::to_string(report.steps) + ": recorded start cells differ from the "
                                "replayed state");
    }
    const StepResult res = step(state, std::get<JointAction>(r.action));
    if (res.next_state.cells() != r.next_cells) {
      ++report.mismatches;
      std::ostringstream msg;
      msg << "step " << report.steps << ": replayed cells (" << res.next_state.cell(0) << ", "
          << res.next_state.cell(1) << ") but recorded (" << r.next_cells[0] << ", " << r.next_cells[1] << ")";
      report.problems.push_back(msg.str());
    }
    const auto expected = goal_ious(*trajectory.scene, res.next_state.cells(), r.goal.cells);
    if (expected != r.rewards) {
      ++report.mismatches;
      report.problems.push_back("step " + std::to_string(report.steps) + ": reward differs from the recording");
    }
    state = res.next_state;
    ++report.steps;
  }
  report.final_iou = reward(state);
  return report;
}

}  // namespace furnish
