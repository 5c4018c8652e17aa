#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "furnish/hac.hpp"

namespace furnish {

class TrajectoryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kTrajectoryVersion = 1;

nlohmann::json record_to_json(const TransitionRecord& record);
/// Rebuilds a record against `scene`; observations are read back as stored.
TransitionRecord record_from_json(const nlohmann::json& j, const ScenePtr& scene);

/// Newline-delimited JSON: a header line carrying the scene and the start
/// cells, then one line per transition in the order run_episode produced them.
std::string write_trajectory(const SceneInstance& scene, const std::array<int, 2>& start_cells,
                             const std::vector<TransitionRecord>& records);

struct Trajectory {
  ScenePtr scene;
  std::array<int, 2> start_cells{0, 0};
  std::vector<TransitionRecord> records;
};

/// Errors name the line number and, for JSON syntax, the byte offset within it.
Trajectory read_trajectory(std::string_view text);

/// Sniffs the first line for the trajectory header.
bool looks_like_trajectory(std::string_view text);

/// Lattice cells of both pieces at the start and after each primitive step,
/// from the level-0 regular records.
std::vector<std::array<int, 2>> trajectory_frames(const Trajectory& trajectory);

struct ReplayReport {
  int steps = 0;
  int mismatches = 0;
  std::vector<std::string> problems;  // one line per mismatch
  std::array<double, 2> final_iou{0.0, 0.0};
};

/// Re-simulates the primitive actions from the first recorded cells and
/// compares every next state and reward with the recording.
ReplayReport replay(const Trajectory& trajectory);

}  // namespace furnish
