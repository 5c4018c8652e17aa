#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "furnish/hac.hpp"
#include "furnish/learner.hpp"

namespace furnish {

struct TrainConfig {
  double gamma = 0.95;
  double learning_rate = 0.001;
  int episodes_per_stage = 1000;
  double stop_iou = 0.9;
  Algorithm algorithm = Algorithm::q_learning;
  double ppo_clip = 0.2;
  int batch_size = 64;
  std::uint64_t seed = 0;

  std::vector<int> hidden{64, 64};
  nn::OptimizerKind optimizer = nn::OptimizerKind::sgd;
  HacSettings hac;
  int max_high_steps = 12;
  std::size_t buffer_capacity = 50000;
  int updates_per_episode = 8;
  int target_update_interval = 200;
  bool double_q = true;
  // Exploration rate falls linearly from start (stage 0) to end (stage 10).
  double epsilon_start = 0.3;
  double epsilon_end = 0.05;
  int ppo_epochs = 4;
  int ppo_rollout_episodes = 8;
  double gae_lambda = 0.95;
  // A stage also ends once this fraction of the last `stage_window`
  // episodes succeeded; values above 1 disable the early exit.
  double stage_success_rate = 1.01;
  int stage_window = 50;
  // Teacher candidates examined per requested start.
  int teacher_candidate_factor = 2;
  // Episodes collected concurrently between update phases.
  int parallel = 1;

  /// Throws std::invalid_argument naming the offending field.
  void check() const;
};

double stage_epsilon(const TrainConfig& config, int stage);

struct StartState {
  ScenePtr scene;
  std::array<AxisBox, 2> start;
  int teacher_steps = -1;  // primitive steps the teacher needed; -1 when not run
};

/// Uniform start on each piece's lattice for a random scene of the pool.
StartState random_start(const std::vector<ScenePtr>& pool, std::mt19937_64& rng);

struct StartSelection {
  std::vector<StartState> starts;
  int feasible = 0;
  bool shortfall = false;
};

struct TeacherOptions {
  double threshold = 0.45;
  int max_high_steps = 12;
  int max_candidates = 0;  // 0 means 4n
  std::optional<double> stop_iou;
};

/// Feasible-frontier start selection: runs the teacher greedily from random
/// candidates, keeps starts it solves at `options.threshold`, preferring
/// those whose teacher episode length is in the upper half. Pads with
/// uniform starts and flags a shortfall when too few are feasible. Without a
/// teacher every start is uniform.
StartSelection select_initial_states(const Controller* teacher, const HacSettings& settings,
                                     const std::vector<ScenePtr>& pool, int n, const TeacherOptions& options,
                                     std::mt19937_64& rng);

struct EpisodeMetric {
  int stage = 0;
  int episode = 0;
  double iou_f1 = 0.0;
  double iou_f2 = 0.0;
  int steps = 0;
  bool success = false;
};

inline constexpr const char* kMetricsHeader = "stage,episode,iou_f1,iou_f2,steps,success";
std::string format_metric_row(const EpisodeMetric& m);

struct TrainHooks {
  std::function<void(const EpisodeMetric&)> on_episode;
  std::function<void(int stage, const HierarchyParams&)> on_stage_complete;
  std::function<bool()> should_stop;
  /// Replaces the learned behavior policy (plumbing tests).
  const Controller* behavior = nullptr;
};

struct TrainResult {
  HierarchyParams params;
  std::vector<EpisodeMetric> metrics;
  std::vector<int> completed_stages;
  bool complete = false;
};

/// Curriculum training: each stage starts from the previous stage's weights,
/// draws starts with the previous stage's policy as teacher, and runs up to
/// episodes_per_stage episodes that end once both pieces pass stop_iou.
TrainResult train(const std::vector<ScenePtr>& scene_pool, const TrainConfig& config,
                  const CurriculumSchedule& schedule, const TrainHooks& hooks = {});

// ---------------------------------------------------------------------------

struct EvalOptions {
  int n_starts = 2000;  // per scene
  std::uint64_t seed = 0;
  int max_high_steps = 12;
  double goal_threshold = 0.95;
  double success_threshold = 0.9;
  /// Early stop as in training; unset lets episodes run until the goal
  /// threshold is met or the budget is spent.
  std::optional<double> stop_iou;
  /// Called after every episode with the scene and the start index.
  std::function<void(const ScenePtr&, int, const EpisodeResult&)> on_episode;
};

struct FurnitureStats {
  double mean = 0.0;
  double standard_error = 0.0;
};

struct RoomReport {
  RoomType room = RoomType::tatami;
  int episodes = 0;
  std::array<FurnitureStats, 2> iou;
  double success_rate = 0.0;
  double median_steps = 0.0;
  double median_oracle_steps = 0.0;
};

struct EvalReport {
  std::vector<RoomReport> rooms;
};

/// Greedy episodes from n_starts uniform starts per scene, grouped by room
/// type: final IoU mean and standard error per piece, success rate, and
/// median episode length next to the median oracle plan length.
EvalReport evaluate(const Controller& controller, const HacSettings& settings, const std::vector<ScenePtr>& scenes,
                    const EvalOptions& options);

std::string format_report_csv(const EvalReport& report);
std::string format_report_table(const EvalReport& report);

// ---------------------------------------------------------------------------

inline constexpr int kCheckpointVersion = 1;

std::string save_checkpoint(const HierarchyParams& params, int stage);
/// Throws std::runtime_error on version or shape problems.
HierarchyParams load_checkpoint(const std::string& document);

}  // namespace furnish
