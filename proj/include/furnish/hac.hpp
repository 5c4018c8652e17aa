#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <string_view>
#include <variant>
#include <vector>

#include "furnish/env.hpp"
#include "furnish/nn.hpp"

namespace furnish {

enum class Algorithm { q_learning, ppo };
std::string_view to_string(Algorithm a);
Algorithm parse_algorithm(std::string_view text);

/// Target lattice cells for both pieces plus the IoU threshold that decides
/// when they count as reached. The final goal of an episode is cells {0, 0}.
struct GoalSpec {
  std::array<int, 2> cells{0, 0};
  double threshold = 0.9;

  friend bool operator==(const GoalSpec&, const GoalSpec&) = default;
};

/// Level-1 action: proposed lattice cell of each piece along its axis.
struct Subgoal {
  std::array<int, 2> cells{0, 0};

  /// Proposed center coordinate of each piece along its move axis, meters.
  std::array<double, 2> target_pos(const SceneInstance& scene) const;

  friend bool operator==(const Subgoal&, const Subgoal&) = default;
};

struct HacSettings {
  int H = 10;  // primitive attempts per subgoal
  double subgoal_test_rate = 0.3;
  double penalty = -10.0;

  /// Throws std::invalid_argument when H < 1, the rate leaves [0, 1] or the
  /// penalty is not negative.
  void check() const;

  friend bool operator==(const HacSettings&, const HacSettings&) = default;
};

// ---------------------------------------------------------------------------
// Observations

inline constexpr int kObservationDim = 9;

/// Normalized observation: per piece the position and target along its axis
/// as fractions of the room extent and the clamped signed cell offset to the
/// target; then both axis extents (per 10 m) and the goal threshold.
nn::Vector encode_observation(const SceneInstance& scene, const std::array<int, 2>& cells,
                              const GoalSpec& goal, int offset_clip);

/// Per-piece IoU of `cells` against `goal.cells`.
std::array<double, 2> goal_ious(const SceneInstance& scene, const std::array<int, 2>& cells,
                                const std::array<int, 2>& goal_cells);
std::array<bool, 2> goal_components_reached(const SceneInstance& scene, const std::array<int, 2>& cells,
                                            const GoalSpec& goal);
bool goal_met(const SceneInstance& scene, const std::array<int, 2>& cells, const GoalSpec& goal);

// ---------------------------------------------------------------------------
// Transitions and storage

enum class TransitionKind { regular, hindsight_goal, hindsight_action, subgoal_test };
std::string_view to_string(TransitionKind k);
TransitionKind parse_transition_kind(std::string_view text);

using LevelAction = std::variant<JointAction, Subgoal>;

/// One goal-conditioned (s, a, r, s', g, done) tuple. Rewards are per-piece
/// IoU against `goal`, except subgoal_test records, which carry the penalty.
struct TransitionRecord {
  int level = 0;
  TransitionKind kind = TransitionKind::regular;
  ScenePtr scene;
  std::array<int, 2> cells{0, 0};
  std::array<int, 2> next_cells{0, 0};
  LevelAction action;
  std::array<double, 2> rewards{0.0, 0.0};
  GoalSpec goal;
  bool done = false;
  nn::Vector state;
  nn::Vector next_state;
  int primitive_steps = 0;    // level 1: primitive steps spent on the subgoal
  bool lower_greedy = false;  // level 1: lower level ran without exploration
  double log_prob = 0.0;      // log-probability of the action under the behavior policy
};

/// Bounded FIFO; the oldest record is evicted first.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(TransitionRecord record);
  std::size_t size() const { return records_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return records_.empty(); }
  /// Index 0 is the oldest stored record.
  const TransitionRecord& at(std::size_t index) const;
  std::vector<const TransitionRecord*> sample(std::size_t count, std::mt19937_64& rng) const;
  void clear();

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;  // slot of the oldest record once full
  std::vector<TransitionRecord> records_;
};

// ---------------------------------------------------------------------------
// Policies

struct Exploration {
  bool enabled = false;
  double epsilon = 0.0;
  std::mt19937_64* rng = nullptr;
};

template <class Action>
struct Decision {
  Action action;
  double log_prob = 0.0;
};

/// A two-level goal-conditioned policy.
class Controller {
 public:
  virtual ~Controller() = default;
  /// Level 1: choose lattice targets for both pieces.
  virtual Decision<Subgoal> propose(const EnvState& state, const GoalSpec& goal,
                                    const Exploration& exploration) const = 0;
  /// Level 0: choose a primitive joint move toward `subgoal`.
  virtual Decision<JointAction> act(const EnvState& state, const GoalSpec& subgoal,
                                    const Exploration& exploration) const = 0;
};

struct LevelParams {
  nn::Mlp policy;  // Q-values (q_learning) or logits (ppo), factored per piece
  nn::Mlp value;   // state value; used by ppo only
};

/// Weights of both levels plus the nesting settings.
struct HierarchyParams {
  HacSettings settings;
  Algorithm algorithm = Algorithm::q_learning;
  std::array<LevelParams, 2> levels;

  static HierarchyParams create(const HacSettings& settings, Algorithm algorithm,
                                const std::vector<int>& hidden, std::mt19937_64& rng);
};

/// Output head sizes of a level: level 0 has three moves per piece, level 1
/// has 2H+1 cell offsets per piece.
std::array<int, 2> head_sizes(int level, int H);

inline int move_index(AgentAction a) { return static_cast<int>(a) + 1; }
inline AgentAction move_from_index(int k) { return static_cast<AgentAction>(k - 1); }

/// Valid per-piece actions at `cells`: every move at level 0, offsets that
/// stay on the lattice at level 1.
std::array<std::vector<bool>, 2> action_masks(const EnvState& state, int level, int H);
std::array<std::vector<bool>, 2> action_masks(const SceneInstance& scene, const std::array<int, 2>& cells,
                                              int level, int H);

/// Controller backed by HierarchyParams networks: greedy when exploration is
/// off, epsilon-greedy per piece (q_learning) or sampled (ppo) otherwise.
class NetworkController final : public Controller {
 public:
  explicit NetworkController(const HierarchyParams& params) : params_(params) {}
  Decision<Subgoal> propose(const EnvState& state, const GoalSpec& goal,
                            const Exploration& exploration) const override;
  Decision<JointAction> act(const EnvState& state, const GoalSpec& subgoal,
                            const Exploration& exploration) const override;

 private:
  std::array<int, 2> choose(int level, const nn::Vector& obs, const std::array<std::vector<bool>, 2>& masks,
                            const Exploration& exploration, double& log_prob) const;
  const HierarchyParams& params_;
};

/// Uniformly random proposals and moves.
class RandomController final : public Controller {
 public:
  explicit RandomController(int H, std::uint64_t seed) : H_(H), rng_(seed) {}
  Decision<Subgoal> propose(const EnvState& state, const GoalSpec& goal, const Exploration&) const override;
  Decision<JointAction> act(const EnvState& state, const GoalSpec& subgoal, const Exploration&) const override;

 private:
  int H_;
  mutable std::mt19937_64 rng_;
};

/// Never moves: proposes the current cells and holds.
class FrozenController final : public Controller {
 public:
  Decision<Subgoal> propose(const EnvState& state, const GoalSpec&, const Exploration&) const override;
  Decision<JointAction> act(const EnvState&, const GoalSpec&, const Exploration&) const override;
};

// ---------------------------------------------------------------------------
// Episodes

struct EpisodeOptions {
  int max_high_steps = 12;
  bool explore = false;
  double epsilon = 0.0;
  /// End the episode once both pieces exceed this IoU against the final goal.
  std::optional<double> stop_iou;
  std::mt19937_64* rng = nullptr;
};

struct EpisodeResult {
  std::vector<EnvState> trajectory;  // initial state and one entry per primitive step
  std::vector<TransitionRecord> transitions;
  EnvState final_state;
  bool success = false;
  int primitive_steps = 0;
  int high_steps = 0;
};

/// Runs the nested policy: level 1 proposes a subgoal, level 0 gets at most H
/// primitive steps to reach it, until the final goal is met or the level-1
/// budget is spent. Returns regular, hindsight and subgoal-test transitions
/// of both levels.
EpisodeResult run_episode(const Controller& controller, const HacSettings& settings, EnvState state,
                          const GoalSpec& final_goal, const EpisodeOptions& options);

/// Copy of a level-1 transition whose subgoal is replaced by the cells the
/// lower level actually reached.
TransitionRecord hindsight_action_relabel(const TransitionRecord& segment, const EnvState& achieved);

/// For each level, copies of the source transitions (level 0 regular, level 1
/// hindsight_action) with the goal replaced by that level's final achieved
/// cells; rewards, done flags and observations are recomputed.
std::vector<TransitionRecord> hindsight_goal_relabel(const std::vector<TransitionRecord>& episode,
                                                     const HacSettings& settings);

/// Penalty transition for a subgoal the greedy lower level missed within H
/// steps; nothing when it was reached. Throws std::logic_error when the
/// segment was executed with exploration.
std::optional<TransitionRecord> subgoal_test_transition(const TransitionRecord& segment,
                                                        const EnvState& achieved,
                                                        const HacSettings& settings);

}  // namespace furnish
