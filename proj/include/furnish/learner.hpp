#pragma once

#include <array>
#include <memory>
#include <stdexcept>
#include <vector>

#include "furnish/hac.hpp"
#include "furnish/nn.hpp"

namespace furnish {

class LearnerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Curriculum

inline constexpr int kLastCurriculumStage = 10;

/// IoU goal of curriculum stage c: 0.45 + 0.05 c for c in [0, 10].
double curriculum_threshold(int c);

struct CurriculumStage {
  int index = 0;
  double threshold = 0.45;
};

struct CurriculumSchedule {
  std::vector<CurriculumStage> stages;

  /// All eleven stages.
  static CurriculumSchedule standard();
  /// The given stage indices, which must be strictly increasing.
  static CurriculumSchedule from_indices(const std::vector<int>& indices);
};

/// Head sizes of a factored output: one block of action values (or logits)
/// per furniture piece.
using HeadLayout = std::array<int, 2>;

// ---------------------------------------------------------------------------
// Q-learning

struct QSample {
  nn::Vector obs;
  nn::Vector next_obs;
  std::array<int, 2> actions{0, 0};
  std::array<double, 2> rewards{0.0, 0.0};  // training reward per head
  bool done = false;
  std::array<std::vector<bool>, 2> next_masks;  // empty means every action is valid
  // Per-head loss weight; a subgoal test only trains the heads whose piece
  // missed its target.
  std::array<double, 2> weights{1.0, 1.0};
};

/// Training reward of a stored transition: IoU - 1 per piece (zero cost at
/// the goal), or the penalty itself for subgoal-test records.
std::array<double, 2> training_rewards(const TransitionRecord& record);

/// Network action indices of a record's action. Throws LearnerError if a
/// level-1 offset exceeds H.
std::array<int, 2> action_indices(const TransitionRecord& record, int H);

QSample to_q_sample(const TransitionRecord& record, int H);

/// r + gamma * max_a' Q(s', a') per head, with no bootstrap on done. When
/// `selector` is given the argmax comes from it (double Q-learning).
std::vector<std::array<double, 2>> td_targets(const nn::Mlp& target_net, const nn::Mlp* selector,
                                              const HeadLayout& heads, const std::vector<QSample>& batch,
                                              double gamma);

/// Mean over the batch of the summed per-head squared TD error. Fills
/// `grads` when non-null.
double q_loss(const nn::Mlp& net, const HeadLayout& heads, const std::vector<QSample>& batch,
              const std::vector<std::array<double, 2>>& targets, nn::Gradients* grads);

struct QConfig {
  double gamma = 0.95;
  double learning_rate = 0.001;
  nn::OptimizerKind optimizer = nn::OptimizerKind::sgd;
  int target_update_interval = 200;
  bool double_q = true;
};

/// Optimizer state and target network for one level.
class QLearner {
 public:
  QLearner(const nn::Mlp& online, const HeadLayout& heads, const QConfig& config);

  /// One gradient step on `batch`; returns the loss before the step.
  double update(nn::Mlp& online, const std::vector<QSample>& batch);

  const nn::Mlp& target() const { return target_; }
  int updates() const { return updates_; }

 private:
  HeadLayout heads_;
  QConfig config_;
  nn::Mlp target_;
  std::unique_ptr<nn::Optimizer> optimizer_;
  int updates_ = 0;
};

double update_q(QLearner& learner, nn::Mlp& online, const std::vector<QSample>& batch);

/// Greedy action per head under masks (empty mask = all valid).
std::array<int, 2> greedy_actions(const nn::Mlp& net, const HeadLayout& heads, const nn::Vector& obs,
                                  const std::array<std::vector<bool>, 2>& masks = {});

// ---------------------------------------------------------------------------
// PPO

struct PpoSample {
  nn::Vector obs;
  std::array<int, 2> actions{0, 0};
  std::array<std::vector<bool>, 2> masks;  // empty means every action is valid
  double old_log_prob = 0.0;
  double advantage = 0.0;
  double value_target = 0.0;
};

/// Joint log-probability of `actions` under the factored masked softmax.
double log_prob(const nn::Mlp& policy, const HeadLayout& heads, const nn::Vector& obs,
                const std::array<int, 2>& actions, const std::array<std::vector<bool>, 2>& masks = {});

/// Negated clipped surrogate, averaged over the batch.
double ppo_policy_loss(const nn::Mlp& policy, const HeadLayout& heads, const std::vector<PpoSample>& batch,
                       double clip, nn::Gradients* grads);

/// Mean squared error of the value head against `targets`.
double value_loss(const nn::Mlp& value, const std::vector<nn::Vector>& obs, const std::vector<double>& targets,
                  nn::Gradients* grads);

/// One on-policy step sequence for advantage estimation.
struct RolloutStep {
  nn::Vector obs;
  nn::Vector next_obs;
  double reward = 0.0;
  bool done = false;
  bool continues = false;  // the next step starts where this one ended
};

/// Generalized advantage estimates and value targets (advantage + V(s)).
void compute_advantages(const nn::Mlp& value, const std::vector<RolloutStep>& steps, double gamma,
                        double lambda, std::vector<double>& advantages, std::vector<double>& targets);

struct PpoConfig {
  double gamma = 0.95;
  double learning_rate = 0.001;
  double clip = 0.2;
  nn::OptimizerKind optimizer = nn::OptimizerKind::sgd;
};

struct PpoLosses {
  double policy = 0.0;
  double value = 0.0;
};

class PpoLearner {
 public:
  PpoLearner(const HeadLayout& heads, const PpoConfig& config);

  /// One clipped-surrogate step on the policy and one regression step on
  /// the value head. `critic_obs`/`critic_targets` add value-only samples.
  PpoLosses update(LevelParams& params, const std::vector<PpoSample>& batch,
                   const std::vector<nn::Vector>& critic_obs = {},
                   const std::vector<double>& critic_targets = {});

 private:
  HeadLayout heads_;
  PpoConfig config_;
  std::unique_ptr<nn::Optimizer> policy_opt_;
  std::unique_ptr<nn::Optimizer> value_opt_;
};

PpoLosses update_ppo(PpoLearner& learner, LevelParams& params, const std::vector<PpoSample>& batch);

}  // namespace furnish
