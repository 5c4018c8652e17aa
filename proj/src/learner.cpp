#include "furnish/learner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace furnish {

double curriculum_threshold(int c) {
  if (c < 0 || c > kLastCurriculumStage) {
    throw std::out_of_range("curriculum stage " + std::to_string(c) + " outside [0, 10]");
  }
  return 0.45 + 0.05 * c;
}

CurriculumSchedule CurriculumSchedule::standard() {
  CurriculumSchedule s;
  for (int c = 0; c <= kLastCurriculumStage; ++c) s.stages.push_back({c, curriculum_threshold(c)});
  return s;
}

CurriculumSchedule CurriculumSchedule::from_indices(const std::vector<int>& indices) {
  if (indices.empty()) throw std::invalid_argument("curriculum needs at least one stage");
  CurriculumSchedule s;
  for (std::size_t k = 0; k < indices.size(); ++k) {
    if (k > 0 && indices[k] <= indices[k - 1]) {
      throw std::invalid_argument("curriculum stages must be strictly increasing");
    }
    s.stages.push_back({indices[k], curriculum_threshold(indices[k])});
  }
  return s;
}

// ---------------------------------------------------------------------------

std::array<double, 2> training_rewards(const TransitionRecord& record) {
  if (record.kind == TransitionKind::subgoal_test) return record.rewards;
  return {record.rewards[0] - 1.0, record.rewards[1] - 1.0};
}

std::array<int, 2> action_indices(const TransitionRecord& record, int H) {
  std::array<int, 2> out{};
  if (const auto* joint = std::get_if<JointAction>(&record.action)) {
    for (int i = 0; i < 2; ++i) out[i] = move_index(joint->moves[i]);
    return out;
  }
  const auto& sub = std::get<Subgoal>(record.action);
  for (int i = 0; i < 2; ++i) {
    const int offset = sub.cells[i] - record.cells[i];
    if (offset < -H || offset > H) {
      throw LearnerError("subgoal offset " + std::to_string(offset) + " exceeds H=" + std::to_string(H));
    }
    out[i] = offset + H;
  }
  return out;
}

QSample to_q_sample(const TransitionRecord& record, int H) {
  QSample s;
  s.obs = record.state;
  s.next_obs = record.next_state;
  s.actions = action_indices(record, H);
  s.rewards = training_rewards(record);
  s.done = record.done;
  if (record.level == 1 && !s.done) s.next_masks = action_masks(*record.scene, record.next_cells, 1, H);
  if (record.kind == TransitionKind::subgoal_test) {
    const auto& subgoal = std::get<Subgoal>(record.action);
    const auto reached =
        goal_components_reached(*record.scene, record.next_cells, GoalSpec{subgoal.cells, record.goal.threshold});
    for (int i = 0; i < 2; ++i) s.weights[i] = reached[i] ? 0.0 : 1.0;
  }
  return s;
}

namespace {

nn::Matrix stack_columns(const std::vector<QSample>& batch, bool next) {
  const int dim = static_cast<int>(batch.front().obs.size());
  nn::Matrix m(dim, static_cast<int>(batch.size()));
  for (std::size_t b = 0; b < batch.size(); ++b) m.col(b) = next ? batch[b].next_obs : batch[b].obs;
  return m;
}

bool valid(const std::vector<bool>& mask, int k) { return mask.empty() || mask[k]; }

int masked_argmax(const double* values, int n, const std::vector<bool>& mask) {
  int best = -1;
  for (int k = 0; k < n; ++k) {
    if (valid(mask, k) && (best < 0 || values[k] > values[best])) best = k;
  }
  return best;
}

void check_finite(double loss, const char* what) {
  if (!std::isfinite(loss)) {
    throw LearnerError(std::string("non-finite ") + what + " loss (" + std::to_string(loss) +
                       "); check learning rate and reward scale");
  }
}

}  // namespace

std::vector<std::array<double, 2>> td_targets(const nn::Mlp& target_net, const nn::Mlp* selector,
                                              const HeadLayout& heads, const std::vector<QSample>& batch,
                                              double gamma) {
  std::vector<std::array<double, 2>> out(batch.size());
  if (batch.empty()) return out;
  const nn::Matrix next = stack_columns(batch, true);
  const nn::Matrix q_next = target_net.forward(next);
  nn::Matrix q_select;
  if (selector) q_select = selector->forward(next);
  for (std::size_t b = 0; b < batch.size(); ++b) {
    int offset = 0;
    for (int i = 0; i < 2; ++i) {
      double y = batch[b].rewards[i];
      if (!batch[b].done) {
        const auto& mask = batch[b].next_masks[i];
        const double* source = selector ? q_select.col(b).data() + offset : q_next.col(b).data() + offset;
        const int k = masked_argmax(source, heads[i], mask);
        y += gamma * q_next(offset + k, b);
      }
      out[b][i] = y;
      offset += heads[i];
    }
  }
  return out;
}

double q_loss(const nn::Mlp& net, const HeadLayout& heads, const std::vector<QSample>& batch,
              const std::vector<std::array<double, 2>>& targets, nn::Gradients* grads) {
  if (batch.empty()) throw LearnerError("empty Q batch");
  const nn::Matrix obs = stack_columns(batch, false);
  nn::Tape tape;
  const nn::Matrix q = net.forward(obs, tape);
  nn::Matrix d_out = nn::Matrix::Zero(q.rows(), q.cols());
  const double inv = 1.0 / static_cast<double>(batch.size());
  double loss = 0.0;
  for (std::size_t b = 0; b < batch.size(); ++b) {
    int offset = 0;
    for (int i = 0; i < 2; ++i) {
      const int row = offset + batch[b].actions[i];
      const double w = batch[b].weights[i];
      const double err = q(row, b) - targets[b][i];
      loss += w * err * err * inv;
      d_out(row, b) = 2.0 * w * err * inv;
      offset += heads[i];
    }
  }
  if (grads) *grads = net.backward(tape, d_out);
  return loss;
}

QLearner::QLearner(const nn::Mlp& online, const HeadLayout& heads, const QConfig& config)
    : heads_(heads),
      config_(config),
      target_(online),
      optimizer_(nn::make_optimizer(config.optimizer, config.learning_rate)) {
  if (!(config.gamma >= 0.0 && config.gamma < 1.0)) throw LearnerError("gamma must lie in [0, 1)");
  if (config.target_update_interval < 1) throw LearnerError("target_update_interval must be positive");
}

double QLearner::update(nn::Mlp& online, const std::vector<QSample>& batch) {
  const auto targets = td_targets(target_, config_.double_q ? &online : nullptr, heads_, batch, config_.gamma);
  nn::Gradients grads;
  const double loss = q_loss(online, heads_, batch, targets, &grads);
  check_finite(loss, "TD");
  optimizer_->apply(online, grads);
  if (++updates_ % config_.target_update_interval == 0) target_ = online;
  return loss;
}

double update_q(QLearner& learner, nn::Mlp& online, const std::vector<QSample>& batch) {
  return learner.update(online, batch);
}

std::array<int, 2> greedy_actions(const nn::Mlp& net, const HeadLayout& heads, const nn::Vector& obs,
                                  const std::array<std::vector<bool>, 2>& masks) {
  const nn::Matrix q = net.forward(obs);
  return {masked_argmax(q.data(), heads[0], masks[0]), masked_argmax(q.data() + heads[0], heads[1], masks[1])};
}

// ---------------------------------------------------------------------------

namespace {

// Masked log-softmax of one head; fills probabilities.
double head_log_prob(const double* logits, int n, const std::vector<bool>& mask, int action,
                     std::vector<double>& probs) {
  double peak = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < n; ++k)
    if (valid(mask, k)) peak = std::max(peak, logits[k]);
  double total = 0.0;
  probs.assign(n, 0.0);
  for (int k = 0; k < n; ++k) {
    if (valid(mask, k)) total += probs[k] = std::exp(logits[k] - peak);
  }
  for (auto& p : probs) p /= total;
  return logits[action] - peak - std::log(total);
}

}  // namespace

double log_prob(const nn::Mlp& policy, const HeadLayout& heads, const nn::Vector& obs,
                const std::array<int, 2>& actions, const std::array<std::vector<bool>, 2>& masks) {
  const nn::Matrix logits = policy.forward(obs);
  std::vector<double> probs;
  return head_log_prob(logits.data(), heads[0], masks[0], actions[0], probs) +
         head_log_prob(logits.data() + heads[0], heads[1], masks[1], actions[1], probs);
}

double ppo_policy_loss(const nn::Mlp& policy, const HeadLayout& heads, const std::vector<PpoSample>& batch,
                       double clip, nn::Gradients* grads) {
  if (batch.empty()) throw LearnerError("empty PPO batch");
  const int dim = static_cast<int>(batch.front().obs.size());
  nn::Matrix obs(dim, static_cast<int>(batch.size()));
  for (std::size_t b = 0; b < batch.size(); ++b) obs.col(b) = batch[b].obs;
  nn::Tape tape;
  const nn::Matrix logits = policy.forward(obs, tape);
  nn::Matrix d_out = nn::Matrix::Zero(logits.rows(), logits.cols());
  const double inv = 1.0 / static_cast<double>(batch.size());
  double loss = 0.0;
  std::array<std::vector<double>, 2> probs;
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const PpoSample& s = batch[b];
    double lp = 0.0;
    int offset = 0;
    for (int i = 0; i < 2; ++i) {
      lp += head_log_prob(logits.col(b).data() + offset, heads[i], s.masks[i], s.actions[i], probs[i]);
      offset += heads[i];
    }
    const double ratio = std::exp(lp - s.old_log_prob);
    const double clipped = std::clamp(ratio, 1.0 - clip, 1.0 + clip);
    const double unclipped_term = ratio * s.advantage;
    const double clipped_term = clipped * s.advantage;
    loss -= std::min(unclipped_term, clipped_term) * inv;
    // The clipped branch is constant in the parameters.
    if (unclipped_term <= clipped_term) {
      const double d_lp = -s.advantage * ratio * inv;
      offset = 0;
      for (int i = 0; i < 2; ++i) {
        for (int k = 0; k < heads[i]; ++k) {
          d_out(offset + k, b) = d_lp * ((k == s.actions[i] ? 1.0 : 0.0) - probs[i][k]);
        }
        offset += heads[i];
      }
    }
  }
  if (grads) *grads = policy.backward(tape, d_out);
  return loss;
}

double value_loss(const nn::Mlp& value, const std::vector<nn::Vector>& obs, const std::vector<double>& targets,
                  nn::Gradients* grads) {
  if (obs.empty()) throw LearnerError("empty value batch");
  nn::Matrix x(obs.front().size(), static_cast<int>(obs.size()));
  for (std::size_t b = 0; b < obs.size(); ++b) x.col(b) = obs[b];
  nn::Tape tape;
  const nn::Matrix v = value.forward(x, tape);
  nn::Matrix d_out(1, v.cols());
  const double inv = 1.0 / static_cast<double>(obs.size());
  double loss = 0.0;
  for (std::size_t b = 0; b < obs.size(); ++b) {
    const double err = v(0, b) - targets[b];
    loss += err * err * inv;
    d_out(0, b) = 2.0 * err * inv;
  }
  if (grads) *grads = value.backward(tape, d_out);
  return loss;
}

void compute_advantages(const nn::Mlp& value, const std::vector<RolloutStep>& steps, double gamma,
                        double lambda, std::vector<double>& advantages, std::vector<double>& targets) {
  const std::size_t n = steps.size();
  advantages.assign(n, 0.0);
  targets.assign(n, 0.0);
  if (n == 0) return;
  nn::Matrix obs(steps.front().obs.size(), static_cast<int>(n));
  nn::Matrix next(steps.front().obs.size(), static_cast<int>(n));
  for (std::size_t t = 0; t < n; ++t) {
    obs.col(t) = steps[t].obs;
    next.col(t) = steps[t].next_obs;
  }
  const nn::Matrix v = value.forward(obs);
  const nn::Matrix v_next = value.forward(next);
  double running = 0.0;
  for (std::size_t t = n; t-- > 0;) {
    const RolloutStep& s = steps[t];
    const double bootstrap = s.done ? 0.0 : gamma * v_next(0, t);
    const double delta = s.reward + bootstrap - v(0, t);
    const bool chain = s.continues && !s.done && t + 1 < n;
    running = delta + (chain ? gamma * lambda * running : 0.0);
    advantages[t] = running;
    targets[t] = running + v(0, t);
  }
}

PpoLearner::PpoLearner(const HeadLayout& heads, const PpoConfig& config)
    : heads_(heads),
      config_(config),
      policy_opt_(nn::make_optimizer(config.optimizer, config.learning_rate)),
      value_opt_(nn::make_optimizer(config.optimizer, config.learning_rate)) {
  if (!(config.gamma >= 0.0 && config.gamma < 1.0)) throw LearnerError("gamma must lie in [0, 1)");
  if (!(config.clip > 0.0)) throw LearnerError("ppo clip must be positive");
}

PpoLosses PpoLearner::update(LevelParams& params, const std::vector<PpoSample>& batch,
                             const std::vector<nn::Vector>& critic_obs, const std::vector<double>& critic_targets) {
  PpoLosses out;
  nn::Gradients grads;
  out.policy = ppo_policy_loss(params.policy, heads_, batch, config_.clip, &grads);
  check_finite(out.policy, "policy");
  policy_opt_->apply(params.policy, grads);

  if (params.value.empty()) return out;
  std::vector<nn::Vector> obs = critic_obs;
  std::vector<double> targets = critic_targets;
  for (const auto& s : batch) {
    obs.push_back(s.obs);
    targets.push_back(s.value_target);
  }
  out.value = value_loss(params.value, obs, targets, &grads);
  check_finite(out.value, "value");
  value_opt_->apply(params.value, grads);
  return out;
}

PpoLosses update_ppo(PpoLearner& learner, LevelParams& params, const std::vector<PpoSample>& batch) {
  return learner.update(params, batch);
}

}  // namespace furnish
