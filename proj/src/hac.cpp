#include "furnish/hac.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace furnish {

std::string_view to_string(Algorithm a) { return a == Algorithm::ppo ? "ppo" : "q_learning"; }

Algorithm parse_algorithm(std::string_view text) {
  if (text == "q_learning") return Algorithm::q_learning;
  if (text == "ppo") return Algorithm::ppo;
  throw std::invalid_argument("unknown algorithm '" + std::string(text) + "'");
}

std::string_view to_string(TransitionKind k) {
  switch (k) {
    case TransitionKind::regular: return "regular";
    case TransitionKind::hindsight_goal: return "hindsight_goal";
    case TransitionKind::hindsight_action: return "hindsight_action";
    case TransitionKind::subgoal_test: return "subgoal_test";
  }
  return "?";
}

TransitionKind parse_transition_kind(std::string_view text) {
  for (auto k : {TransitionKind::regular, TransitionKind::hindsight_goal, TransitionKind::hindsight_action,
                 TransitionKind::subgoal_test}) {
    if (to_string(k) == text) return k;
  }
  throw std::invalid_argument("unknown transition kind '" + std::string(text) + "'");
}

std::array<double, 2> Subgoal::target_pos(const SceneInstance& scene) const {
  return {axis_coord(place_on_lattice(scene, 0, cells[0]), scene.axes[0]),
          axis_coord(place_on_lattice(scene, 1, cells[1]), scene.axes[1])};
}

void HacSettings::check() const {
  if (H < 1) throw std::invalid_argument("H must be at least 1");
  if (!(subgoal_test_rate >= 0.0 && subgoal_test_rate <= 1.0)) {
    throw std::invalid_argument("subgoal_test_rate must lie in [0, 1]");
  }
  if (!(penalty < 0.0)) throw std::invalid_argument("penalty must be negative");
}

// ---------------------------------------------------------------------------

nn::Vector encode_observation(const SceneInstance& scene, const std::array<int, 2>& cells,
                              const GoalSpec& goal, int offset_clip) {
  nn::Vector obs(kObservationDim);
  const double clip = static_cast<double>(offset_clip);
  for (int i = 0; i < 2; ++i) {
    const bool horizontal = scene.axes[i] == MoveAxis::horizontal;
    const double lo = horizontal ? scene.boundary.min_x() : scene.boundary.min_y();
    const double extent = horizontal ? scene.boundary.size_w() : scene.boundary.size_h();
    const double pos = axis_coord(place_on_lattice(scene, i, cells[i]), scene.axes[i]);
    const double target = axis_coord(place_on_lattice(scene, i, goal.cells[i]), scene.axes[i]);
    const double offset = std::clamp(static_cast<double>(goal.cells[i] - cells[i]), -clip, clip);
    obs[3 * i + 0] = (pos - lo) / extent;
    obs[3 * i + 1] = (target - lo) / extent;
    obs[3 * i + 2] = offset / clip;
    obs[6 + i] = extent / 10.0;
  }
  obs[8] = goal.threshold;
  return obs;
}

std::array<double, 2> goal_ious(const SceneInstance& scene, const std::array<int, 2>& cells,
                                const std::array<int, 2>& goal_cells) {
  return {lattice_iou(scene, 0, cells[0], goal_cells[0]), lattice_iou(scene, 1, cells[1], goal_cells[1])};
}

std::array<bool, 2> goal_components_reached(const SceneInstance& scene, const std::array<int, 2>& cells,
                                            const GoalSpec& goal) {
  const auto r = goal_ious(scene, cells, goal.cells);
  return {r[0] > goal.threshold, r[1] > goal.threshold};
}

bool goal_met(const SceneInstance& scene, const std::array<int, 2>& cells, const GoalSpec& goal) {
  const auto r = goal_components_reached(scene, cells, goal);
  return r[0] && r[1];
}

// ---------------------------------------------------------------------------

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("replay buffer capacity must be positive");
  records_.reserve(std::min<std::size_t>(capacity, 1 << 16));
}

void ReplayBuffer::push(TransitionRecord record) {
  if (records_.size() < capacity_) {
    records_.push_back(std::move(record));
    return;
  }
  records_[head_] = std::move(record);
  head_ = (head_ + 1) % capacity_;
}

const TransitionRecord& ReplayBuffer::at(std::size_t index) const {
  if (index >= records_.size()) throw std::out_of_range("replay buffer index");
  return records_[(head_ + index) % records_.size()];
}

std::vector<const TransitionRecord*> ReplayBuffer::sample(std::size_t count, std::mt19937_64& rng) const {
  std::vector<const TransitionRecord*> out;
  if (records_.empty()) return out;
  std::uniform_int_distribution<std::size_t> pick(0, records_.size() - 1);
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) out.push_back(&records_[pick(rng)]);
  return out;
}

void ReplayBuffer::clear() {
  records_.clear();
  head_ = 0;
}

// ---------------------------------------------------------------------------

std::array<int, 2> head_sizes(int level, int H) {
  if (level == 0) return {3, 3};
  return {2 * H + 1, 2 * H + 1};
}

std::array<std::vector<bool>, 2> action_masks(const SceneInstance& scene, const std::array<int, 2>& cells,
                                              int level, int H) {
  std::array<std::vector<bool>, 2> masks;
  const auto sizes = head_sizes(level, H);
  for (int i = 0; i < 2; ++i) {
    if (level == 0) {
      masks[i].assign(sizes[i], true);
      continue;
    }
    const CellRange range = lattice_range(scene, i);
    masks[i].resize(sizes[i]);
    for (int k = 0; k < sizes[i]; ++k) masks[i][k] = range.contains(cells[i] + k - H);
  }
  return masks;
}

std::array<std::vector<bool>, 2> action_masks(const EnvState& state, int level, int H) {
  std::array<std::vector<bool>, 2> masks;
  const auto sizes = head_sizes(level, H);
  for (int i = 0; i < 2; ++i) {
    masks[i].resize(sizes[i]);
    for (int k = 0; k < sizes[i]; ++k) {
      masks[i][k] = level == 0 || state.range(i).contains(state.cell(i) + k - H);
    }
  }
  return masks;
}

HierarchyParams HierarchyParams::create(const HacSettings& settings, Algorithm algorithm,
                                        const std::vector<int>& hidden, std::mt19937_64& rng) {
  settings.check();
  HierarchyParams p;
  p.settings = settings;
  p.algorithm = algorithm;
  for (int level = 0; level < 2; ++level) {
    const auto sizes = head_sizes(level, settings.H);
    p.levels[level].policy = nn::Mlp({kObservationDim, hidden, sizes[0] + sizes[1]}, rng);
    if (algorithm == Algorithm::ppo) p.levels[level].value = nn::Mlp({kObservationDim, hidden, 1}, rng);
  }
  return p;
}

namespace {

int argmax_masked(const double* values, const std::vector<bool>& mask) {
  int best = -1;
  for (int k = 0; k < static_cast<int>(mask.size()); ++k) {
    if (mask[k] && (best < 0 || values[k] > values[best])) best = k;
  }
  return best;
}

int random_masked(const std::vector<bool>& mask, std::mt19937_64& rng) {
  const int n = static_cast<int>(std::count(mask.begin(), mask.end(), true));
  int pick = std::uniform_int_distribution<int>(0, n - 1)(rng);
  for (int k = 0; k < static_cast<int>(mask.size()); ++k) {
    if (mask[k] && pick-- == 0) return k;
  }
  return -1;
}

}  // namespace

std::array<int, 2> NetworkController::choose(int level, const nn::Vector& obs,
                                             const std::array<std::vector<bool>, 2>& masks,
                                             const Exploration& exploration, double& log_prob) const {
  const nn::Matrix out = params_.levels[level].policy.forward(obs);
  std::array<int, 2> picks{};
  log_prob = 0.0;
  int offset = 0;
  for (int i = 0; i < 2; ++i) {
    const int n = static_cast<int>(masks[i].size());
    const double* values = out.data() + offset;
    offset += n;
    if (params_.algorithm == Algorithm::ppo) {
      // Masked softmax; greedy takes the mode.
      double peak = -1e300;
      for (int k = 0; k < n; ++k)
        if (masks[i][k]) peak = std::max(peak, values[k]);
      std::vector<double> probs(n, 0.0);
      double total = 0.0;
      for (int k = 0; k < n; ++k) {
        if (masks[i][k]) total += probs[k] = std::exp(values[k] - peak);
      }
      for (auto& p : probs) p /= total;
      int k = argmax_masked(values, masks[i]);
      if (exploration.enabled && exploration.rng) {
        k = std::discrete_distribution<int>(probs.begin(), probs.end())(*exploration.rng);
      }
      picks[i] = k;
      log_prob += std::log(probs[k]);
    } else {
      int k = argmax_masked(values, masks[i]);
      if (exploration.enabled && exploration.rng && exploration.epsilon > 0.0 &&
          std::uniform_real_distribution<double>(0.0, 1.0)(*exploration.rng) < exploration.epsilon) {
        k = random_masked(masks[i], *exploration.rng);
      }
      picks[i] = k;
    }
  }
  return picks;
}

Decision<Subgoal> NetworkController::propose(const EnvState& state, const GoalSpec& goal,
                                             const Exploration& exploration) const {
  const int H = params_.settings.H;
  const auto obs = encode_observation(state.scene(), state.cells(), goal, H);
  Decision<Subgoal> d;
  const auto picks = choose(1, obs, action_masks(state, 1, H), exploration, d.log_prob);
  for (int i = 0; i < 2; ++i) d.action.cells[i] = state.cell(i) + picks[i] - H;
  return d;
}

Decision<JointAction> NetworkController::act(const EnvState& state, const GoalSpec& subgoal,
                                             const Exploration& exploration) const {
  const int H = params_.settings.H;
  const auto obs = encode_observation(state.scene(), state.cells(), subgoal, H);
  Decision<JointAction> d;
  const auto picks = choose(0, obs, action_masks(state, 0, H), exploration, d.log_prob);
  for (int i = 0; i < 2; ++i) d.action.moves[i] = move_from_index(picks[i]);
  return d;
}

Decision<Subgoal> RandomController::propose(const EnvState& state, const GoalSpec&, const Exploration&) const {
  Decision<Subgoal> d;
  for (int i = 0; i < 2; ++i) {
    const CellRange& r = state.range(i);
    const int lo = std::max(r.lo, state.cell(i) - H_);
    const int hi = std::min(r.hi, state.cell(i) + H_);
    d.action.cells[i] = std::uniform_int_distribution<int>(lo, hi)(rng_);
  }
  return d;
}

Decision<JointAction> RandomController::act(const EnvState&, const GoalSpec&, const Exploration&) const {
  Decision<JointAction> d;
  std::uniform_int_distribution<int> pick(0, 2);
  for (int i = 0; i < 2; ++i) d.action.moves[i] = move_from_index(pick(rng_));
  return d;
}

Decision<Subgoal> FrozenController::propose(const EnvState& state, const GoalSpec&, const Exploration&) const {
  return {Subgoal{state.cells()}, 0.0};
}

Decision<JointAction> FrozenController::act(const EnvState&, const GoalSpec&, const Exploration&) const {
  return {JointAction{}, 0.0};
}

// ---------------------------------------------------------------------------

namespace {

TransitionRecord make_record(int level, const ScenePtr& scene, const std::array<int, 2>& cells,
                             const std::array<int, 2>& next_cells, LevelAction action, const GoalSpec& goal,
                             int H) {
  TransitionRecord r;
  r.level = level;
  r.scene = scene;
  r.cells = cells;
  r.next_cells = next_cells;
  r.action = std::move(action);
  r.goal = goal;
  r.rewards = goal_ious(*scene, next_cells, goal.cells);
  r.done = r.rewards[0] > goal.threshold && r.rewards[1] > goal.threshold;
  r.state = encode_observation(*scene, cells, goal, H);
  r.next_state = encode_observation(*scene, next_cells, goal, H);
  return r;
}

}  // namespace

TransitionRecord hindsight_action_relabel(const TransitionRecord& segment, const EnvState& achieved) {
  if (segment.level != 1) throw std::logic_error("hindsight action relabel applies to level-1 transitions");
  TransitionRecord r = segment;
  r.kind = TransitionKind::hindsight_action;
  r.action = Subgoal{achieved.cells()};
  r.next_cells = achieved.cells();
  return r;
}

std::vector<TransitionRecord> hindsight_goal_relabel(const std::vector<TransitionRecord>& episode,
                                                     const HacSettings& settings) {
  std::vector<TransitionRecord> out;
  for (int level = 0; level < 2; ++level) {
    const TransitionKind source = level == 0 ? TransitionKind::regular : TransitionKind::hindsight_action;
    const TransitionRecord* last = nullptr;
    for (const auto& t : episode) {
      if (t.level == level && t.kind == source) last = &t;
    }
    if (!last) continue;
    const std::array<int, 2> achieved = last->next_cells;
    for (const auto& t : episode) {
      if (t.level != level || t.kind != source) continue;
      GoalSpec goal{achieved, t.goal.threshold};
      TransitionRecord r = make_record(level, t.scene, t.cells, t.next_cells, t.action, goal, settings.H);
      r.kind = TransitionKind::hindsight_goal;
      r.primitive_steps = t.primitive_steps;
      r.lower_greedy = t.lower_greedy;
      r.log_prob = t.log_prob;
      out.push_back(std::move(r));
    }
  }
  return out;
}

std::optional<TransitionRecord> subgoal_test_transition(const TransitionRecord& segment,
                                                        const EnvState& achieved,
                                                        const HacSettings& settings) {
  if (segment.level != 1) throw std::logic_error("subgoal testing applies to level-1 transitions");
  if (!segment.lower_greedy) {
    throw std::logic_error("subgoal test requested for a segment executed with exploration");
  }
  const auto* subgoal = std::get_if<Subgoal>(&segment.action);
  if (!subgoal) throw std::logic_error("level-1 transition without a subgoal action");
  const GoalSpec target{subgoal->cells, segment.goal.threshold};
  if (goal_met(achieved.scene(), achieved.cells(), target)) return std::nullopt;

  TransitionRecord r = segment;
  r.kind = TransitionKind::subgoal_test;
  r.next_cells = achieved.cells();
  r.next_state = encode_observation(achieved.scene(), achieved.cells(), segment.goal, settings.H);
  r.rewards = {settings.penalty, settings.penalty};
  r.done = true;
  return r;
}

EpisodeResult run_episode(const Controller& controller, const HacSettings& settings, EnvState state,
                          const GoalSpec& final_goal, const EpisodeOptions& options) {
  settings.check();
  if (options.max_high_steps < 1) throw std::invalid_argument("max_high_steps must be positive");
  const int H = settings.H;
  const ScenePtr& scene = state.scene_ptr();

  auto finished = [&](const EnvState& s) {
    if (goal_met(*scene, s.cells(), final_goal)) return true;
    if (options.stop_iou) {
      const auto r = goal_ious(*scene, s.cells(), final_goal.cells);
      return r[0] > *options.stop_iou && r[1] > *options.stop_iou;
    }
    return false;
  };

  EpisodeResult result{{state}, {}, state};
  if (finished(state)) {
    result.success = true;
    return result;
  }

  const Exploration high_explore{options.explore, options.epsilon, options.rng};
  for (int high = 0; high < options.max_high_steps; ++high) {
    const EnvState segment_start = state;
    Decision<Subgoal> proposal = controller.propose(state, final_goal, high_explore);
    for (int i = 0; i < 2; ++i) proposal.action.cells[i] = state.range(i).clamp(proposal.action.cells[i]);

    const bool testing = options.explore && options.rng &&
                         std::bernoulli_distribution(settings.subgoal_test_rate)(*options.rng);
    const bool lower_greedy = !options.explore || testing;
    const Exploration low_explore{!lower_greedy, options.epsilon, options.rng};
    const GoalSpec subgoal{proposal.action.cells, final_goal.threshold};

    int steps = 0;
    bool done = false;
    while (steps < H && !goal_met(*scene, state.cells(), subgoal)) {
      const Decision<JointAction> move = controller.act(state, subgoal, low_explore);
      StepResult res = step(state, move.action);
      TransitionRecord r = make_record(0, scene, state.cells(), res.next_state.cells(), move.action, subgoal, H);
      r.log_prob = move.log_prob;
      result.transitions.push_back(std::move(r));
      state = std::move(res.next_state);
      result.trajectory.push_back(state);
      ++steps;
      if (finished(state)) {
        done = true;
        break;
      }
    }
    result.primitive_steps += steps;
    ++result.high_steps;

    TransitionRecord segment =
        make_record(1, scene, segment_start.cells(), state.cells(), proposal.action, final_goal, H);
    segment.primitive_steps = steps;
    segment.lower_greedy = lower_greedy;
    segment.log_prob = proposal.log_prob;
    std::optional<TransitionRecord> penalty;
    if (testing && !done) penalty = subgoal_test_transition(segment, state, settings);
    TransitionRecord relabeled = hindsight_action_relabel(segment, state);
    result.transitions.push_back(std::move(segment));
    result.transitions.push_back(std::move(relabeled));
    if (penalty) result.transitions.push_back(std::move(*penalty));
    if (done) {
      result.success = true;
      break;
    }
  }

  auto relabeled = hindsight_goal_relabel(result.transitions, settings);
  result.transitions.insert(result.transitions.end(), std::make_move_iterator(relabeled.begin()),
                            std::make_move_iterator(relabeled.end()));
  result.final_state = state;
  return result;
}

}  // namespace furnish
