#include "furnish/train.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <future>
#include <stdexcept>
#include <map>
#include <sstream>
#include <utility>

#include "furnish/oracle.hpp"

namespace furnish {

void TrainConfig::check() const {
  auto fail = [](const std::string& field, const std::string& rule) {
    throw std::invalid_argument("config field '" + field + "': " + rule);
  };
  if (!(gamma >= 0.0 && gamma < 1.0)) fail("gamma", "must lie in [0, 1)");
  if (!(learning_rate > 0.0)) fail("learning_rate", "must be positive");
  if (episodes_per_stage < 1) fail("episodes_per_stage", "must be positive");
  if (!(stop_iou >= 0.0 && stop_iou <= 1.0)) fail("stop_iou", "must lie in [0, 1]");
  if (!(ppo_clip > 0.0)) fail("ppo_clip", "must be positive");
  if (batch_size < 1) fail("batch_size", "must be positive");
  if (hidden.empty()) fail("hidden", "needs at least one layer");
  for (int h : hidden)
    if (h < 1) fail("hidden", "widths must be positive");
  if (hac.H < 1) fail("H", "must be at least 1");
  if (!(hac.subgoal_test_rate >= 0.0 && hac.subgoal_test_rate <= 1.0)) fail("subgoal_test_rate", "must lie in [0, 1]");
  if (!(hac.penalty < 0.0)) fail("penalty", "must be negative");
  if (max_high_steps < 1) fail("max_high_steps", "must be positive");
  if (buffer_capacity < 1) fail("buffer_capacity", "must be positive");
  if (updates_per_episode < 0) fail("updates_per_episode", "must be non-negative");
  if (target_update_interval < 1) fail("target_update_interval", "must be positive");
  if (!(epsilon_start >= 0.0 && epsilon_start <= 1.0)) fail("epsilon_start", "must lie in [0, 1]");
  if (!(epsilon_end >= 0.0 && epsilon_end <= 1.0)) fail("epsilon_end", "must lie in [0, 1]");
  if (ppo_epochs < 1) fail("ppo_epochs", "must be positive");
  if (ppo_rollout_episodes < 1) fail("ppo_rollout_episodes", "must be positive");
  if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0)) fail("gae_lambda", "must lie in [0, 1]");
  if (stage_window < 1) fail("stage_window", "must be positive");
  if (teacher_candidate_factor < 1) fail("teacher_candidate_factor", "must be positive");
  if (parallel < 1) fail("parallel", "must be positive");
}

double stage_epsilon(const TrainConfig& config, int stage) {
  const double t = static_cast<double>(std::clamp(stage, 0, kLastCurriculumStage)) / kLastCurriculumStage;
  return config.epsilon_start + (config.epsilon_end - config.epsilon_start) * t;
}

StartState random_start(const std::vector<ScenePtr>& pool, std::mt19937_64& rng) {
  if (pool.empty()) throw std::invalid_argument("empty scene pool");
  const auto& scene = pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)];
  StartState s{scene, {scene->start[0], scene->start[1]}, -1};
  for (int i = 0; i < 2; ++i) {
    const CellRange range = lattice_range(*scene, i);
    s.start[i] = place_on_lattice(*scene, i, std::uniform_int_distribution<int>(range.lo, range.hi)(rng));
  }
  return s;
}

StartSelection select_initial_states(const Controller* teacher, const HacSettings& settings,
                                     const std::vector<ScenePtr>& pool, int n, const TeacherOptions& options,
                                     std::mt19937_64& rng) {
  if (n < 1) throw std::invalid_argument("select_initial_states needs n >= 1");
  StartSelection sel;
  if (!teacher) {
    for (int k = 0; k < n; ++k) sel.starts.push_back(random_start(pool, rng));
    return sel;
  }
  const int max_candidates = options.max_candidates > 0 ? options.max_candidates : 4 * n;
  const GoalSpec goal{{0, 0}, options.threshold};
  EpisodeOptions run;
  run.max_high_steps = options.max_high_steps;
  run.stop_iou = options.stop_iou;

  std::vector<StartState> feasible;
  for (int k = 0; k < max_candidates && static_cast<int>(feasible.size()) < 2 * n; ++k) {
    StartState cand = random_start(pool, rng);
    const EpisodeResult res = run_episode(*teacher, settings, reset(cand.scene, cand.start), goal, run);
    if (!res.success) continue;
    cand.teacher_steps = res.primitive_steps;
    feasible.push_back(std::move(cand));
  }
  sel.feasible = static_cast<int>(feasible.size());
  std::stable_sort(feasible.begin(), feasible.end(),
                   [](const StartState& a, const StartState& b) { return a.teacher_steps > b.teacher_steps; });
  if (static_cast<int>(feasible.size()) > n) feasible.resize(n);
  sel.starts = std::move(feasible);
  std::shuffle(sel.starts.begin(), sel.starts.end(), rng);
  if (static_cast<int>(sel.starts.size()) < n) {
    sel.shortfall = true;
    while (static_cast<int>(sel.starts.size()) < n) sel.starts.push_back(random_start(pool, rng));
  }
  return sel;
}

std::string format_metric_row(const EpisodeMetric& m) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%d,%d,%.6f,%.6f,%d,%d", m.stage, m.episode, m.iou_f1, m.iou_f2, m.steps,
                m.success ? 1 : 0);
  return buf;
}

// ---------------------------------------------------------------------------

namespace {

std::mt19937_64 episode_rng(std::uint64_t seed, int stage, int episode) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stage), static_cast<std::uint32_t>(episode), 0xe915u};
  return std::mt19937_64(seq);
}

bool stored_for_q(const TransitionRecord& r) {
  if (r.level == 0) return r.kind == TransitionKind::regular || r.kind == TransitionKind::hindsight_goal;
  return r.kind != TransitionKind::regular;
}

class Trainer {
 public:
  Trainer(const std::vector<ScenePtr>& pool, const TrainConfig& config, const TrainHooks& hooks)
      : pool_(pool), config_(config), hooks_(hooks), buffers_{ReplayBuffer(config.buffer_capacity),
                                                               ReplayBuffer(config.buffer_capacity)} {
    std::seed_seq init_seq{static_cast<std::uint32_t>(config.seed), static_cast<std::uint32_t>(config.seed >> 32),
                           0x1a17u};
    std::mt19937_64 init_rng(init_seq);
    params_ = HierarchyParams::create(config.hac, config.algorithm, config.hidden, init_rng);
    std::seed_seq train_seq{static_cast<std::uint32_t>(config.seed), static_cast<std::uint32_t>(config.seed >> 32),
                            0x7a11u};
    rng_.seed(train_seq);
    for (int level = 0; level < 2; ++level) {
      const HeadLayout heads = head_sizes(level, config.hac.H);
      if (config.algorithm == Algorithm::q_learning) {
        q_[level] = std::make_unique<QLearner>(
            params_.levels[level].policy, heads,
            QConfig{config.gamma, config.learning_rate, config.optimizer, config.target_update_interval,
                    config.double_q});
      } else {
        ppo_[level] = std::make_unique<PpoLearner>(
            heads, PpoConfig{config.gamma, config.learning_rate, config.ppo_clip, config.optimizer});
      }
    }
  }

  TrainResult run(const CurriculumSchedule& schedule) {
    TrainResult result;
    std::optional<int> previous;
    for (const CurriculumStage& stage : schedule.stages) {
      if (!run_stage(stage, previous, result)) {
        result.params = params_;
        return result;
      }
      result.completed_stages.push_back(stage.index);
      if (hooks_.on_stage_complete) hooks_.on_stage_complete(stage.index, params_);
      previous = stage.index;
    }
    result.params = params_;
    result.complete = true;
    return result;
  }

 private:
  const Controller& behavior(const NetworkController& network) const {
    return hooks_.behavior ? *hooks_.behavior : network;
  }

  bool run_stage(const CurriculumStage& stage, std::optional<int> previous, TrainResult& result) {
    const int n = config_.episodes_per_stage;
    StartSelection selection;
    {
      const HierarchyParams teacher_params = params_;
      const NetworkController teacher_network(teacher_params);
      const Controller* teacher = previous ? &behavior(teacher_network) : nullptr;
      TeacherOptions teacher_options;
      teacher_options.threshold = previous ? curriculum_threshold(*previous) : stage.threshold;
      teacher_options.max_high_steps = config_.max_high_steps;
      teacher_options.max_candidates = config_.teacher_candidate_factor * 2 * n;
      teacher_options.stop_iou = config_.stop_iou;
      selection = select_initial_states(teacher, config_.hac, pool_, n, teacher_options, rng_);
    }

    const double epsilon = stage_epsilon(config_, stage.index);
    const GoalSpec goal{{0, 0}, stage.threshold};
    std::deque<bool> window;
    int window_successes = 0;

    for (int e = 0; e < n;) {
      if (hooks_.should_stop && hooks_.should_stop()) return false;
      const int count = std::min(config_.parallel, n - e);
      const NetworkController network(params_);
      const Controller& actor = behavior(network);
      auto collect = [&](int episode) {
        std::mt19937_64 rng = episode_rng(config_.seed, stage.index, episode);
        const StartState& start = selection.starts[episode % selection.starts.size()];
        EpisodeOptions opts;
        opts.max_high_steps = config_.max_high_steps;
        opts.explore = true;
        opts.epsilon = epsilon;
        opts.stop_iou = config_.stop_iou;
        opts.rng = &rng;
        return run_episode(actor, config_.hac, reset(start.scene, start.start), goal, opts);
      };
      std::vector<EpisodeResult> episodes;
      if (count == 1) {
        episodes.push_back(collect(e));
      } else {
        std::vector<std::future<EpisodeResult>> futures;
        for (int k = 0; k < count; ++k) futures.push_back(std::async(std::launch::async, collect, e + k));
        for (auto& f : futures) episodes.push_back(f.get());
      }

      for (int k = 0; k < count; ++k, ++e) {
        EpisodeResult& ep = episodes[k];
        learn_from(ep);
        const auto final_iou = reward(ep.final_state);
        EpisodeMetric m{stage.index, e, final_iou[0], final_iou[1], ep.primitive_steps, ep.success};
        result.metrics.push_back(m);
        if (hooks_.on_episode) hooks_.on_episode(m);
        window.push_back(ep.success);
        window_successes += ep.success ? 1 : 0;
        if (static_cast<int>(window.size()) > config_.stage_window) {
          window_successes -= window.front() ? 1 : 0;
          window.pop_front();
        }
      }
      if (static_cast<int>(window.size()) == config_.stage_window &&
          window_successes >= config_.stage_success_rate * config_.stage_window) {
        break;
      }
    }
    return true;
  }

  void learn_from(const EpisodeResult& ep) {
    if (config_.algorithm == Algorithm::q_learning) {
      for (const auto& r : ep.transitions) {
        if (stored_for_q(r)) buffers_[r.level].push(r);
      }
      for (int level = 0; level < 2; ++level) {
        if (buffers_[level].size() < static_cast<std::size_t>(config_.batch_size)) continue;
        for (int u = 0; u < config_.updates_per_episode; ++u) {
          std::vector<QSample> batch;
          batch.reserve(config_.batch_size);
          for (const TransitionRecord* r : buffers_[level].sample(config_.batch_size, rng_)) {
            batch.push_back(to_q_sample(*r, config_.hac.H));
          }
          q_[level]->update(params_.levels[level].policy, batch);
        }
      }
      return;
    }
    for (const auto& r : ep.transitions) rollout_[r.level].push_back(r);
    if (++rollout_episodes_ < config_.ppo_rollout_episodes) return;
    for (int level = 0; level < 2; ++level) ppo_phase(level);
    rollout_episodes_ = 0;
  }

  void ppo_phase(int level) {
    const int H = config_.hac.H;
    std::vector<const TransitionRecord*> on_policy;
    std::vector<nn::Vector> critic_obs;
    std::vector<double> critic_targets;
    LevelParams& lp = params_.levels[level];
    const std::vector<TransitionRecord> rollout = std::exchange(rollout_[level], {});
    for (const auto& r : rollout) {
      if (r.kind == TransitionKind::regular) {
        on_policy.push_back(&r);
      } else {
        const auto tr = training_rewards(r);
        const double reward = 0.5 * (tr[0] + tr[1]);
        const double next_v = r.done ? 0.0 : lp.value.forward(r.next_state)(0, 0);
        critic_obs.push_back(r.state);
        critic_targets.push_back(reward + config_.gamma * next_v);
      }
    }
    if (on_policy.empty()) return;

    std::vector<RolloutStep> steps;
    for (std::size_t t = 0; t < on_policy.size(); ++t) {
      const TransitionRecord& r = *on_policy[t];
      const auto tr = training_rewards(r);
      RolloutStep s{r.state, r.next_state, 0.5 * (tr[0] + tr[1]), r.done, false};
      if (t + 1 < on_policy.size()) {
        const TransitionRecord& n = *on_policy[t + 1];
        s.continues = n.cells == r.next_cells && n.goal == r.goal && n.scene == r.scene;
      }
      steps.push_back(std::move(s));
    }
    std::vector<double> advantages, targets;
    compute_advantages(lp.value, steps, config_.gamma, config_.gae_lambda, advantages, targets);

    std::vector<PpoSample> samples;
    for (std::size_t t = 0; t < on_policy.size(); ++t) {
      const TransitionRecord& r = *on_policy[t];
      PpoSample s;
      s.obs = r.state;
      s.actions = action_indices(r, H);
      if (level == 1) s.masks = action_masks(*r.scene, r.cells, 1, H);
      s.old_log_prob = r.log_prob;
      s.advantage = advantages[t];
      s.value_target = targets[t];
      samples.push_back(std::move(s));
    }
    const std::size_t bs = static_cast<std::size_t>(config_.batch_size);
    for (int epoch = 0; epoch < config_.ppo_epochs; ++epoch) {
      std::vector<std::size_t> order(samples.size());
      for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
      std::shuffle(order.begin(), order.end(), rng_);
      for (std::size_t at = 0; at < order.size(); at += bs) {
        std::vector<PpoSample> batch;
        for (std::size_t k = at; k < std::min(order.size(), at + bs); ++k) batch.push_back(samples[order[k]]);
        std::vector<nn::Vector> cobs;
        std::vector<double> ctar;
        if (!critic_obs.empty()) {
          std::uniform_int_distribution<std::size_t> pick(0, critic_obs.size() - 1);
          for (std::size_t k = 0; k < batch.size(); ++k) {
            const std::size_t j = pick(rng_);
            cobs.push_back(critic_obs[j]);
            ctar.push_back(critic_targets[j]);
          }
        }
        ppo_[level]->update(lp, batch, cobs, ctar);
      }
    }
  }

  const std::vector<ScenePtr>& pool_;
  const TrainConfig& config_;
  const TrainHooks& hooks_;
  HierarchyParams params_;
  std::mt19937_64 rng_;
  std::array<ReplayBuffer, 2> buffers_;
  std::array<std::unique_ptr<QLearner>, 2> q_;
  std::array<std::unique_ptr<PpoLearner>, 2> ppo_;
  std::array<std::vector<TransitionRecord>, 2> rollout_;
  int rollout_episodes_ = 0;
};

}  // namespace

TrainResult train(const std::vector<ScenePtr>& scene_pool, const TrainConfig& config,
                  const CurriculumSchedule& schedule, const TrainHooks& hooks) {
  config.check();
  if (scene_pool.empty()) throw std::invalid_argument("training needs a non-empty scene pool");
  if (schedule.stages.empty()) throw std::invalid_argument("training needs at least one curriculum stage");
  Trainer trainer(scene_pool, config, hooks);
  return trainer.run(schedule);
}

// ---------------------------------------------------------------------------

namespace {

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

FurnitureStats stats_of(const std::vector<double>& v) {
  FurnitureStats s;
  if (v.empty()) return s;
  double sum = 0.0;
  for (double x : v) sum += x;
  s.mean = sum / v.size();
  if (v.size() > 1) {
    double sq = 0.0;
    for (double x : v) sq += (x - s.mean) * (x - s.mean);
    s.standard_error = std::sqrt(sq / (v.size() - 1)) / std::sqrt(static_cast<double>(v.size()));
  }
  return s;
}

struct RoomSamples {
  std::array<std::vector<double>, 2> iou;
  std::vector<double> steps, oracle_steps;
  int successes = 0;
};

}  // namespace

EvalReport evaluate(const Controller& controller, const HacSettings& settings, const std::vector<ScenePtr>& scenes,
                    const EvalOptions& options) {
  if (options.n_starts < 1) throw std::invalid_argument("evaluation needs n_starts >= 1");
  std::mt19937_64 rng(options.seed);
  std::map<RoomType, RoomSamples> rooms;
  const GoalSpec goal{{0, 0}, options.goal_threshold};
  EpisodeOptions run;
  run.max_high_steps = options.max_high_steps;
  run.stop_iou = options.stop_iou;
  for (const ScenePtr& scene : scenes) {
    RoomSamples& room = rooms[scene->room_type];
    const std::vector<ScenePtr> one{scene};
    for (int k = 0; k < options.n_starts; ++k) {
      const StartState start = random_start(one, rng);
      const EpisodeResult ep = run_episode(controller, settings, reset(scene, start.start), goal, run);
      if (options.on_episode) options.on_episode(scene, k, ep);
      const auto iou = reward(ep.final_state);
      room.iou[0].push_back(iou[0]);
      room.iou[1].push_back(iou[1]);
      if (iou[0] > options.success_threshold && iou[1] > options.success_threshold) ++room.successes;
      room.steps.push_back(ep.primitive_steps);
      room.oracle_steps.push_back(oracle::optimal_plan(scene, start.start).length);
    }
  }
  EvalReport report;
  for (RoomType type : kAllRoomTypes) {
    auto it = rooms.find(type);
    if (it == rooms.end()) continue;
    const RoomSamples& s = it->second;
    RoomReport r;
    r.room = type;
    r.episodes = static_cast<int>(s.steps.size());
    r.iou = {stats_of(s.iou[0]), stats_of(s.iou[1])};
    r.success_rate = static_cast<double>(s.successes) / r.episodes;
    r.median_steps = median(s.steps);
    r.median_oracle_steps = median(s.oracle_steps);
    report.rooms.push_back(r);
  }
  return report;
}

std::string format_report_csv(const EvalReport& report) {
  std::ostringstream out;
  out << "room_type,episodes,iou_f1_mean,iou_f1_stderr,iou_f2_mean,iou_f2_stderr,success_rate,median_steps,"
         "median_oracle_steps\n";
  char buf[256];
  for (const RoomReport& r : report.rooms) {
    std::snprintf(buf, sizeof(buf), "%s,%d,%.6f,%.6f,%.6f,%.6f,%.6f,%.1f,%.1f\n",
                  std::string(to_string(r.room)).c_str(), r.episodes, r.iou[0].mean, r.iou[0].standard_error,
                  r.iou[1].mean, r.iou[1].standard_error, r.success_rate, r.median_steps, r.median_oracle_steps);
    out << buf;
  }
  return out.str();
}

std::string format_report_table(const EvalReport& report) {
  std::ostringstream out;
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%-10s %8s  %-17s  %-17s  %8s  %6s  %6s\n", "room", "episodes", "furniture 1",
                "furniture 2", "success", "steps", "oracle");
  out << buf;
  for (const RoomReport& r : report.rooms) {
    std::snprintf(buf, sizeof(buf), "%-10s %8d  %.3f +/- %.3f    %.3f +/- %.3f    %7.1f%%  %6.1f  %6.1f\n",
                  std::string(to_string(r.room)).c_str(), r.episodes, r.iou[0].mean, r.iou[0].standard_error,
                  r.iou[1].mean, r.iou[1].standard_error, 100.0 * r.success_rate, r.median_steps,
                  r.median_oracle_steps);
    out << buf;
  }
  return out.str();
}

// ---------------------------------------------------------------------------

std::string save_checkpoint(const HierarchyParams& params, int stage) {
  nlohmann::json j;
  j["format"] = "furnish-checkpoint";
  j["version"] = kCheckpointVersion;
  j["stage"] = stage;
  j["algorithm"] = std::string(to_string(params.algorithm));
  j["settings"] = {{"H", params.settings.H},
                   {"subgoal_test_rate", params.settings.subgoal_test_rate},
                   {"penalty", params.settings.penalty}};
  j["levels"] = nlohmann::json::array();
  for (const LevelParams& level : params.levels) {
    nlohmann::json lj;
    lj["policy"] = level.policy.to_json();
    if (params.algorithm == Algorithm::ppo) lj["value"] = level.value.to_json();
    j["levels"].push_back(std::move(lj));
  }
  return j.dump() + "\n";
}

HierarchyParams load_checkpoint(const std::string& document) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(document);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error("checkpoint is not valid JSON at byte " + std::to_string(e.byte));
  }
  try {
    if (j.at("format").get<std::string>() != "furnish-checkpoint") throw std::runtime_error("not a checkpoint");
    const int version = j.at("version").get<int>();
    if (version != kCheckpointVersion) {
      throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));
    }
    HierarchyParams p;
    p.algorithm = parse_algorithm(j.at("algorithm").get<std::string>());
    const auto& sj = j.at("settings");
    p.settings.H = sj.at("H").get<int>();
    p.settings.subgoal_test_rate = sj.at("subgoal_test_rate").get<double>();
    p.settings.penalty = sj.at("penalty").get<double>();
    p.settings.check();
    const auto& levels = j.at("levels");
    if (levels.size() != 2) throw std::runtime_error("checkpoint needs two levels");
    for (int level = 0; level < 2; ++level) {
      const auto sizes = head_sizes(level, p.settings.H);
      LevelParams& lp = p.levels[level];
      lp.policy = nn::Mlp::from_json(levels[level].at("policy"));
      if (lp.policy.spec().input_dim != kObservationDim || lp.policy.spec().output_dim != sizes[0] + sizes[1]) {
        throw std::runtime_error("level " + std::to_string(level) + " policy has the wrong shape");
      }
      if (p.algorithm == Algorithm::ppo) {
        lp.value = nn::Mlp::from_json(levels[level].at("value"));
        if (lp.value.spec().input_dim != kObservationDim || lp.value.spec().output_dim != 1) {
          throw std::runtime_error("level " + std::to_string(level) + " value net has the wrong shape");
        }
      }
    }
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("malformed checkpoint: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(std::string("malformed checkpoint: ") + e.what());
  }
}

}  // namespace furnish
