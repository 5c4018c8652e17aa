// Acceptance checks: one PASS/FAIL line per criterion on stdout, details on
// stderr. Pass criterion numbers as arguments to run a subset.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "furnish/commands.hpp"
#include "furnish/env.hpp"
#include "furnish/geometry.hpp"
#include "furnish/hac.hpp"
#include "furnish/learner.hpp"
#include "furnish/manifest.hpp"
#include "furnish/oracle.hpp"
#include "furnish/train.hpp"
#include "gradcheck.hpp"
#include "support.hpp"

using namespace furnish;
using furnish::testing::boxes_at;
using furnish::testing::share;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Records the first failing check.
class Checker {
 public:
  void expect(bool ok, const std::string& what) {
    ++checks_;
    if (!ok && pass_) {
      pass_ = false;
      first_failure_ = what;
    }
    failures_ += ok ? 0 : 1;
  }
  Outcome outcome(const std::string& summary) const {
    if (pass_) return {true, summary};
    return {false, summary + "; " + std::to_string(failures_) + " of " + std::to_string(checks_) +
                       " checks failed, first: " + first_failure_};
  }

 private:
  bool pass_ = true;
  int checks_ = 0;
  int failures_ = 0;
  std::string first_failure_;
};

std::string fmt(const char* format, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), format, a, b, c);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------------------
// 1. Closed-form IoU against the 0.001 m raster.

Outcome geometry_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> pos(0, 4), size(1, 3);
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const AxisBox a(pos(rng), pos(rng), size(rng), size(rng));
    const AxisBox b(pos(rng), pos(rng), size(rng), size(rng));
    worst = std::max(worst, std::abs(iou(a, b) - furnish::testing::raster_iou(a, b)));
  }
  const double elapsed = seconds_since(t0);
  Checker c;
  c.expect(worst <= 1e-3, fmt("max error %.6f", worst));
  c.expect(elapsed < 5.0, fmt("runtime %.2f s", elapsed));
  return c.outcome(fmt("1000 pairs, max |error| %.6f, %.3f s", worst, elapsed));
}

// ---------------------------------------------------------------------------
// 2. Simulator properties on random scenes and action sequences.

Outcome simulator_contract() {
  Checker c;
  std::vector<ScenePtr> scenes;
  for (int k = 0; k < 200; ++k) scenes.push_back(share(generate_scene(kAllRoomTypes[k % 4], 7000 + k)));
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> pick(0, 2);
  long steps = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    const StartState start = random_start(scenes, rng);
    const ScenePtr& scene = start.scene;
    const EnvRules rules{trial % 5 == 4};
    EnvState s = reset(scene, start.start, rules);
    const int length = 5 + static_cast<int>(rng() % 16);
    for (int t = 0; t < length; ++t, ++steps) {
      const JointAction a{{kAgentActions[pick(rng)], kAgentActions[pick(rng)]}};
      const StepResult r = step(s, a);
      const StepResult again = step(s, a);
      c.expect(r.next_state == again.next_state && r.rewards == again.rewards, "determinism");
      c.expect(r.next_state.step_count() == s.step_count() + 1, "step count");
      for (int i = 0; i < 2; ++i) {
        const AxisBox box = r.next_state.furniture_pos(i);
        c.expect(contains(scene->boundary, box), "containment");
        const CellLookup lookup = cell_of(*scene, i, box);
        c.expect(lookup.ok() && lookup.cell == r.next_state.cell(i), "grid closure");
        // Drop rule: a move is dropped exactly when its target leaves the room.
        const int target = s.cell(i) + static_cast<int>(a.moves[i]);
        const bool leaves = !contains(scene->boundary, place_on_lattice(*scene, i, target));
        if (!rules.block_overlap) c.expect(r.dropped[i] == leaves, "drop iff the target leaves the room");
        if (r.dropped[i]) c.expect(r.next_state.cell(i) == s.cell(i), "dropped piece stays");
        if (!r.dropped[i]) c.expect(r.next_state.cell(i) == target, "move applied");
        c.expect(r.rewards[i] == iou(box, scene->goal[i]), "reward is IoU with the goal");
      }
      s = r.next_state;
    }
  }

  // A piece flush against a wall pushed outward stays exactly where it is.
  const ScenePtr simple = share(furnish::testing::simple_scene());
  const EnvState flush = reset(simple, boxes_at(*simple, {lattice_range(*simple, 0).hi, 0}));
  c.expect(flush.furniture_pos(0).max_y() == simple->boundary.max_y(), "flush to the top wall");
  const StepResult pushed = step(flush, JointAction{{AgentAction::positive, AgentAction::hold}});
  c.expect(pushed.next_state.cells() == flush.cells(), "flush push keeps the cells");
  c.expect(pushed.next_state.furniture_pos(0) == flush.furniture_pos(0), "flush push keeps the box");
  c.expect(pushed.dropped[0], "flush push is dropped");
  c.expect(pushed.rewards == reward(flush), "flush push keeps the reward");
  return c.outcome("10000 trials, " + std::to_string(steps) + " steps, flush-wall case exact");
}

// ---------------------------------------------------------------------------
// 3. Curriculum thresholds.

Outcome curriculum_exactness() {
  Checker c;
  double worst = 0.0;
  for (int k = 0; k <= 10; ++k) {
    const double expected = 0.45 + 0.05 * k;
    const double expected_literal[] = {0.45, 0.50, 0.55, 0.60, 0.65, 0.70, 0.75, 0.80, 0.85, 0.90, 0.95};
    worst = std::max(worst, std::abs(curriculum_threshold(k) - expected));
    c.expect(std::abs(curriculum_threshold(k) - expected_literal[k]) <= 1e-15, "stage " + std::to_string(k));
  }
  c.expect(worst <= 1e-15, "formula");
  return c.outcome(fmt("11 stages, max deviation %.1e", worst));
}

// ---------------------------------------------------------------------------
// 4. Hindsight relabels and subgoal-test penalties on scripted episodes.

// Random subgoals up to 2H away; piece 1 never reaches its final goal cell, so
// no segment is cut short by success. Moves like the oracle.
class ScriptedProposer final : public Controller {
 public:
  ScriptedProposer(int H, int side, std::uint64_t seed) : H_(H), side_(side), low_(H), rng_(seed) {}
  Decision<Subgoal> propose(const EnvState& state, const GoalSpec&, const Exploration&) const override {
    std::uniform_int_distribution<int> offset(-2 * H_, 2 * H_);
    Subgoal g;
    for (int i = 0; i < 2; ++i) g.cells[i] = state.range(i).clamp(state.cell(i) + offset(rng_));
    if (side_ * g.cells[0] < 1) g.cells[0] = side_;
    return {g, 0.0};
  }
  Decision<JointAction> act(const EnvState& state, const GoalSpec& subgoal, const Exploration& e) const override {
    return low_.act(state, subgoal, e);
  }

 private:
  int H_;
  int side_;
  oracle::OracleController low_;
  mutable std::mt19937_64 rng_;
};

// Primitive steps the oracle needs to move from `from` to `to`.
int oracle_distance(const SceneInstance& scene, const std::array<int, 2>& from, const std::array<int, 2>& to) {
  SceneInstance shifted = scene;
  for (int i = 0; i < 2; ++i) shifted.goal[i] = place_on_lattice(scene, i, to[i]);
  const ScenePtr target = share(shifted);
  return oracle::optimal_plan(target, boxes_at(scene, from)).length;
}

Outcome hindsight_correctness() {
  Checker c;
  std::mt19937_64 rng(4);
  int penalties = 0, segments = 0;
  for (int e = 0; e < 100; ++e) {
    const ScenePtr scene = share(generate_scene(kAllRoomTypes[e % 4], 4000 + e));
    const CellRange r0 = lattice_range(*scene, 0), r1 = lattice_range(*scene, 1);
    const int side = r0.hi >= 1 && (r0.lo > -1 || rng() % 2) ? 1 : -1;
    const int c0 = side > 0 ? std::uniform_int_distribution<int>(1, r0.hi)(rng)
                            : std::uniform_int_distribution<int>(r0.lo, -1)(rng);
    const int c1 = std::uniform_int_distribution<int>(r1.lo, r1.hi)(rng);
    HacSettings settings;
    settings.H = 3 + e % 8;
    settings.subgoal_test_rate = 1.0;
    const ScriptedProposer proposer(settings.H, side, 100 + e);
    EpisodeOptions opt;
    opt.max_high_steps = 6;
    opt.explore = true;
    opt.rng = &rng;
    // A strict threshold so that reaching a subgoal means reaching its exact cell.
    const GoalSpec goal{{0, 0}, 0.999};
    const EpisodeResult ep = run_episode(proposer, settings, reset(scene, boxes_at(*scene, {c0, c1})), goal, opt);
    c.expect(!ep.success, "scripted episodes never reach the final goal");

    // Final hindsight-goal transition of each level.
    for (int level = 0; level < 2; ++level) {
      const TransitionRecord* last = nullptr;
      for (const auto& t : ep.transitions)
        if (t.level == level && t.kind == TransitionKind::hindsight_goal) last = &t;
      c.expect(last != nullptr, "hindsight goal transitions exist");
      if (!last) continue;
      c.expect(last->rewards == std::array<double, 2>{1.0, 1.0}, "final hindsight reward (1, 1)");
      c.expect(last->done, "final hindsight transition done");
      c.expect(last->goal.cells == ep.final_state.cells(), "hindsight goal is the achieved state");
    }

    // Walk the level-1 segments in order.
    int primitive = 0;
    const auto& ts = ep.transitions;
    for (std::size_t k = 0; k < ts.size(); ++k) {
      if (ts[k].level != 1 || ts[k].kind != TransitionKind::regular) continue;
      ++segments;
      const TransitionRecord& seg = ts[k];
      primitive += seg.primitive_steps;
      const std::array<int, 2> achieved = ep.trajectory.at(primitive).cells();
      c.expect(k + 1 < ts.size() && ts[k + 1].kind == TransitionKind::hindsight_action, "relabel follows segment");
      if (k + 1 >= ts.size()) continue;
      const TransitionRecord& relabel = ts[k + 1];
      c.expect(std::get<Subgoal>(relabel.action).cells == achieved, "hindsight action equals achieved state");
      c.expect(relabel.next_cells == achieved, "hindsight action next state");

      const auto proposed = std::get<Subgoal>(seg.action).cells;
      const int distance = oracle_distance(*scene, seg.cells, proposed);
      const bool penalized = k + 2 < ts.size() && ts[k + 2].kind == TransitionKind::subgoal_test;
      c.expect(penalized == (distance > settings.H),
               "penalty fires iff distance " + std::to_string(distance) + " > H " + std::to_string(settings.H));
      if (penalized) {
        ++penalties;
        c.expect(ts[k + 2].rewards == std::array<double, 2>{settings.penalty, settings.penalty}, "penalty value");
        c.expect(ts[k + 2].done, "penalty is terminal");
      }
    }
    c.expect(primitive == ep.primitive_steps, "segment steps add up");
  }
  std::ostringstream s;
  s << "100 episodes, " << segments << " subgoals, " << penalties << " penalties";
  return c.outcome(s.str());
}

// ---------------------------------------------------------------------------
// 5. Gradient checks and the toy MDP.

nn::Vector one_hot(int n, int k) {
  nn::Vector v = nn::Vector::Zero(n);
  v[k] = 1.0;
  return v;
}

Outcome learner_numerics() {
  Checker c;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst_q = 0.0, worst_ppo = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const HeadLayout heads{3, 4};
    nn::Mlp net({6, {8, 6}, 7}, rng);
    std::vector<QSample> batch(8);
    std::vector<std::array<double, 2>> targets(batch.size());
    for (std::size_t b = 0; b < batch.size(); ++b) {
      batch[b].obs = nn::Vector::NullaryExpr(6, [&] { return u(rng); });
      batch[b].actions = {static_cast<int>(rng() % 3), static_cast<int>(rng() % 4)};
      targets[b] = {u(rng), u(rng)};
    }
    nn::Gradients g;
    q_loss(net, heads, batch, targets, &g);
    worst_q = std::max(worst_q, furnish::testing::gradient_relative_error(
                                    net, [&](const nn::Mlp& n) { return q_loss(n, heads, batch, targets, nullptr); }, g));

    const double clip = 0.2;
    std::vector<PpoSample> pb;
    while (pb.size() < 8) {
      PpoSample s;
      s.obs = nn::Vector::NullaryExpr(6, [&] { return u(rng); });
      s.actions = {static_cast<int>(rng() % 3), static_cast<int>(rng() % 4)};
      const double lp = log_prob(net, heads, s.obs, s.actions);
      s.old_log_prob = lp + 0.5 * u(rng);
      s.advantage = u(rng);
      const double ratio = std::exp(lp - s.old_log_prob);
      if (std::abs(ratio - (1 + clip)) < 0.02 || std::abs(ratio - (1 - clip)) < 0.02) continue;
      pb.push_back(s);
    }
    ppo_policy_loss(net, heads, pb, clip, &g);
    worst_ppo = std::max(worst_ppo, furnish::testing::gradient_relative_error(
                                        net, [&](const nn::Mlp& n) { return ppo_policy_loss(n, heads, pb, clip, nullptr); },
                                        g));
  }
  c.expect(worst_q <= 1e-4, fmt("Q gradient error %.2e", worst_q));
  c.expect(worst_ppo <= 1e-4, fmt("PPO gradient error %.2e", worst_ppo));

  // Four-state chain, two actions each (8 transitions): "left" from s0 ends
  // with reward 2, "right" from s3 ends with reward 10, other moves shift by
  // one state with reward 0.
  const double gamma = 0.5;
  auto next_state = [](int s, int a) { return a == 0 ? s - 1 : s + 1; };
  auto terminal = [](int s, int a) { return (s == 0 && a == 0) || (s == 3 && a == 1); };
  auto reward_of = [](int s, int a) { return s == 0 && a == 0 ? 2.0 : (s == 3 && a == 1 ? 10.0 : 0.0); };
  double v[4] = {0, 0, 0, 0};
  int vi_policy[4] = {0, 0, 0, 0};
  for (int sweep = 0; sweep < 200; ++sweep) {
    for (int s = 0; s < 4; ++s) {
      double best = -1e9;
      for (int a = 0; a < 2; ++a) {
        const double q = reward_of(s, a) + (terminal(s, a) ? 0.0 : gamma * v[next_state(s, a)]);
        if (q > best) {
          best = q;
          vi_policy[s] = a;
        }
      }
      v[s] = best;
    }
  }
  std::vector<QSample> mdp;
  for (int s = 0; s < 4; ++s) {
    for (int a = 0; a < 2; ++a) {
      QSample q;
      q.obs = one_hot(4, s);
      q.actions = {a, 0};
      q.rewards = {reward_of(s, a), 0.0};
      q.done = terminal(s, a);
      q.next_obs = q.done ? q.obs : one_hot(4, next_state(s, a));
      mdp.push_back(q);
    }
  }
  std::mt19937_64 init(55);
  nn::Mlp qnet({4, {16}, 3}, init);
  QConfig cfg;
  cfg.gamma = gamma;
  cfg.learning_rate = 0.01;
  cfg.optimizer = nn::OptimizerKind::adam;
  cfg.target_update_interval = 25;
  QLearner learner(qnet, {2, 1}, cfg);
  for (int k = 0; k < 500; ++k) update_q(learner, qnet, mdp);
  int agree = 0;
  for (int s = 0; s < 4; ++s) agree += greedy_actions(qnet, {2, 1}, one_hot(4, s))[0] == vi_policy[s];
  c.expect(agree == 4, "greedy policy matches value iteration in " + std::to_string(agree) + "/4 states");
  return c.outcome(fmt("20 nets: Q grad err %.1e, PPO grad err %.1e; toy MDP policy %g/4 after 500 updates", worst_q,
                       worst_ppo, agree));
}

// ---------------------------------------------------------------------------
// 6. Oracle certificate.

Outcome oracle_certificate() {
  Checker c;
  std::mt19937_64 rng(6);
  int total_length = 0;
  for (int k = 0; k < 100; ++k) {
    const ScenePtr scene = share(generate_scene(kAllRoomTypes[k % 4], 6000 + k));
    const StartState s = random_start({scene}, rng);
    const auto greedy = oracle::optimal_plan(scene, s.start);
    const auto bfs = oracle::bfs_plan(scene, s.start);
    c.expect(greedy.length == bfs.length, "greedy length equals BFS length");
    total_length += greedy.length;
    EnvState state = reset(scene, s.start);
    std::array<double, 2> last = reward(state);
    for (std::size_t t = 0; t < greedy.actions.size(); ++t) {
      const StepResult r = step(state, greedy.actions[t]);
      c.expect(r.rewards == greedy.per_step_iou[t], "replay matches the recorded IoU");
      last = r.rewards;
      state = r.next_state;
    }
    c.expect(last == std::array<double, 2>{1.0, 1.0}, "plan ends at IoU (1, 1)");
  }
  return c.outcome("100 scenes, greedy == BFS, mean plan length " + fmt("%.1f", total_length / 100.0));
}

// ---------------------------------------------------------------------------
// 7. End-to-end training per room type.

Outcome end_to_end_training() {
  Checker c;
  const auto t0 = std::chrono::steady_clock::now();
  std::ostringstream summary;
  for (RoomType room : kAllRoomTypes) {
    const auto room_t0 = std::chrono::steady_clock::now();
    std::vector<ScenePtr> train_pool, held_out;
    for (int i = 0; i < 200; ++i) train_pool.push_back(share(generate_scene(room, 1000 + i)));
    for (int i = 0; i < 200; ++i) held_out.push_back(share(generate_scene(room, 900000 + i)));
    TrainConfig cfg;
    cfg.episodes_per_stage = 1000;
    cfg.optimizer = nn::OptimizerKind::adam;
    const TrainResult result = train(train_pool, cfg, CurriculumSchedule::standard());
    c.expect(result.complete, "training completed all stages");
    const NetworkController policy(result.params);
    EvalOptions eval;
    eval.n_starts = 1;  // one held-out start per held-out scene: 200 per room
    const EvalReport report = evaluate(policy, result.params.settings, held_out, eval);
    const RoomReport& r = report.rooms.at(0);
    const std::string name(to_string(room));
    c.expect(r.iou[0].mean >= 0.8, name + " furniture 1 IoU " + fmt("%.3f", r.iou[0].mean));
    c.expect(r.iou[1].mean >= 0.8, name + " furniture 2 IoU " + fmt("%.3f", r.iou[1].mean));
    c.expect(r.success_rate >= 0.85, name + " success " + fmt("%.3f", r.success_rate));
    c.expect(r.median_steps <= 1.5 * r.median_oracle_steps,
             name + " median steps " + fmt("%.1f vs oracle %.1f", r.median_steps, r.median_oracle_steps));
    std::fprintf(stderr, "  %-8s IoU %.3f +/- %.3f, %.3f +/- %.3f; success %.1f%%; median steps %.1f (oracle %.1f); %.0f s\n",
                 name.c_str(), r.iou[0].mean, r.iou[0].standard_error, r.iou[1].mean, r.iou[1].standard_error,
                 100.0 * r.success_rate, r.median_steps, r.median_oracle_steps, seconds_since(room_t0));
    summary << name << " " << fmt("%.2f/%.2f", r.iou[0].mean, r.iou[1].mean) << " "
            << fmt("%.0f%%", 100.0 * r.success_rate) << " " << fmt("%.0f/%.0f", r.median_steps, r.median_oracle_steps)
            << "; ";
  }
  summary << fmt("%.0f s total", seconds_since(t0));
  return c.outcome(summary.str());
}

// ---------------------------------------------------------------------------
// 8. Determinism of the train command.

Outcome determinism() {
  Checker c;
  const fs::path root = fs::temp_directory_path() / "furnish_acceptance_determinism";
  fs::remove_all(root);
  for (RoomType room : kAllRoomTypes) gen_scenes(room, 3, 8, root / "scenes");
  write_file(root / "config.json",
             R"({"episodes_per_stage": 40, "hidden": [32, 32], "batch_size": 32, "seed": 123,
                 "optimizer": "adam", "stages": [0, 1, 2], "parallel": 1})");
  std::ostringstream log;
  std::string first, second;
  for (const char* run : {"run_a", "run_b"}) {
    TrainCommand cmd{root / "scenes", root / "config.json", root / run, std::nullopt, std::nullopt};
    c.expect(run_train(cmd, log) == kExitOk, std::string(run) + " exit status");
  }
  first = read_file(root / "run_a" / "metrics.csv");
  second = read_file(root / "run_b" / "metrics.csv");
  c.expect(first == second, "metrics CSVs differ");
  c.expect(first.size() > 100, "metrics CSV has rows");
  const std::string digest = sha256_hex(first);
  fs::remove_all(root);
  return c.outcome("two seeded runs, 120 episodes, identical metrics.csv (sha256 " + digest.substr(0, 16) + ")");
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"geometry oracle equivalence", geometry_oracle},
      {"simulator contract suite", simulator_contract},
      {"curriculum exactness", curriculum_exactness},
      {"hindsight correctness", hindsight_correctness},
      {"learner numerics", learner_numerics},
      {"oracle certificate", oracle_certificate},
      {"end-to-end training at desk scale", end_to_end_training},
      {"determinism", determinism},
  };
  std::set<int> selected;
  for (int k = 1; k < argc; ++k) selected.insert(std::atoi(argv[k]));
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int number = static_cast<int>(k) + 1;
    if (!selected.empty() && !selected.count(number)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::printf("criterion %d (%s): %s - %s [%.1f s]\n", number, criteria[k].first.c_str(), o.pass ? "PASS" : "FAIL",
                o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
