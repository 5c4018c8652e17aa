#include <doctest.h>

#include <cstdlib>
#include <random>

#include "furnish/oracle.hpp"
#include "furnish/train.hpp"
#include "support.hpp"

using namespace furnish;
using furnish::testing::boxes_at;
using furnish::testing::share;
using furnish::testing::simple_scene;

TEST_CASE("oracle: start at the goal gives an empty plan") {
  const ScenePtr scene = share(simple_scene());
  const auto plan = oracle::optimal_plan(scene, {scene->goal[0], scene->goal[1]});
  CHECK(plan.length == 0);
  CHECK(plan.actions.empty());
  CHECK(plan.per_step_iou.empty());
}

TEST_CASE("oracle: plan length is the larger cell distance") {
  const ScenePtr scene = share(simple_scene());
  const auto start = boxes_at(*scene, {-5, 3});
  const auto plan = oracle::optimal_plan(scene, start);
  CHECK(plan.length == 5);
  REQUIRE(plan.per_step_iou.size() == 5);
  CHECK(plan.per_step_iou.back() == std::array<double, 2>{1.0, 1.0});
  CHECK(plan.actions[0].moves == std::array<AgentAction, 2>{AgentAction::positive, AgentAction::negative});
  CHECK(plan.actions[4].moves == std::array<AgentAction, 2>{AgentAction::positive, AgentAction::hold});
  CHECK(oracle::bfs_plan(scene, start).length == 5);
}

TEST_CASE("oracle: best IoU within a step budget") {
  const ScenePtr scene = share(simple_scene());
  const auto start = boxes_at(*scene, {-5, 3});
  const auto best = oracle::max_achievable_iou(scene, start, 2);
  CHECK(best[0] == doctest::Approx(1.7 / 2.3));
  CHECK(best[1] == doctest::Approx(1.9 / 2.1));
  CHECK(oracle::max_achievable_iou(scene, start, 5) == std::array<double, 2>{1.0, 1.0});
  CHECK_THROWS(oracle::max_achievable_iou(scene, start, -1));
}

TEST_CASE("oracle: off-grid start is rejected") {
  const ScenePtr scene = share(simple_scene());
  auto start = boxes_at(*scene, {-5, 3});
  start[0] = AxisBox(start[0].center_x(), start[0].center_y() + 0.05, start[0].size_w(), start[0].size_h());
  CHECK_THROWS_AS(oracle::optimal_plan(scene, start), EnvError);
}

TEST_CASE("oracle: optimality certificate on generated scenes") {
  std::mt19937_64 rng(77);
  std::vector<ScenePtr> pool;
  for (int k = 0; k < 100; ++k) pool.push_back(share(generate_scene(kAllRoomTypes[k % 4], 500 + k)));
  for (int k = 0; k < 100; ++k) {
    const StartState s = random_start({pool[k]}, rng);
    const auto plan = oracle::optimal_plan(s.scene, s.start);
    const EnvState initial = reset(s.scene, s.start);
    const int distance = std::max(std::abs(initial.cell(0)), std::abs(initial.cell(1)));
    CHECK(plan.length == distance);
    // No plan one step shorter reaches IoU 1 on both pieces.
    if (plan.length > 0) {
      const auto shorter = oracle::max_achievable_iou(s.scene, s.start, plan.length - 1);
      CHECK((shorter[0] < 1.0 || shorter[1] < 1.0));
    }
    // Replaying the plan through the simulator reproduces every reward.
    EnvState state = initial;
    for (int t = 0; t < plan.length; ++t) {
      StepResult r = step(state, plan.actions[t]);
      CHECK(r.rewards == plan.per_step_iou[t]);
      state = r.next_state;
    }
    CHECK(state.cells() == std::array<int, 2>{0, 0});
    if (k % 10 == 0) CHECK(oracle::bfs_plan(s.scene, s.start).length == plan.length);
  }
}

TEST_CASE("oracle: overlap blocking falls back to search") {
  const ScenePtr scene = share(simple_scene());
  const auto start = boxes_at(*scene, {-5, 3});
  const EnvRules rules{true};
  const auto plan = oracle::optimal_plan(scene, start, rules);
  EnvState state = reset(scene, start, rules);
  for (const auto& a : plan.actions) state = step(state, a).next_state;
  CHECK(state.cells() == std::array<int, 2>{0, 0});
  CHECK(plan.length >= 5);
}

TEST_CASE("oracle controller solves episodes in the optimal number of steps") {
  std::mt19937_64 rng(5);
  for (int k = 0; k < 40; ++k) {
    const ScenePtr scene = share(generate_scene(kAllRoomTypes[k % 4], 900 + k));
    const StartState s = random_start({scene}, rng);
    HacSettings settings;
    oracle::OracleController controller(settings.H);
    EpisodeOptions opt;
    opt.max_high_steps = 100;
    const GoalSpec goal{{0, 0}, 0.999};
    const auto r = run_episode(controller, settings, reset(scene, s.start), goal, opt);
    CHECK(r.success);
    CHECK(r.primitive_steps == oracle::optimal_plan(scene, s.start).length);
    CHECK(r.final_state.cells() == std::array<int, 2>{0, 0});
  }
}
