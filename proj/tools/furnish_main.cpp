#include <atomic>
#include <csignal>
#include <iostream>

#include <CLI11.hpp>

#include "furnish/commands.hpp"

namespace {

std::atomic<bool> g_interrupted{false};

void on_sigint(int) { g_interrupted.store(true); }

}  // namespace

int main(int argc, char** argv) {
  using namespace furnish;
  CLI::App app{"furnish: two-piece furniture layout simulator and hierarchical RL trainer"};
  app.require_subcommand(1);

  std::string room;
  int count = 0;
  std::uint64_t seed = 0;
  fs::path out;
  auto* gen = app.add_subcommand("gen-scenes", "Generate validated scene files <room>_<index>.json");
  gen->add_option("room_type", room, "tatami, bedroom, bathroom or kitchen")->required();
  gen->add_option("count", count, "number of scenes")->required()->check(CLI::NonNegativeNumber);
  gen->add_option("--seed", seed, "base seed");
  gen->add_option("--out", out, "output directory")->required();

  TrainCommand train_cmd;
  std::uint64_t train_seed = 0;
  int train_parallel = 1;
  auto* train = app.add_subcommand("train", "Curriculum training on a directory of scenes");
  train->add_option("scene_dir", train_cmd.scene_dir, "directory of scene files")->required();
  train->add_option("--config", train_cmd.config_path, "training config JSON");
  train->add_option("--out", train_cmd.out_dir, "output directory")->required();
  auto* train_seed_opt = train->add_option("--seed", train_seed, "overrides the config seed");
  auto* parallel_opt =
      train->add_option("--parallel", train_parallel, "episodes collected concurrently (not reproducible)");

  EvalCommand eval_cmd;
  auto* eval = app.add_subcommand("eval", "Greedy evaluation from random starts");
  eval->add_option("scene_dir", eval_cmd.scene_dir, "directory of scene files")->required();
  auto* ckpt = eval->add_option("--checkpoint", eval_cmd.checkpoint, "checkpoint JSON");
  auto* oracle = eval->add_flag("--oracle", eval_cmd.oracle, "evaluate the optimal planner instead");
  ckpt->excludes(oracle);
  eval->add_option("--n-starts", eval_cmd.n_starts, "random starts per scene")->check(CLI::PositiveNumber);
  eval->add_option("--seed", eval_cmd.seed, "start sampling seed");
  eval->add_option("--out", eval_cmd.report_path, "CSV report path");
  eval->add_option("--dump", eval_cmd.dump_dir, "write the first episode of each scene as a trajectory");

  RenderCommand render_cmd;
  auto* render = app.add_subcommand("render", "Draw a scene or trajectory as SVG");
  render->add_option("input", render_cmd.input, "scene JSON or trajectory NDJSON")->required();
  render->add_option("--out", render_cmd.out_svg, "SVG path")->required();
  render->add_flag("--grid", render_cmd.grid, "draw the step-size lattice");

  fs::path replay_path;
  auto* replay = app.add_subcommand("replay", "Re-simulate a trajectory and check it step by step");
  replay->add_option("trajectory", replay_path, "trajectory NDJSON")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      const auto paths = gen_scenes(parse_room_type(room), count, seed, out);
      std::cerr << "wrote " << paths.size() << " scenes to " << out.string() << "\n";
      return kExitOk;
    }
    if (train->parsed()) {
      if (train_seed_opt->count() > 0) train_cmd.seed = train_seed;
      if (parallel_opt->count() > 0) train_cmd.parallel = train_parallel;
      std::signal(SIGINT, on_sigint);
      return run_train(train_cmd, std::cerr, &g_interrupted);
    }
    if (eval->parsed()) return run_eval(eval_cmd, std::cout, std::cerr);
    if (render->parsed()) return run_render(render_cmd, std::cerr);
    if (replay->parsed()) return run_replay(replay_path, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
