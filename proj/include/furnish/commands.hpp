#pragma once

#include <atomic>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "furnish/scene.hpp"
#include "furnish/env.hpp"

namespace furnish {

namespace fs = std::filesystem;

class CommandError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitReplayMismatch = 3;
inline constexpr int kExitInterrupted = 130;

/// Seed of the index-th scene of a gen-scenes batch.
std::uint64_t scene_seed(std::uint64_t seed, int index);

/// Writes <room>_<index>.json for index 0..count-1; returns the paths.
std::vector<fs::path> gen_scenes(RoomType room, int count, std::uint64_t seed, const fs::path& out_dir);

struct SceneFile {
  fs::path path;
  std::string bytes;
  ScenePtr scene;
};

/// Every *.json in `dir`, in natural name order. Throws CommandError when the
/// directory is missing or holds no scenes, and names the file on load errors.
std::vector<SceneFile> load_scene_dir(const fs::path& dir);

std::string read_file(const fs::path& path);
void write_file(const fs::path& path, std::string_view bytes);

struct TrainCommand {
  fs::path scene_dir;
  std::optional<fs::path> config_path;
  fs::path out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> parallel;
};

/// Trains, writing metrics.csv, one checkpoint_stage_<c>.json per completed
/// stage and manifest.json into out_dir. Returns an exit status.
int run_train(const TrainCommand& cmd, std::ostream& log, const std::atomic<bool>* interrupted = nullptr);

struct EvalCommand {
  fs::path scene_dir;
  std::optional<fs::path> checkpoint;
  bool oracle = false;
  int n_starts = 2000;
  std::uint64_t seed = 0;
  std::optional<fs::path> report_path;
  std::optional<fs::path> dump_dir;  // first episode of every scene as a trajectory
};

int run_eval(const EvalCommand& cmd, std::ostream& out, std::ostream& log);

struct RenderCommand {
  fs::path input;
  fs::path out_svg;
  bool grid = false;
};

int run_render(const RenderCommand& cmd, std::ostream& log);

int run_replay(const fs::path& trajectory, std::ostream& out);

}  // namespace furnish
