#include "furnish/commands.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "furnish/config.hpp"
#include "furnish/manifest.hpp"
#include "furnish/oracle.hpp"
#include "furnish/render.hpp"
#include "furnish/scene_json.hpp"
#include "furnish/trajectory.hpp"
#include "furnish/train.hpp"

namespace furnish {

std::uint64_t scene_seed(std::uint64_t seed, int index) {
  return seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(index);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CommandError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CommandError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw CommandError("write failed for " + path.string());
}

namespace {

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw CommandError("cannot create directory " + dir.string());
}

// Orders "kitchen_2" before "kitchen_10".
bool natural_less(const std::string& a, const std::string& b) {
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (std::isdigit(static_cast<unsigned char>(a[i])) && std::isdigit(static_cast<unsigned char>(b[j]))) {
      std::size_t ie = i, je = j;
      while (ie < a.size() && std::isdigit(static_cast<unsigned char>(a[ie]))) ++ie;
      while (je < b.size() && std::isdigit(static_cast<unsigned char>(b[je]))) ++je;
      std::string_view na(a.data() + i, ie - i), nb(b.data() + j, je - j);
      while (na.size() > 1 && na[0] == '0') na.remove_prefix(1);
      while (nb.size() > 1 && nb[0] == '0') nb.remove_prefix(1);
      if (na.size() != nb.size()) return na.size() < nb.size();
      if (na != nb) return na < nb;
      i = ie;
      j = je;
    } else {
      if (a[i] != b[j]) return a[i] < b[j];
      ++i;
      ++j;
    }
  }
  return a.size() - i < b.size() - j;
}

std::vector<ScenePtr> scenes_of(const std::vector<SceneFile>& files) {
  std::vector<ScenePtr> out;
  for (const auto& f : files) out.push_back(f.scene);
  return out;
}

}  // namespace

std::vector<fs::path> gen_scenes(RoomType room, int count, std::uint64_t seed, const fs::path& out_dir) {
  if (count < 0) throw CommandError("count must be non-negative");
  ensure_dir(out_dir);
  std::vector<fs::path> paths;
  for (int k = 0; k < count; ++k) {
    const SceneInstance scene = generate_scene(room, scene_seed(seed, k));
    const fs::path path = out_dir / (std::string(to_string(room)) + "_" + std::to_string(k) + ".json");
    write_file(path, save_scene(scene));
    paths.push_back(path);
  }
  return paths;
}

std::vector<SceneFile> load_scene_dir(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw CommandError("scene directory " + dir.string() + " does not exist");
  std::vector<fs::path> paths;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") paths.push_back(entry.path());
  }
  if (paths.empty()) throw CommandError("no scene files (*.json) in " + dir.string());
  std::sort(paths.begin(), paths.end(),
            [](const fs::path& a, const fs::path& b) { return natural_less(a.filename().string(), b.filename().string()); });
  std::vector<SceneFile> out;
  for (const auto& p : paths) {
    SceneFile f{p, read_file(p), nullptr};
    try {
      f.scene = std::make_shared<const SceneInstance>(load_scene(f.bytes));
    } catch (const std::exception& e) {
      throw CommandError(p.string() + ": " + e.what());
    }
    out.push_back(std::move(f));
  }
  return out;
}

// ---------------------------------------------------------------------------

int run_train(const TrainCommand& cmd, std::ostream& log, const std::atomic<bool>* interrupted) {
  LoadedConfig config;
  if (cmd.config_path) {
    config = parse_config_text(read_file(*cmd.config_path));
  } else {
    config = parse_config(nlohmann::json::object());
  }
  for (const auto& notice : config.notices) log << "notice: " << notice << "\n";
  if (cmd.seed) config.train.seed = *cmd.seed;
  if (cmd.parallel) {
    if (*cmd.parallel < 1) throw ConfigError("--parallel must be at least 1");
    config.train.parallel = *cmd.parallel;
  }
  config.train.check();
  if (config.train.parallel > 1) {
    log << "notice: collecting " << config.train.parallel
        << " episodes concurrently; metrics are not reproducible across runs in this mode\n";
  }

  const auto files = load_scene_dir(cmd.scene_dir);
  ensure_dir(cmd.out_dir);

  RunManifest manifest;
  manifest.command = "train";
  manifest.seed = config.train.seed;
  manifest.config = config_to_json(config.train, config.schedule);
  manifest.started_at = utc_timestamp();
  for (const auto& f : files) manifest.scenes.push_back({f.path.string(), sha256_hex(f.bytes)});
  const fs::path manifest_path = cmd.out_dir / "manifest.json";
  const fs::path metrics_path = cmd.out_dir / "metrics.csv";
  auto write_manifest = [&] { write_file(manifest_path, manifest.to_json().dump(2) + "\n"); };
  manifest.note = "running";
  write_manifest();

  std::ofstream metrics(metrics_path, std::ios::binary | std::ios::trunc);
  if (!metrics) throw CommandError("cannot write " + metrics_path.string());
  metrics << kMetricsHeader << "\n";

  std::vector<fs::path> checkpoints;
  TrainHooks hooks;
  hooks.on_episode = [&](const EpisodeMetric& m) { metrics << format_metric_row(m) << "\n"; };
  hooks.on_stage_complete = [&](int stage, const HierarchyParams& params) {
    metrics.flush();
    const fs::path path = cmd.out_dir / ("checkpoint_stage_" + std::to_string(stage) + ".json");
    write_file(path, save_checkpoint(params, stage));
    checkpoints.push_back(path);
    manifest.completed_stages.push_back(stage);
    log << "stage " << stage << " complete (threshold " << curriculum_threshold(stage) << ") -> "
        << path.filename().string() << "\n";
  };
  if (interrupted) hooks.should_stop = [interrupted] { return interrupted->load(); };

  auto finish = [&](bool complete, const std::string& note) {
    metrics.flush();
    manifest.artifacts.clear();
    metrics.close();
    manifest.artifacts.push_back({metrics_path.string(), sha256_hex(read_file(metrics_path))});
    for (const auto& p : checkpoints) manifest.artifacts.push_back({p.string(), sha256_hex(read_file(p))});
    manifest.finished_at = utc_timestamp();
    manifest.complete = complete;
    manifest.note = note;
    write_manifest();
  };

  TrainResult result;
  try {
    result = train(scenes_of(files), config.train, config.schedule, hooks);
  } catch (const std::exception& e) {
    finish(false, std::string("failed: ") + e.what());
    throw;
  }
  if (!result.complete) {
    finish(false, "interrupted; metrics cover the episodes finished before the stop");
    log << "interrupted: partial metrics in " << metrics_path.string() << ", manifest marked incomplete\n";
    return kExitInterrupted;
  }
  finish(true, "");
  return kExitOk;
}

// ---------------------------------------------------------------------------

int run_eval(const EvalCommand& cmd, std::ostream& out, std::ostream& log) {
  if (cmd.oracle == cmd.checkpoint.has_value()) {
    throw CommandError("eval needs exactly one of --checkpoint or --oracle");
  }
  if (cmd.n_starts < 1) throw CommandError("--n-starts must be at least 1");
  const auto files = load_scene_dir(cmd.scene_dir);

  HierarchyParams params;
  std::unique_ptr<Controller> controller;
  HacSettings settings;
  if (cmd.oracle) {
    controller = std::make_unique<oracle::OracleController>(settings.H);
  } else {
    try {
      params = load_checkpoint(read_file(*cmd.checkpoint));
    } catch (const CommandError&) {
      throw;
    } catch (const std::exception& e) {
      throw CommandError(cmd.checkpoint->string() + ": checkpoint does not match this build's observation and action "
                         "dimensions (" + e.what() + ")");
    }
    settings = params.settings;
    controller = std::make_unique<NetworkController>(params);
  }

  EvalOptions options;
  options.n_starts = cmd.n_starts;
  options.seed = cmd.seed;
  std::map<const SceneInstance*, fs::path> names;
  for (const auto& f : files) names[f.scene.get()] = f.path;
  if (cmd.dump_dir) {
    ensure_dir(*cmd.dump_dir);
    options.on_episode = [&](const ScenePtr& scene, int index, const EpisodeResult& ep) {
      if (index != 0) return;
      const fs::path path = *cmd.dump_dir / (names.at(scene.get()).stem().string() + ".ndjson");
      write_file(path, write_trajectory(*scene, ep.trajectory.front().cells(), ep.transitions));
    };
  }
  const EvalReport report = evaluate(*controller, settings, scenes_of(files), options);
  out << format_report_table(report);
  if (cmd.report_path) {
    write_file(*cmd.report_path, format_report_csv(report));
    log << "report written to " << cmd.report_path->string() << "\n";
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------

int run_render(const RenderCommand& cmd, std::ostream& log) {
  const std::string text = read_file(cmd.input);
  RenderOptions options;
  options.grid = cmd.grid;
  std::string svg;
  try {
    if (looks_like_trajectory(text)) {
      const Trajectory t = read_trajectory(text);
      svg = render_trajectory_svg(t, options);
      log << "rendered " << trajectory_frames(t).size() << " frames\n";
    } else {
      svg = render_scene_svg(load_scene(text), options);
    }
  } catch (const CommandError&) {
    throw;
  } catch (const std::exception& e) {
    throw CommandError(cmd.input.string() + ": " + e.what());
  }
  write_file(cmd.out_svg, svg);
  return kExitOk;
}

int run_replay(const fs::path& trajectory, std::ostream& out) {
  Trajectory t;
  try {
    t = read_trajectory(read_file(trajectory));
  } catch (const CommandError&) {
    throw;
  } catch (const std::exception& e) {
    throw CommandError(trajectory.string() + ": " + e.what());
  }
  const ReplayReport report = replay(t);
  for (const auto& p : report.problems) out << "mismatch: " << p << "\n";
  out << "replayed " << report.steps << " steps, " << report.mismatches << " mismatches, final IoU "
      << report.final_iou[0] << " " << report.final_iou[1] << "\n";
  return report.mismatches == 0 ? kExitOk : kExitReplayMismatch;
}

}  // namespace furnish
