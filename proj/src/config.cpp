#include "furnish/config.hpp"

#include <functional>
#include <map>
#include <sstream>

namespace furnish {

namespace {

using nlohmann::json;

std::string describe(const json& v) { return v.dump(); }

double as_number(const json& v, const std::string& key) {
  if (!v.is_number()) throw ConfigError("config field '" + key + "': expected a number, got " + describe(v));
  return v.get<double>();
}

long long as_integer(const json& v, const std::string& key) {
  if (!v.is_number_integer()) throw ConfigError("config field '" + key + "': expected an integer, got " + describe(v));
  return v.get<long long>();
}

int as_int(const json& v, const std::string& key) {
  const long long x = as_integer(v, key);
  if (x < -2147483647LL || x > 2147483647LL) throw ConfigError("config field '" + key + "': out of range");
  return static_cast<int>(x);
}

bool as_bool(const json& v, const std::string& key) {
  if (!v.is_boolean()) throw ConfigError("config field '" + key + "': expected true or false, got " + describe(v));
  return v.get<bool>();
}

std::string as_string(const json& v, const std::string& key) {
  if (!v.is_string()) throw ConfigError("config field '" + key + "': expected a string, got " + describe(v));
  return v.get<std::string>();
}

std::vector<int> as_int_list(const json& v, const std::string& key) {
  if (!v.is_array()) throw ConfigError("config field '" + key + "': expected a list of integers");
  std::vector<int> out;
  for (const auto& x : v) out.push_back(as_int(x, key));
  return out;
}

struct Field {
  std::function<void(const json&, LoadedConfig&)> read;
  std::function<std::string(const LoadedConfig&)> fallback;
};

template <class T>
std::string show(const T& v) {
  std::ostringstream out;
  out << v;
  return out.str();
}

const std::map<std::string, Field>& fields() {
  static const std::map<std::string, Field> table = {
      {"gamma", {[](const json& v, LoadedConfig& c) { c.train.gamma = as_number(v, "gamma"); },
                 [](const LoadedConfig& c) { return show(c.train.gamma); }}},
      {"learning_rate",
       {[](const json& v, LoadedConfig& c) { c.train.learning_rate = as_number(v, "learning_rate"); },
        [](const LoadedConfig& c) { return show(c.train.learning_rate); }}},
      {"episodes_per_stage",
       {[](const json& v, LoadedConfig& c) { c.train.episodes_per_stage = as_int(v, "episodes_per_stage"); },
        [](const LoadedConfig& c) { return show(c.train.episodes_per_stage); }}},
      {"stop_iou", {[](const json& v, LoadedConfig& c) { c.train.stop_iou = as_number(v, "stop_iou"); },
                    [](const LoadedConfig& c) { return show(c.train.stop_iou); }}},
      {"algorithm",
       {[](const json& v, LoadedConfig& c) {
          try {
            c.train.algorithm = parse_algorithm(as_string(v, "algorithm"));
          } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("config field 'algorithm': ") + e.what());
          }
        },
        [](const LoadedConfig& c) { return std::string(to_string(c.train.algorithm)); }}},
      {"ppo_clip", {[](const json& v, LoadedConfig& c) { c.train.ppo_clip = as_number(v, "ppo_clip"); },
                    [](const LoadedConfig& c) { return show(c.train.ppo_clip); }}},
      {"batch_size", {[](const json& v, LoadedConfig& c) { c.train.batch_size = as_int(v, "batch_size"); },
                      [](const LoadedConfig& c) { return show(c.train.batch_size); }}},
      {"seed",
       {[](const json& v, LoadedConfig& c) {
          if (!v.is_number_unsigned()) throw ConfigError("config field 'seed': expected a non-negative integer");
          c.train.seed = v.get<std::uint64_t>();
        },
        [](const LoadedConfig& c) { return show(c.train.seed); }}},
      {"hidden", {[](const json& v, LoadedConfig& c) { c.train.hidden = as_int_list(v, "hidden"); },
                  [](const LoadedConfig& c) { return json(c.train.hidden).dump(); }}},
      {"optimizer",
       {[](const json& v, LoadedConfig& c) {
          const std::string name = as_string(v, "optimizer");
          if (name == "sgd") {
            c.train.optimizer = nn::OptimizerKind::sgd;
          } else if (name == "adam") {
            c.train.optimizer = nn::OptimizerKind::adam;
          } else {
            throw ConfigError("config field 'optimizer': expected \"sgd\" or \"adam\", got " + describe(v));
          }
        },
        [](const LoadedConfig& c) { return std::string(c.train.optimizer == nn::OptimizerKind::adam ? "adam" : "sgd"); }}},
      {"H", {[](const json& v, LoadedConfig& c) { c.train.hac.H = as_int(v, "H"); },
             [](const LoadedConfig& c) { return show(c.train.hac.H); }}},
      {"subgoal_test_rate",
       {[](const json& v, LoadedConfig& c) { c.train.hac.subgoal_test_rate = as_number(v, "subgoal_test_rate"); },
        [](const LoadedConfig& c) { return show(c.train.hac.subgoal_test_rate); }}},
      {"penalty", {[](const json& v, LoadedConfig& c) { c.train.hac.penalty = as_number(v, "penalty"); },
                   [](const LoadedConfig& c) { return show(c.train.hac.penalty); }}},
      {"max_high_steps",
       {[](const json& v, LoadedConfig& c) { c.train.max_high_steps = as_int(v, "max_high_steps"); },
        [](const LoadedConfig& c) { return show(c.train.max_high_steps); }}},
      {"buffer_capacity",
       {[](const json& v, LoadedConfig& c) {
          const long long x = as_integer(v, "buffer_capacity");
          if (x < 1) throw ConfigError("config field 'buffer_capacity': must be positive");
          c.train.buffer_capacity = static_cast<std::size_t>(x);
        },
        [](const LoadedConfig& c) { return show(c.train.buffer_capacity); }}},
      {"updates_per_episode",
       {[](const json& v, LoadedConfig& c) { c.train.updates_per_episode = as_int(v, "updates_per_episode"); },
        [](const LoadedConfig& c) { return show(c.train.updates_per_episode); }}},
      {"target_update_interval",
       {[](const json& v, LoadedConfig& c) { c.train.target_update_interval = as_int(v, "target_update_interval"); },
        [](const LoadedConfig& c) { return show(c.train.target_update_interval); }}},
      {"double_q", {[](const json& v, LoadedConfig& c) { c.train.double_q = as_bool(v, "double_q"); },
                    [](const LoadedConfig& c) { return std::string(c.train.double_q ? "true" : "false"); }}},
      {"epsilon_start",
       {[](const json& v, LoadedConfig& c) { c.train.epsilon_start = as_number(v, "epsilon_start"); },
        [](const LoadedConfig& c) { return show(c.train.epsilon_start); }}},
      {"epsilon_end", {[](const json& v, LoadedConfig& c) { c.train.epsilon_end = as_number(v, "epsilon_end"); },
                       [](const LoadedConfig& c) { return show(c.train.epsilon_end); }}},
      {"ppo_epochs", {[](const json& v, LoadedConfig& c) { c.train.ppo_epochs = as_int(v, "ppo_epochs"); },
                      [](const LoadedConfig& c) { return show(c.train.ppo_epochs); }}},
      {"ppo_rollout_episodes",
       {[](const json& v, LoadedConfig& c) { c.train.ppo_rollout_episodes = as_int(v, "ppo_rollout_episodes"); },
        [](const LoadedConfig& c) { return show(c.train.ppo_rollout_episodes); }}},
      {"gae_lambda", {[](const json& v, LoadedConfig& c) { c.train.gae_lambda = as_number(v, "gae_lambda"); },
                      [](const LoadedConfig& c) { return show(c.train.gae_lambda); }}},
      {"stage_success_rate",
       {[](const json& v, LoadedConfig& c) { c.train.stage_success_rate = as_number(v, "stage_success_rate"); },
        [](const LoadedConfig& c) { return show(c.train.stage_success_rate); }}},
      {"stage_window", {[](const json& v, LoadedConfig& c) { c.train.stage_window = as_int(v, "stage_window"); },
                        [](const LoadedConfig& c) { return show(c.train.stage_window); }}},
      {"teacher_candidate_factor",
       {[](const json& v, LoadedConfig& c) {
          c.train.teacher_candidate_factor = as_int(v, "teacher_candidate_factor");
        },
        [](const LoadedConfig& c) { return show(c.train.teacher_candidate_factor); }}},
      {"parallel", {[](const json& v, LoadedConfig& c) { c.train.parallel = as_int(v, "parallel"); },
                    [](const LoadedConfig& c) { return show(c.train.parallel); }}},
      {"stages",
       {[](const json& v, LoadedConfig& c) {
          try {
            c.schedule = CurriculumSchedule::from_indices(as_int_list(v, "stages"));
          } catch (const std::exception& e) {
            if (dynamic_cast<const ConfigError*>(&e)) throw;
            throw ConfigError(std::string("config field 'stages': ") + e.what());
          }
        },
        [](const LoadedConfig&) { return std::string("all stages 0..10 (threshold 0.45 upward)"); }}},
  };
  return table;
}

}  // namespace

LoadedConfig parse_config(const nlohmann::json& document) {
  if (!document.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, value] : document.items()) {
    if (!fields().count(key)) throw ConfigError("config field '" + key + "': unknown key");
  }
  LoadedConfig out;
  out.schedule = CurriculumSchedule::standard();
  for (const auto& [key, field] : fields()) {
    auto it = document.find(key);
    if (it == document.end()) {
      out.notices.push_back("config field '" + key + "' missing; using default " + field.fallback(out));
    } else {
      field.read(*it, out);
    }
  }
  try {
    out.train.check();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return out;
}

LoadedConfig parse_config_text(std::string_view text) {
  nlohmann::json document;
  try {
    document = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config is not valid JSON at byte " + std::to_string(e.byte));
  }
  return parse_config(document);
}

nlohmann::json config_to_json(const TrainConfig& c, const CurriculumSchedule& schedule) {
  std::vector<int> stages;
  for (const auto& s : schedule.stages) stages.push_back(s.index);
  return {
      {"gamma", c.gamma},
      {"learning_rate", c.learning_rate},
      {"episodes_per_stage", c.episodes_per_stage},
      {"stop_iou", c.stop_iou},
      {"algorithm", std::string(to_string(c.algorithm))},
      {"ppo_clip", c.ppo_clip},
      {"batch_size", c.batch_size},
      {"seed", c.seed},
      {"hidden", c.hidden},
      {"optimizer", c.optimizer == nn::OptimizerKind::adam ? "adam" : "sgd"},
      {"H", c.hac.H},
      {"subgoal_test_rate", c.hac.subgoal_test_rate},
      {"penalty", c.hac.penalty},
      {"max_high_steps", c.max_high_steps},
      {"buffer_capacity", c.buffer_capacity},
      {"updates_per_episode", c.updates_per_episode},
      {"target_update_interval", c.target_update_interval},
      {"double_q", c.double_q},
      {"epsilon_start", c.epsilon_start},
      {"epsilon_end", c.epsilon_end},
      {"ppo_epochs", c.ppo_epochs},
      {"ppo_rollout_episodes", c.ppo_rollout_episodes},
      {"gae_lambda", c.gae_lambda},
      {"stage_success_rate", c.stage_success_rate},
      {"stage_window", c.stage_window},
      {"teacher_candidate_factor", c.teacher_candidate_factor},
      {"parallel", c.parallel},
      {"stages", stages},
  };
}

}  // namespace furnish
