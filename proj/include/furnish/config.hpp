#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "furnish/train.hpp"

namespace furnish {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LoadedConfig {
  TrainConfig train;
  CurriculumSchedule schedule;
  std::vector<std::string> notices;  // one per key that fell back to its default
};

/// Reads a training config document. Unknown keys, wrong types and values
/// that break TrainConfig invariants raise ConfigError naming the field;
/// missing keys keep their defaults and add a notice.
LoadedConfig parse_config(const nlohmann::json& document);
LoadedConfig parse_config_text(std::string_view text);

/// Full snapshot of a config, every key present.
nlohmann::json config_to_json(const TrainConfig& config, const CurriculumSchedule& schedule);

}  // namespace furnish
