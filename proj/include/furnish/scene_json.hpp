#pragma once

#include <json.hpp>

#include "furnish/scene.hpp"

namespace furnish {

nlohmann::json box_to_json(const AxisBox& box);
AxisBox box_from_json(const nlohmann::json& j, const std::string& field);

nlohmann::json scene_to_json(const SceneInstance& scene);
/// Structural decode only; call validate() for the scene invariants.
SceneInstance scene_from_json(const nlohmann::json& j);

}  // namespace furnish
