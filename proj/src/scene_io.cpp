#include <string>

#include "furnish/scene_json.hpp"

namespace furnish {

using nlohmann::json;

namespace {

const json& require(const json& j, const char* key, const std::string& context) {
  if (!j.is_object()) throw SceneError(context + ": expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw SceneError("missing field '" + context + "." + key + "'");
  return *it;
}

double require_number(const json& j, const char* key, const std::string& context) {
  const json& v = require(j, key, context);
  if (!v.is_number()) throw SceneError("field '" + context + "." + key + "' must be a number");
  return v.get<double>();
}

std::string require_string(const json& j, const char* key, const std::string& context) {
  const json& v = require(j, key, context);
  if (!v.is_string()) throw SceneError("field '" + context + "." + key + "' must be a string");
  return v.get<std::string>();
}

const json& require_array(const json& j, const char* key) {
  const json& v = require(j, key, "scene");
  if (!v.is_array()) throw SceneError(std::string("field 'scene.") + key + "' must be an array");
  return v;
}

json element_to_json(const Element& e) {
  return json{{"kind", to_string(e.kind)}, {"label", e.label}, {"box", box_to_json(e.box)}};
}

Element element_from_json(const json& j, const std::string& field) {
  Element e;
  e.kind = parse_element_kind(require_string(j, "kind", field));
  e.label = require_string(j, "label", field);
  e.box = box_from_json(require(j, "box", field), field + ".box");
  return e;
}

}  // namespace

json box_to_json(const AxisBox& box) {
  return json{{"cx", box.center_x()}, {"cy", box.center_y()}, {"w", box.size_w()}, {"h", box.size_h()}};
}

AxisBox box_from_json(const json& j, const std::string& field) {
  const double cx = require_number(j, "cx", field);
  const double cy = require_number(j, "cy", field);
  const double w = require_number(j, "w", field);
  const double h = require_number(j, "h", field);
  try {
    return AxisBox(cx, cy, w, h);
  } catch (const GeometryError& e) {
    throw SceneError(field + ": " + e.what());
  }
}

json scene_to_json(const SceneInstance& scene) {
  json j;
  j["version"] = kSceneFormatVersion;
  j["room_type"] = to_string(scene.room_type);
  j["boundary"] = box_to_json(scene.boundary);
  j["fixed"] = json::array();
  for (const auto& e : scene.fixed) j["fixed"].push_back(element_to_json(e));
  j["furniture"] = json::array();
  for (const auto& e : scene.furniture) j["furniture"].push_back(element_to_json(e));
  j["goal"] = json::array();
  for (const auto& b : scene.goal) j["goal"].push_back(box_to_json(b));
  j["start"] = json::array();
  for (const auto& b : scene.start) j["start"].push_back(box_to_json(b));
  j["axes"] = json::array();
  for (auto a : scene.axes) j["axes"].push_back(to_string(a));
  j["step_size"] = scene.step_size;
  return j;
}

SceneInstance scene_from_json(const json& j) {
  if (!j.is_object()) throw SceneError("scene document must be a JSON object");
  const json& version = require(j, "version", "scene");
  if (!version.is_number_integer()) throw SceneError("field 'scene.version' must be an integer");
  if (version.get<int>() != kSceneFormatVersion) {
    throw SceneError("unsupported scene version " + version.dump() + " (expected " +
                     std::to_string(kSceneFormatVersion) + ")");
  }
  static const char* kKnown[] = {"version", "room_type", "boundary", "fixed", "furniture",
                                 "goal",    "start",     "axes",     "step_size"};
  for (const auto& [key, _] : j.items()) {
    bool known = false;
    for (const char* k : kKnown) known = known || key == k;
    if (!known) throw SceneError("unknown field 'scene." + key + "'");
  }

  SceneInstance scene;
  scene.room_type = parse_room_type(require_string(j, "room_type", "scene"));
  scene.boundary = box_from_json(require(j, "boundary", "scene"), "boundary");
  int k = 0;
  for (const auto& e : require_array(j, "fixed")) {
    scene.fixed.push_back(element_from_json(e, "fixed[" + std::to_string(k++) + "]"));
  }
  k = 0;
  for (const auto& e : require_array(j, "furniture")) {
    scene.furniture.push_back(element_from_json(e, "furniture[" + std::to_string(k++) + "]"));
  }
  k = 0;
  for (const auto& b : require_array(j, "goal")) {
    scene.goal.push_back(box_from_json(b, "goal[" + std::to_string(k++) + "]"));
  }
  k = 0;
  for (const auto& b : require_array(j, "start")) {
    scene.start.push_back(box_from_json(b, "start[" + std::to_string(k++) + "]"));
  }
  for (const auto& a : require_array(j, "axes")) {
    if (!a.is_string()) throw SceneError("field 'scene.axes' must hold strings");
    scene.axes.push_back(parse_move_axis(a.get<std::string>()));
  }
  scene.step_size = require_number(j, "step_size", "scene");
  return scene;
}

std::string save_scene(const SceneInstance& scene) {
  return scene_to_json(scene).dump(2) + "\n";
}

SceneInstance load_scene(std::string_view document) {
  json j;
  try {
    j = json::parse(document.begin(), document.end());
  } catch (const json::parse_error& e) {
    throw SceneError("scene parse error at byte " + std::to_string(e.byte) + ": " + e.what());
  }
  SceneInstance scene = scene_from_json(j);
  const auto violations = validate(scene);
  if (!violations.empty()) {
    std::string msg = "invalid scene:";
    for (const auto& v : violations) msg += "\n  " + v;
    throw SceneError(msg);
  }
  return scene;
}

}  // namespace furnish
