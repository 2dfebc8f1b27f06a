/* Copyright 2026 The Halloc Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "halloc/scene.h"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "halloc/error.h"
#include "json.hpp"

namespace halloc {

BBox SceneObject::Box() const {
  return BBox::Make(center.x - width / 2, center.y - height / 2,
                    center.x + width / 2, center.y + height / 2);
}

void SceneGraph::Validate() const {
  std::set<int> ids;
  for (const auto& o : objects) {
    if (!ids.insert(o.id).second) {
      throw Error(ErrorCode::kInvalidArgument,
                  "scene " + id + ": duplicate object id " +
                      std::to_string(o.id));
    }
    if (o.label.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "scene " + id + ": empty label");
    }
    o.Box();  // throws when outside the unit square
  }
}

const SceneObject* SceneGraph::FindById(int object_id) const {
  for (const auto& o : objects) {
    if (o.id == object_id) return &o;
  }
  return nullptr;
}

const SceneObject* SceneGraph::FindLabel(std::string_view label) const {
  for (const auto& o : objects) {
    if (o.label == label) return &o;
  }
  return nullptr;
}

std::string SceneToJson(const SceneGraph& scene) {
  nlohmann::ordered_json j;
  j["id"] = scene.id;
  j["objects"] = nlohmann::ordered_json::array();
  for (const auto& o : scene.objects) {
    nlohmann::ordered_json e;
    e["id"] = o.id;
    e["label"] = o.label;
    e["attributes"] = o.attributes;
    e["center"] = {o.center.x, o.center.y};
    e["extent"] = {o.width, o.height};
    j["objects"].push_back(std::move(e));
  }
  return j.dump();
}

SceneGraph SceneFromJson(std::string_view text) {
  SceneGraph scene;
  try {
    auto j = nlohmann::json::parse(text);
    scene.id = j.at("id").get<std::string>();
    for (const auto& e : j.at("objects")) {
      SceneObject o;
      o.id = e.at("id").get<int>();
      o.label = e.at("label").get<std::string>();
      for (const auto& a : e.at("attributes")) o.attributes.insert(a.get<std::string>());
      const auto& c = e.at("center");
      const auto& x = e.at("extent");
      if (c.size() != 2 || x.size() != 2) {
        throw Error(ErrorCode::kProtocol, "center/extent must have 2 entries");
      }
      o.center = {c[0].get<double>(), c[1].get<double>()};
      o.width = x[0].get<double>();
      o.height = x[1].get<double>();
      scene.objects.push_back(std::move(o));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kProtocol, std::string("bad scene JSON: ") + e.what());
  }
  scene.Validate();
  return scene;
}

std::vector<SceneGraph> LoadScenes(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kNotFound, "cannot open scenes file " + path);
  std::vector<SceneGraph> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(SceneFromJson(line));
  }
  return out;
}

std::optional<Point> RelationDirection(std::string_view term) {
  const std::string t(term);
  if (t == "left") return Point{1, 0};
  if (t == "right") return Point{-1, 0};
  if (t == "above" || t == "over" || t == "top" || t == "up" || t == "upward") {
    return Point{0, 1};
  }
  if (t == "below" || t == "under" || t == "bottom" || t == "down" ||
      t == "downward") {
    return Point{0, -1};
  }
  return std::nullopt;
}

std::optional<std::string> OppositeTerm(std::string_view term) {
  static const std::map<std::string, std::string, std::less<>> kOpposite = {
      {"left", "right"},     {"right", "left"},       {"above", "below"},
      {"below", "above"},    {"over", "under"},       {"under", "over"},
      {"top", "bottom"},     {"bottom", "top"},       {"up", "down"},
      {"down", "up"},        {"upward", "downward"},  {"downward", "upward"},
      {"inside", "outside"}, {"outside", "inside"},   {"inward", "outward"},
      {"outward", "inward"}, {"front", "behind"},     {"behind", "front"}};
  auto it = kOpposite.find(term);
  if (it == kOpposite.end()) return std::nullopt;
  return it->second;
}

std::string RelationBetween(const SceneObject& a, const SceneObject& b) {
  const double dx = b.center.x - a.center.x;
  const double dy = b.center.y - a.center.y;
  if (std::abs(dx) >= std::abs(dy)) return dx >= 0 ? "left" : "right";
  return dy >= 0 ? "above" : "below";
}

FeatureSpace::FeatureSpace(std::vector<std::string> labels,
                           std::vector<std::string> attributes)
    : labels_(std::move(labels)), attributes_(std::move(attributes)) {}

const FeatureSpace& FeatureSpace::Default() {
  static const FeatureSpace kDefault(
      {"ball", "box", "cup", "dog", "cat", "chair", "lamp", "book", "vase",
       "clock", "tree", "car", "bird", "hat", "bottle", "plant"},
      {"red", "blue", "green", "yellow", "small", "large", "wooden", "shiny"});
  return kDefault;
}

bool FeatureSpace::KnowsLabel(std::string_view label) const {
  return std::find(labels_.begin(), labels_.end(), label) != labels_.end();
}

int FeatureSpace::LabelSlot(std::string_view label) const {
  auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) return static_cast<int>(labels_.size() + attributes_.size());
  return static_cast<int>(it - labels_.begin());
}

int FeatureSpace::AttributeSlot(std::string_view attribute) const {
  auto it = std::find(attributes_.begin(), attributes_.end(), attribute);
  if (it == attributes_.end()) {
    return static_cast<int>(labels_.size() + attributes_.size()) + 1;
  }
  return static_cast<int>(labels_.size() + (it - attributes_.begin()));
}

std::vector<double> FeatureSpace::ObjectFeatures(
    std::string_view label, const std::set<std::string>& attributes) const {
  std::vector<double> v(dim(), 0.0);
  v[LabelSlot(label)] += 1;
  for (const auto& a : attributes) v[AttributeSlot(a)] += 1;
  return v;
}

std::vector<double> FeatureSpace::SceneFeatures(const SceneGraph& scene) const {
  std::vector<double> v(dim(), 0.0);
  for (const auto& o : scene.objects) {
    auto f = ObjectFeatures(o.label, o.attributes);
    for (int i = 0; i < dim(); ++i) v[i] += f[i];
  }
  v[BackgroundSlot()] += 1;
  return v;
}

}  // namespace halloc
