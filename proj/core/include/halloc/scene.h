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

// Synthetic ground-truth scenes and the feature space used by the oracle
// embedding backend.

#ifndef HALLOC_SCENE_H_
#define HALLOC_SCENE_H_

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "halloc/gateway.h"

namespace halloc {

struct SceneObject {
  int id = 0;
  std::string label;
  std::set<std::string> attributes;
  Point center;
  double width = 0.1;
  double height = 0.1;

  BBox Box() const;
  bool operator==(const SceneObject&) const = default;
};

struct SceneGraph {
  std::string id;
  std::vector<SceneObject> objects;

  // Throws kInvalidArgument on duplicate ids or boxes outside [0,1]^2.
  void Validate() const;
  const SceneObject* FindById(int id) const;
  // First object with `label`, or nullptr.
  const SceneObject* FindLabel(std::string_view label) const;
  bool operator==(const SceneGraph&) const = default;
};

// Scenes serialize as one JSON object:
//   {"id": str, "objects": [{"id": int, "label": str, "attributes": [str],
//    "center": [x, y], "extent": [w, h]}]}
std::string SceneToJson(const SceneGraph& scene);
SceneGraph SceneFromJson(std::string_view text);

// Reads a file holding one scene per line.
std::vector<SceneGraph> LoadScenes(const std::string& path);

// Spatial terms that carry a direction in image coordinates (y grows
// downwards): the unit vector from the first object's center to the
// second's when "first <term> second" holds. nullopt for terms without a
// direction ("inside", "front", ...).
std::optional<Point> RelationDirection(std::string_view positional_term);

// The opposite term ("left" <-> "right", "above" <-> "below", ...), or
// nullopt.
std::optional<std::string> OppositeTerm(std::string_view positional_term);

// Dominant-axis relation of `b` as seen from `a`: "left" when b lies to the
// right of a, and so on.
std::string RelationBetween(const SceneObject& a, const SceneObject& b);

// One slot per known label and attribute, plus catch-all slots for unknown
// labels and attributes and a background slot.
class FeatureSpace {
 public:
  FeatureSpace(std::vector<std::string> labels,
               std::vector<std::string> attributes);
  static const FeatureSpace& Default();

  int dim() const { return static_cast<int>(labels_.size() + attributes_.size()) + 3; }
  int LabelSlot(std::string_view label) const;
  int AttributeSlot(std::string_view attribute) const;
  int BackgroundSlot() const { return dim() - 1; }

  const std::vector<std::string>& labels() const { return labels_; }
  const std::vector<std::string>& attributes() const { return attributes_; }
  bool KnowsLabel(std::string_view label) const;

  // Unnormalized feature counts of one object: its label slot plus one per
  // attribute.
  std::vector<double> ObjectFeatures(std::string_view label,
                                     const std::set<std::string>& attributes) const;
  // Sum of the object features plus one background count.
  std::vector<double> SceneFeatures(const SceneGraph& scene) const;

 private:
  std::vector<std::string> labels_;
  std::vector<std::string> attributes_;
};

}  // namespace halloc

#endif  // HALLOC_SCENE_H_
