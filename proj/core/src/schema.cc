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

#include "halloc/schema.h"

#include "halloc/error.h"

namespace halloc {
namespace {

using json = nlohmann::json;

const json& SchemaByName(const std::string& name) {
  static const auto* parsed = [] {
    auto* out = new std::map<std::string, json>;
    for (const auto& [key, text] : EmbeddedSchemas()) {
      (*out)[key] = json::parse(text);
    }
    return out;
  }();
  auto it = parsed->find(name);
  if (it == parsed->end()) {
    throw Error(ErrorCode::kNotFound, "unknown schema '" + name + "'");
  }
  return it->second;
}

bool HasType(const json& doc, const std::string& type) {
  if (type == "object") return doc.is_object();
  if (type == "array") return doc.is_array();
  if (type == "string") return doc.is_string();
  if (type == "number") return doc.is_number();
  if (type == "integer") {
    return doc.is_number_integer() ||
           (doc.is_number_float() && doc.get<double>() == static_cast<double>(
                                                              static_cast<long long>(
                                                                  doc.get<double>())));
  }
  if (type == "boolean") return doc.is_boolean();
  if (type == "null") return doc.is_null();
  return false;
}

void Check(const json& doc, const json& schema, const std::string& path,
           std::vector<std::string>& out) {
  if (schema.is_boolean()) {
    if (!schema.get<bool>()) out.push_back(path + ": not allowed");
    return;
  }
  if (schema.contains("$ref")) {
    Check(doc, SchemaByName(schema["$ref"].get<std::string>()), path, out);
  }
  if (schema.contains("type")) {
    const json& type = schema["type"];
    bool ok = false;
    if (type.is_array()) {
      for (const auto& t : type) ok = ok || HasType(doc, t.get<std::string>());
    } else {
      ok = HasType(doc, type.get<std::string>());
    }
    if (!ok) {
      out.push_back(path + ": expected " + type.dump() + ", got " + doc.type_name());
      return;
    }
  }
  if (schema.contains("enum")) {
    bool found = false;
    for (const auto& v : schema["enum"]) found = found || v == doc;
    if (!found) out.push_back(path + ": value not in " + schema["enum"].dump());
  }
  if (doc.is_number()) {
    const double v = doc.get<double>();
    if (schema.contains("minimum") && v < schema["minimum"].get<double>()) {
      out.push_back(path + ": below minimum " + schema["minimum"].dump());
    }
    if (schema.contains("maximum") && v > schema["maximum"].get<double>()) {
      out.push_back(path + ": above maximum " + schema["maximum"].dump());
    }
  }
  if (doc.is_array()) {
    if (schema.contains("minItems") && doc.size() < schema["minItems"].get<std::size_t>()) {
      out.push_back(path + ": fewer than " + schema["minItems"].dump() + " items");
    }
    if (schema.contains("maxItems") && doc.size() > schema["maxItems"].get<std::size_t>()) {
      out.push_back(path + ": more than " + schema["maxItems"].dump() + " items");
    }
    if (schema.contains("items")) {
      for (std::size_t i = 0; i < doc.size(); ++i) {
        Check(doc[i], schema["items"], path + "/" + std::to_string(i), out);
      }
    }
  }
  if (doc.is_object()) {
    if (schema.contains("minProperties") &&
        doc.size() < schema["minProperties"].get<std::size_t>()) {
      out.push_back(path + ": too few properties");
    }
    if (schema.contains("maxProperties") &&
        doc.size() > schema["maxProperties"].get<std::size_t>()) {
      out.push_back(path + ": too many properties");
    }
    if (schema.contains("required")) {
      for (const auto& key : schema["required"]) {
        if (!doc.contains(key.get<std::string>())) {
          out.push_back(path + ": missing required '" + key.get<std::string>() + "'");
        }
      }
    }
    const json* properties = schema.contains("properties") ? &schema["properties"] : nullptr;
    for (const auto& [key, value] : doc.items()) {
      const std::string child = path + "/" + key;
      if (properties && properties->contains(key)) {
        Check(value, (*properties)[key], child, out);
      } else if (schema.contains("additionalProperties")) {
        Check(value, schema["additionalProperties"], child, out);
      }
    }
  }
}

}  // namespace

std::vector<std::string> ValidateJson(const json& doc, const json& schema) {
  std::vector<std::string> out;
  Check(doc, schema, "", out);
  return out;
}

std::vector<std::string> ValidateDocument(std::string_view name,
                                          std::string_view document) {
  const json& schema = SchemaByName(std::string(name));
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::exception& e) {
    return {std::string("not valid JSON: ") + e.what()};
  }
  return ValidateJson(doc, schema);
}

}  // namespace halloc
