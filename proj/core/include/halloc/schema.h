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

// JSON schemas shared with the reference backends and a validator for the
// subset of JSON Schema they use: type, properties, required,
// additionalProperties, items, minItems/maxItems, minProperties/
// maxProperties, minimum/maximum, enum and "$ref" to another embedded
// schema by name.

#ifndef HALLOC_SCHEMA_H_
#define HALLOC_SCHEMA_H_

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace halloc {

// Schema name (file name without ".schema.json") to schema text.
const std::map<std::string, std::string>& EmbeddedSchemas();

// Violations of `doc` against `schema`, each prefixed with a JSON pointer.
// Empty when valid.
std::vector<std::string> ValidateJson(const nlohmann::json& doc,
                                      const nlohmann::json& schema);

// Parses `document` and validates it against the embedded schema `name`.
// Throws kNotFound for unknown schema names.
std::vector<std::string> ValidateDocument(std::string_view name,
                                          std::string_view document);

}  // namespace halloc

#endif  // HALLOC_SCHEMA_H_
