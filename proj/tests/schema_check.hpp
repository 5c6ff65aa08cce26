#pragma once

// Minimal structural validator for the committed report/config schemas.
// Supports: type, properties, required, items, enum, additionalProperties
// (boolean form). Enough to pin the document shape without an external
// validator dependency.

#include <string>

#include "json.hpp"

namespace test_schema {

inline bool type_matches(const std::string& type, const nlohmann::json& doc) {
  if (type == "object") return doc.is_object();
  if (type == "array") return doc.is_array();
  if (type == "string") return doc.is_string();
  if (type == "boolean") return doc.is_boolean();
  if (type == "integer") return doc.is_number_integer() || doc.is_number_unsigned();
  if (type == "number") return doc.is_number();
  if (type == "null") return doc.is_null();
  return false;
}

inline bool validate(const nlohmann::json& schema, const nlohmann::json& doc,
                     std::string* error, const std::string& where = "$") {
  auto fail = [&](const std::string& message) {
    if (error) *error = where + ": " + message;
    return false;
  };

  if (schema.contains("type")) {
    const auto& type = schema.at("type");
    if (type.is_string()) {
      if (!type_matches(type.get<std::string>(), doc)) {
        return fail("expected type " + type.get<std::string>());
      }
    } else if (type.is_array()) {
      bool any = false;
      for (const auto& t : type) any = any || type_matches(t.get<std::string>(), doc);
      if (!any) return fail("no type alternative matched");
    }
  }
  if (schema.contains("enum")) {
    bool any = false;
    for (const auto& candidate : schema.at("enum")) any = any || candidate == doc;
    if (!any) return fail("value not in enum");
  }
  if (doc.is_object()) {
    if (schema.contains("required")) {
      for (const auto& key : schema.at("required")) {
        if (!doc.contains(key.get<std::string>())) {
          return fail("missing required key '" + key.get<std::string>() + "'");
        }
      }
    }
    const bool allow_extra = !schema.contains("additionalProperties") ||
                             schema.at("additionalProperties") != false;
    if (schema.contains("properties")) {
      const auto& props = schema.at("properties");
      for (auto it = doc.begin(); it != doc.end(); ++it) {
        if (props.contains(it.key())) {
          if (!validate(props.at(it.key()), it.value(), error,
                        where + "." + it.key())) {
            return false;
          }
        } else if (!allow_extra) {
          return fail("unexpected key '" + it.key() + "'");
        }
      }
    }
    // additionalProperties as a schema applied to non-listed keys
    if (schema.contains("additionalProperties") &&
        schema.at("additionalProperties").is_object()) {
      const auto& extra_schema = schema.at("additionalProperties");
      for (auto it = doc.begin(); it != doc.end(); ++it) {
        if (schema.contains("properties") &&
            schema.at("properties").contains(it.key())) {
          continue;
        }
        if (!validate(extra_schema, it.value(), error, where + "." + it.key())) {
          return false;
        }
      }
    }
  }
  if (doc.is_array() && schema.contains("items")) {
    std::size_t index = 0;
    for (const auto& element : doc) {
      if (!validate(schema.at("items"), element, error,
                    where + "[" + std::to_string(index) + "]")) {
        return false;
      }
      ++index;
    }
  }
  return true;
}

}  // namespace test_schema
