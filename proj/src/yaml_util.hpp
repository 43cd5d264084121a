#pragma once

#include <initializer_list>
#include <string>
#include <string_view>

#include <yaml-cpp/yaml.h>

#include "driftbandit/errors.hpp"

namespace driftbandit::yaml {

inline std::string where(const YAML::Node& node) {
  const auto mark = node.Mark();
  if (mark.line < 0) return "config";
  return "line " + std::to_string(mark.line + 1);
}

[[noreturn]] inline void fail(const YAML::Node& node, const std::string& msg) {
  throw ConfigError(where(node) + ": " + msg);
}

inline void require_map(const YAML::Node& node, std::string_view what) {
  if (!node.IsMap()) fail(node, std::string(what) + " must be a mapping");
}

inline void check_keys(const YAML::Node& node, std::string_view section, std::initializer_list<std::string_view> allowed) {
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    bool known = false;
    for (auto a : allowed) known = known || key == a;
    if (!known) fail(kv.first, "unknown key '" + key + "' in " + std::string(section));
  }
}

template <typename T>
T as(const YAML::Node& node, std::string_view key) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    fail(node, "bad value for '" + std::string(key) + "'");
  }
}

template <typename T>
void read_optional(const YAML::Node& parent, const char* key, T& out) {
  if (const auto n = parent[key]) out = as<T>(n, key);
}

template <typename T>
T read_required(const YAML::Node& parent, const char* key) {
  const auto n = parent[key];
  if (!n) fail(parent, std::string("missing required key '") + key + "'");
  return as<T>(n, key);
}

}  // namespace driftbandit::yaml
