#ifndef STEREOBENCH_SCENE_CONFIG_HPP
#define STEREOBENCH_SCENE_CONFIG_HPP

// YAML (de)serialization of scenes and rigs. Schema: docs/config.md.

#include <stdexcept>
#include <string>

#include <yaml-cpp/yaml.h>

#include "stereobench/geometry.hpp"
#include "stereobench/synth.hpp"

namespace stereobench {

/// Config-file problem; `line` is 1-based, 0 when unknown.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& field, int line, const std::string& what)
      : std::runtime_error((line > 0 ? "line " + std::to_string(line) + ": " : std::string()) +
                           field + ": " + what),
        field_(field),
        line_(line) {}
  const std::string& field() const noexcept { return field_; }
  int line() const noexcept { return line_; }

 private:
  std::string field_;
  int line_;
};

SceneSpec scene_from_yaml(const YAML::Node& node);
YAML::Node scene_to_yaml(const SceneSpec& scene);

/// Keys: focal_length_px, cx, cy, width, height, baseline_m,
/// rotation_deg [roll, pitch, yaw]. Missing keys fall back to `defaults`.
StereoRig rig_from_yaml(const YAML::Node& node, const StereoRig& defaults);
YAML::Node rig_to_yaml(const StereoRig& rig);

/// Fetches node[key] as T, reporting the field path and line on failure.
template <class T>
T yaml_get(const YAML::Node& node, const std::string& key, const std::string& path, T fallback) {
  const YAML::Node child = node[key];
  if (!child) return fallback;
  try {
    return child.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(path.empty() ? key : path + "." + key, child.Mark().line + 1,
                      "expected a value of the right type");
  }
}

}  // namespace stereobench

#endif  // STEREOBENCH_SCENE_CONFIG_HPP
