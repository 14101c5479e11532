#pragma once

// Scenario files: YAML with strict validation. Every error names the file,
// line and field.

#include <optional>
#include <string>
#include <vector>

#include "crw/angle.hpp"
#include "crw/core.hpp"
#include "crw/sweep.hpp"

namespace crw {

struct SweepDefaults {
  std::optional<SweepTarget> var;
  std::optional<double> from;
  std::optional<double> to;
  std::optional<int> steps;
};

struct ScenarioConfig {
  NodeSpec node;
  std::vector<ChannelSpec> channels;
  AngleUnit angle_unit = AngleUnit::kRadians;
  std::optional<Channel> incident;
  std::optional<Channel> k_channel;
  std::optional<double> k;  // radians
  std::vector<DerivedRule> rules;
  SweepDefaults sweep;
};

// `source` names the origin in messages. Throws Error(kConfig).
ScenarioConfig parse_config(const std::string& text, const std::string& source = "<config>");
ScenarioConfig load_config(const std::string& path);

// Round-trippable YAML for a scenario (angles written as radians).
std::string to_yaml(const ScenarioConfig& cfg);

}  // namespace crw
