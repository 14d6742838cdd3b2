#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "metafal/env_model.hpp"
#include "metafal/meta.hpp"
#include "metafal/scenario.hpp"
#include "metafal/simulator.hpp"

namespace metafal {

using Json = nlohmann::json;

/// Parses `text`; syntax errors become ParseError naming `source`, line and
/// column.
Json parse_document(std::string_view text, const std::string& source);
Json read_document(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

/// Angles are written in radians; readers also accept `<name>_deg` keys.
Json scenario_to_json(const ScenarioConfig& cfg);
/// Missing keys keep `base` values; unknown keys are rejected.
ScenarioConfig scenario_from_json(const Json& j, const std::string& path = "scenario",
                                  ScenarioConfig base = {});

Json environment_to_json(const Environment& env);
/// Builds a stand-alone environment (own track geometry) from a document.
Environment environment_from_json(const Json& j, const ScenarioConfig& cfg,
                                  const std::string& path = "environment");

Json trajectory_to_json(const Trajectory& traj);
/// Reads states and controls; the shoulder cache is left empty.
Trajectory trajectory_from_json(const Json& j, const std::string& path = "trajectory");

Json status_to_json(const StatusReport& st);

std::string hex_encode(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> hex_decode(std::string_view hex, const std::string& path);

/// Environment, trajectory dump, packed observations and status, plus the
/// scenario the run was made under.
Json meta_state_to_json(const MetaState& s, const ScenarioConfig& cfg);

struct LoadedMetaState {
  ScenarioConfig scenario;
  MetaState state;
};

/// Rebuilds a meta-state document. The shoulder cache is recomputed from the
/// recorded states and controls.
LoadedMetaState meta_state_from_json(const Json& j);

}  // namespace metafal
