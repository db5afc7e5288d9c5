#pragma once

#include <string>

#include "embounds/scenario.hpp"
#include "embounds/scenario_gen.hpp"

namespace embounds {

// JSON wire format for models: n_t/n_r/n_s counts, alpha/beta as [re, im],
// blocks h0/a/gamma/b as row-major nested arrays of [re, im] pairs, plus
// optional passive/seed/tag metadata. Parsers throw ValidationError with the
// offending field name.
ScenarioModel scenario_from_json_text(const std::string& text);
std::string scenario_to_json_text(const ScenarioModel& model);
ScenarioModel load_scenario(const std::string& path);
void save_scenario(const ScenarioModel& model, const std::string& path);

ScenarioSpec spec_from_json_text(const std::string& text);
std::string spec_to_json_text(const ScenarioSpec& spec);
ScenarioSpec load_spec(const std::string& path);

// Stable 64-bit content hash of the canonical JSON serialization, in hex.
// Used to key sweep cells.
std::string scenario_hash(const ScenarioModel& model);

}  // namespace embounds
