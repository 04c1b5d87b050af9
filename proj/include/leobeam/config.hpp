#pragma once

#include <stdexcept>
#include <string>

#include "leobeam/sim.hpp"

namespace leobeam::config {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Scenario with the stock parameter set (desk-scale epoch count).
sim::ScenarioConfig default_scenario();

// Key/value scenario text; keys are dotted, values typed, '#' comments.
// Unknown keys and malformed values raise ConfigError naming the line.
sim::ScenarioConfig parse_scenario_text(const std::string& text,
                                        const std::string& origin);

sim::ScenarioConfig load_scenario_file(const std::string& path);

// Apply one dotted-key override (same schema as the file).
void apply_override(sim::ScenarioConfig& config, const std::string& key,
                    const std::string& value);

// Canonical serialization; parsing it back reproduces the config.
std::string serialize_scenario(const sim::ScenarioConfig& config);

}  // namespace leobeam::config
