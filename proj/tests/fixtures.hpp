#pragma once

#include <string>

#include "dicke/expcli/config.hpp"

namespace dicke::testing {

inline std::string config_path(const std::string& name)
{
    return std::string(DICKE_SOURCE_DIR) + "/configs/" + name;
}

// Scenario of the shipped laboratory configuration.
inline const expcli::ScenarioConfig& lab_scenario()
{
    static const expcli::ScenarioConfig s = expcli::build_scenario(
        expcli::ConfigFile::load(config_path("lab.cfg")), expcli::Experiment::params);
    return s;
}

} // namespace dicke::testing
