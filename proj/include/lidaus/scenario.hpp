#ifndef LIDAUS_SCENARIO_HPP
#define LIDAUS_SCENARIO_HPP

#include <stdexcept>
#include <string>

#include "lidaus/mission.hpp"

namespace lidaus {

// Scenario / configuration problems carry exit code 2 at the CLI.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Parses a scenario file into a validated MissionConfig. Unknown keys are
// rejected; diagnostics name the offending key (and line for syntax errors).
MissionConfig parse_scenario(const std::string& path);
MissionConfig parse_scenario_text(const std::string& text, const std::string& origin);

// Canonical serialization; parse(serialize(c)) == c.
std::string serialize_scenario(const MissionConfig& config);

// FNV-1a hash of the canonical serialization, as fixed-width hex.
std::string config_hash(const MissionConfig& config);

}  // namespace lidaus

#endif
