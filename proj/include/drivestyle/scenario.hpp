#pragma once

#include "drivestyle/config.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>

namespace drivestyle {

/// Invalid or missing configuration; key() names the offending key.
class ScenarioError : public std::runtime_error {
 public:
  ScenarioError(std::string key, const std::string& message)
      : std::runtime_error("key '" + key + "': " + message), key_(std::move(key)) {}

  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

/// Parses a scenario file: one `section.key = value` per line, `#` starts a
/// comment, lists are comma-separated. Keys listed as optional in
/// docs/scenario-format.md may be absent or empty and take their defaults.
/// Unknown keys, missing required keys and invariant violations throw
/// ScenarioError.
ScenarioConfig load_scenario(const std::filesystem::path& path);
ScenarioConfig parse_scenario(const std::string& text);

/// Throws ScenarioError naming the first key whose invariant fails.
void validate(const ScenarioConfig& config);

}  // namespace drivestyle
