#pragma once

#include "bimodal/scenario.hpp"

#include <stdexcept>
#include <string>

namespace bimodal {

/// Parse or validation failure while reading a scenario file. `field` names
/// the offending key path (e.g. "goal", "search.max_speed") when known.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& message, std::string field = {}, int line = 0, int column = 0)
      : std::runtime_error(message), field_(std::move(field)), line_(line), column_(column) {}

  const std::string& field() const { return field_; }
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  std::string field_;
  int line_;
  int column_;
};

/// Scenario files are JSON documents (see README for the schema). Missing
/// keys take defaults; unknown keys are rejected.
ScenarioConfig parse_config(const std::string& text, const std::string& source = "<string>");
ScenarioConfig load_config(const std::string& path);

/// Writes every field, so parse_config(serialize_config(c)) == c.
std::string serialize_config(const ScenarioConfig& cfg);

bool operator==(const ScenarioConfig& a, const ScenarioConfig& b);

}  // namespace bimodal
