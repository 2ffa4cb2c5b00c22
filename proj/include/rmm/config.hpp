#pragma once

#include <string>
#include <string_view>

#include <json.hpp>

#include "rmm/studies.hpp"

namespace rmm {

struct OutputSettings {
  std::string dir = "out";
  bool vtk = true;
  bool csv = true;
  bool operator==(const OutputSettings&) const = default;
};

struct RunConfig {
  StudySpec study;
  OutputSettings output;
  bool operator==(const RunConfig&) const = default;
};

/// Validates against the schema; unknown keys are rejected. Throws ConfigError
/// naming the offending field.
RunConfig parse_config(const nlohmann::json& j);
/// Parses JSON text; syntax errors report line and column.
RunConfig parse_config_text(std::string_view text, const std::string& source = "<config>");
RunConfig load_config(const std::string& path);

/// Full config with every default written out; parse_config(to_json(c)) == c.
nlohmann::json to_json(const RunConfig& c);
nlohmann::json to_json(const IsotropicParams& p);

}  // namespace rmm
