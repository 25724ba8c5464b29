// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include <json.hpp>

#include "satrs/harness.hpp"
#include "satrs/scenario.hpp"

namespace satrs {

/// Parses a JSON file. Throws Error(io) when the file cannot be read or parsed.
nlohmann::json read_json_file(const std::string& path);

/// Writes `text` to `path`, replacing it. Throws Error(io) on failure.
void write_text_file(const std::string& path, const std::string& text);

Scenario load_scenario(const std::string& path);

/// Experiment file; a "scenario_file" entry is resolved relative to the
/// experiment file's directory and takes the place of an inline "scenario".
ExperimentSpec load_experiment(const std::string& path);

}  // namespace satrs
