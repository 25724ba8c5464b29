// SPDX-License-Identifier: Apache-2.0
#include "satrs/io.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "satrs/error.hpp"

namespace satrs {

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::io, "cannot parse '" + path + "': " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io, "cannot write '" + path + "'");
  out << text;
  out.flush();
  if (!out) throw Error(ErrorCode::io, "write to '" + path + "' failed");
}

Scenario load_scenario(const std::string& path) { return build_scenario(read_json_file(path)); }

ExperimentSpec load_experiment(const std::string& path) {
  nlohmann::json j = read_json_file(path);
  if (j.contains("scenario_file")) {
    const std::filesystem::path base = std::filesystem::path(path).parent_path();
    j["scenario"] = read_json_file((base / j.at("scenario_file").get<std::string>()).string());
    j.erase("scenario_file");
  }
  try {
    return parse_experiment(j);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::invalid_config, std::string("experiment '") + path + "': " + e.what());
  }
}

}  // namespace satrs
