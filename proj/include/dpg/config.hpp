#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "dpg/adapt.hpp"

namespace dpg {

/// Flat `key = value` configuration. `#` starts a comment; blank lines are
/// ignored; unknown keys and malformed values throw ConfigError.
void set_config_value(AdaptConfig& config, const std::string& key, const std::string& value);
void parse_config(std::istream& in, AdaptConfig& config);
AdaptConfig load_config(const std::filesystem::path& path);

/// Every key with its current value, one per line, in a stable order.
std::string config_text(const AdaptConfig& config);
std::vector<std::string> config_keys();

AdaptMode parse_mode(const std::string& s);
TestNorm parse_norm(const std::string& s);
SolverMethod parse_solver(const std::string& s);
RemeshBackend parse_remesher(const std::string& s);

}  // namespace dpg
