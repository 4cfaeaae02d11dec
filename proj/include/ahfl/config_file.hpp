#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "ahfl/engine.hpp"

// Flat `key = value` configuration files. Keys are dotted (`timing.lambda`);
// a `[section]` header prefixes the keys that follow it. `#` starts a comment.
//
//   [topology]
//   n = 100
//   e = 5
//   alpha = 0.5
//   beta = 0.5
//   # m and k default to round(beta * l) and round(alpha * m)
//
// Every key has a default equal to the reference experiment.
namespace ahfl {

struct SystemConfig {
  RunConfig run;
  double burn_in = 0.1;

  friend bool operator==(const SystemConfig& a, const SystemConfig& b);
};

/// Raw parsed entries with the line each came from.
struct ConfigEntry {
  std::string value;
  int line = 0;
};
using ConfigEntries = std::map<std::string, ConfigEntry>;

/// Tokenizes a config file. Throws ParseError on malformed lines or duplicate keys.
ConfigEntries parse_entries(std::string_view text);

/// Interprets entries as a SystemConfig. Keys under `ignored_sections` are
/// skipped; any other unknown key is a ParseError. Constraint violations throw
/// ValidationError.
SystemConfig config_from_entries(const ConfigEntries& entries,
                                 const std::vector<std::string>& ignored_sections = {});

SystemConfig parse_config(std::string_view text);
SystemConfig load_config(const std::filesystem::path& path);

/// Serializes every key, so parse_config(write_config(c)) == c.
std::string write_config(const SystemConfig& cfg);

/// Documented keys with their defaults, in file order.
std::vector<std::pair<std::string, std::string>> default_entries();

}  // namespace ahfl
