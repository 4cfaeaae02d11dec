#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ahfl::io {

/// Writes to `<path>.tmp` then renames over `path`, so readers never observe a
/// partially written file. Parent directories are created as needed.
void write_atomic(const std::filesystem::path& path, std::string_view contents);

std::string read_file(const std::filesystem::path& path);

/// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

using KeyValues = std::vector<std::pair<std::string, std::string>>;

/// `key: value` per line.
std::string format_summary(const KeyValues& kv);
KeyValues parse_summary(std::string_view text);

std::vector<std::string> split(std::string_view s, char sep);
std::string_view trim(std::string_view s);

}  // namespace ahfl::io
