#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace equivcheck::text {

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double value);

/// Parses a full field as a double; returns false on trailing garbage.
bool parse_double(std::string_view field, double& out);

std::vector<std::string_view> split(std::string_view line, char delim);
std::string_view trim(std::string_view s);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace equivcheck::text
