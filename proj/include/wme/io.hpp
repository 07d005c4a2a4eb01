#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace wme::io {

/// Shortest decimal form that parses back to the same double.
std::string format_double(double value);

/// Strict parse: the whole field must be consumed.
bool parse_double(std::string_view text, double& out);
bool parse_int(std::string_view text, std::int64_t& out);

std::vector<std::string_view> split(std::string_view line, char sep = ',');
std::string_view trim(std::string_view text);

std::string read_file(const std::filesystem::path& path);

/// Writes to a sibling temp file and renames it over the target.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace wme::io
