#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace spoofkit::text {

std::vector<std::string_view> split(std::string_view line, char sep);
std::string_view trim(std::string_view s);

/// Shortest decimal form that parses back to the identical double.
std::string format_double(double value);

/// Strict parse: the whole field must be consumed. Accepts "inf", "-inf".
bool parse_double(std::string_view field, double& out);
bool parse_u64(std::string_view field, std::uint64_t& out);

/// Splits into lines on '\n'; a trailing '\r' is not stripped.
std::vector<std::string_view> lines(std::string_view content);

std::string read_file(const std::filesystem::path& path);
/// Creates missing parent directories.
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace spoofkit::text
