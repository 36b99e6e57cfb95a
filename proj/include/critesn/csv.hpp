#pragma once

// Text output helpers. Every float leaves the library with 17 significant digits. //

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace critesn {

/// Shortest-safe round-trip text for a double (printf "%.17g").
std::string format_number(double v);

/// Comma separated numbers, 17 significant digits each.
std::string join_numbers(std::span<const double> values, std::string_view sep = ",");

/// Parses a comma separated list of doubles. Throws std::invalid_argument.
std::vector<double> parse_number_list(std::string_view text);

/// Parses a single double, rejecting trailing garbage. Throws std::invalid_argument.
double parse_number(std::string_view text);

/// Writes `content` verbatim (LF line endings are the caller's).
/// Throws std::runtime_error when the file cannot be written.
void write_text_file(const std::filesystem::path& path, std::string_view content);

}  // namespace critesn
