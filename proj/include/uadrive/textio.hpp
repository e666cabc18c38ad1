#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

// Small text helpers shared by every file format in the project.
namespace uadrive::textio {

/// Shortest decimal with 9 significant digits ("%.9g").
std::string format_sig9(double v);
/// Round-trip exact decimal ("%.17g").
std::string format_exact(double v);
/// Like format_sig9 but always carries a decimal point ("100.0").
std::string format_decimal(double v);

/// The value that survives a format_sig9 / parse round trip.
double quantize9(double v);

/// Strict parse; throws Error(MalformedRow) on trailing garbage or empty input.
double parse_double(std::string_view text);
long long parse_int(std::string_view text);

std::vector<std::string_view> split(std::string_view text, char sep);
std::string_view trim(std::string_view text);

/// Git blob object id: hex SHA-1 of "blob <size>\0" + content.
std::string content_digest(std::string_view content);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace uadrive::textio
