#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>

namespace floqnet::io {

/// 17 significant digits, '.' decimal point, independent of the locale.
[[nodiscard]] std::string format_double(double v);

/// Comma-joined format_double of every value.
[[nodiscard]] std::string join_csv(std::span<const double> values);

/// Writes to a temporary file in the target directory, then renames it over
/// `path`. Throws ConfigError if the file cannot be written.
void write_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace floqnet::io
