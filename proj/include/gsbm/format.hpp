#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace gsbm {

/// Formats a double with `precision` significant digits (printf "%g"
/// style). A precision <= 0 selects the shortest representation that
/// round-trips exactly.
std::string format_number(double v, int precision = 17);

/// Writes `contents` to a sibling temporary file and renames it over
/// `path`. Throws IoError naming the path on failure.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace gsbm
