#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace modcomp {

/// Shortest decimal form that round-trips to the same double; "nan"/"inf"
/// for non-finite values.
std::string format_double(double v);

/// Writes to a sibling temporary file and renames it over `path`, creating
/// parent directories as needed.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

std::string read_file(const std::filesystem::path& path);

}  // namespace modcomp
