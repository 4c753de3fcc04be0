#ifndef PFBO_IO_HPP
#define PFBO_IO_HPP

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace pfbo::io {

/// Shortest-safe decimal form with 17 significant digits ("%.17g"); parses
/// back to the identical double.
std::string format_double(double value);

/// Writes `contents` to `path` through a temporary sibling and a rename, so
/// readers never observe a partially written file. Creates parent
/// directories as needed.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

/// Splits one CSV line on commas (no quoting; the files written here never
/// need it).
std::vector<std::string_view> split_csv_line(std::string_view line);

/// Full-string decimal parse; throws std::invalid_argument on trailing junk.
double parse_double(std::string_view text);

std::string read_file(const std::filesystem::path& path);

}  // namespace pfbo::io

#endif  // PFBO_IO_HPP
