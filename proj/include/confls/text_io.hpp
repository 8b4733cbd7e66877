#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace confls {

/// Shortest decimal text that parses back to the identical double.
std::string format_double(double value);
/// Parses a full string as a double; throws DataError on trailing garbage.
double parse_double(std::string_view text);

/// Reads a whole file; throws DataError if it cannot be opened.
std::string read_file(const std::filesystem::path& path);
/// Truncates `path` (creating parent directories) and writes `contents`.
void write_file(const std::filesystem::path& path, std::string_view contents);
/// Splits on '\n', dropping a final empty segment and any trailing '\r'.
std::vector<std::string> split_lines(std::string_view text);

/// FNV-1a 64-bit digest rendered as 16 hex digits.
std::string fnv1a_hex(std::string_view data);

}  // namespace confls
