#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace charm {

/// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);
/// Strict parse of a whole token; throws ErrorKind::Data on failure.
double parse_double(std::string_view token);

std::string read_file(const std::filesystem::path& path);

/// Writes to a sibling temporary file, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace charm
