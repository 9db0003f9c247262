#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace sideseeing::detail {

// Shortest decimal that round-trips to the same double.
std::string format_double(double value);

std::vector<std::string_view> split(std::string_view line, char sep);

std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temporary file and renames it over the target, so
// readers observe either the old or the new complete content.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

void write_file(const std::filesystem::path& path, std::string_view content);

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

inline std::uint64_t fnv1a(std::string_view bytes, std::uint64_t hash = kFnvOffset) {
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= kFnvPrime;
  }
  return hash;
}

std::string to_hex(std::uint64_t value);

std::string to_lower(std::string_view text);

}  // namespace sideseeing::detail
