#pragma once

#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

namespace sschema {

// Parameter container: 16-byte header (8-byte ASCII magic, u32 version,
// u32 element count, both little-endian) followed by the values as
// little-endian IEEE doubles.
void save_doubles(const std::filesystem::path& path, std::string_view magic8,
                  std::uint32_t version, const std::vector<double>& values);

// Throws IoError on missing file or header mismatch (bad magic, version,
// or truncated payload).
std::vector<double> load_doubles(const std::filesystem::path& path,
                                 std::string_view magic8,
                                 std::uint32_t expect_version);

}  // namespace sschema
