#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace harvest::files {

std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temp file and renames it into place, so readers never
// observe a partial file.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view data);
std::string sha256_file_hex(const std::filesystem::path& path);

}  // namespace harvest::files
