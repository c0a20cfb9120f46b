#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace advprobe {

/// Lower-case hex SHA-256 of a byte string.
std::string sha256_hex(std::string_view bytes);

/// Lower-case hex SHA-256 of a file's contents. Throws InputError if the
/// file cannot be read.
std::string sha256_file(const std::filesystem::path& path);

/// Reads a whole file. Throws InputError on failure.
std::string read_file(const std::filesystem::path& path);

}  // namespace advprobe
