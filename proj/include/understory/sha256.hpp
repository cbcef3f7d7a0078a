#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

namespace understory {

// FIPS 180-4 SHA-256, hex-encoded. Used for the pipeline manifest so output
// drift is visible at a glance.
std::string sha256_hex(const void* data, std::size_t size);
std::string sha256_hex(const std::string& data);
std::string sha256_file_hex(const std::filesystem::path& path);

} // namespace understory
