#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace padbench {

// hex-encoded SHA-256
std::string sha256_hex(const void* data, std::size_t size);
std::string sha256_hex(const std::vector<std::uint8_t>& bytes);
std::string sha256_hex(const std::string& text);

}  // namespace padbench
