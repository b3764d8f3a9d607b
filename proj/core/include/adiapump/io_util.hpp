#pragma once

#include <cstdint>
#include <string>

namespace adiapump {

/// Shortest round-trip decimal for a double (%.17g trimmed); deterministic
/// across runs, used everywhere a number lands in a data file.
std::string format_double(double v);

/// FNV-1a 64-bit over bytes; stamps configs and models.
std::uint64_t fnv1a64(const std::string& bytes);
std::string hash_hex(const std::string& bytes);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace adiapump
