#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace memseize {

/// Structured parse failure carrying the byte/line offset where it occurred.
struct ParseError : std::runtime_error {
    std::size_t offset;
    ParseError(const std::string& msg, std::size_t off)
        : std::runtime_error(msg + " (at offset " + std::to_string(off) + ")"), offset(off) {}
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);

/// Shortest decimal form that round-trips through double.
std::string format_double(double v);

std::string read_file(const std::filesystem::path& path);

// All on-disk outputs go through temp-file + rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);
void write_binary_atomic(const std::filesystem::path& path, const void* data, std::size_t bytes);

}  // namespace memseize
