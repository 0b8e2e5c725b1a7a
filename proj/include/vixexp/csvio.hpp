#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace vixexp {

inline constexpr const char* kVersion = "vixexp 1.0.0";

std::uint64_t fnv1a64(std::string_view data);
std::string hex64(std::uint64_t v);

// Writes the whole file or throws an io error.
void write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

// Shortest round-trip decimal form; "nan" for NaN.
std::string fmt(double v);

struct OutputRecord {
    std::string path;
    std::string fnv1a64;
    std::size_t bytes;
};

struct RunManifest {
    std::string command;
    std::vector<std::string> argv;
    nlohmann::json config = nlohmann::json::object();
    std::vector<std::uint64_t> seeds;
    int threads = 1;
    std::string timestamp;  // UTC, ISO 8601
    std::vector<OutputRecord> outputs;

    // Writes content to path and records its checksum.
    void emit(const std::string& path, const std::string& content);
    std::string to_json() const;
};

std::string utc_timestamp();

}  // namespace vixexp
