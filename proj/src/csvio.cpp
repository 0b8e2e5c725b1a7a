#include "vixexp/csvio.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <sstream>

#include "vixexp/error.hpp"

namespace vixexp {

std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(Errc::io, "cannot write '" + path + "'");
    f << content;
    if (!f) throw Error(Errc::io, "write failed for '" + path + "'");
}

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error(Errc::io, "cannot read '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    char buf[32];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

void RunManifest::emit(const std::string& path, const std::string& content) {
    write_file(path, content);
    outputs.push_back({path, hex64(fnv1a64(content)), content.size()});
}

std::string RunManifest::to_json() const {
    nlohmann::json j;
    j["command"] = command;
    j["argv"] = argv;
    j["config"] = config;
    j["seeds"] = seeds;
    j["threads"] = threads;
    j["version"] = kVersion;
    j["timestamp"] = timestamp;
    j["outputs"] = nlohmann::json::array();
    for (auto& o : outputs) j["outputs"].push_back({{"path", o.path}, {"fnv1a64", o.fnv1a64}, {"bytes", o.bytes}});
    return j.dump(2);
}

std::string utc_timestamp() {
    std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace vixexp
