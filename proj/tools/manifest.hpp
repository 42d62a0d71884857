#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "clvboost/dataset.hpp"
#include "clvboost/version.hpp"

namespace clvboost::tools {

inline std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ull;
  for (const unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ull;
  }
  return hash;
}

inline std::string hex64(std::uint64_t value) {
  char buf[19];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(value));
  return std::string(buf);
}

/// Run provenance written next to every command's outputs. Output files in
/// JSON format point back at it through a "manifest" key; CSV outputs are
/// referenced from the manifest's output list instead.
struct Manifest {
  std::string command;
  std::map<std::string, std::string> parameters;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> input_digests;
  std::vector<std::string> outputs;
  double wall_time_ms = 0.0;

  void add_input(const std::string& path) {
    input_digests[path] = hex64(fnv1a64(read_file(path)));
  }

  std::string to_json() const {
    nlohmann::json j;
    j["command"] = command;
    j["parameters"] = parameters;
    j["seed"] = seed;
    j["inputs"] = input_digests;
    j["outputs"] = outputs;
    j["tool_version"] = kVersion;
    j["wall_time_ms"] = wall_time_ms;
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char stamp[32];
    std::strftime(stamp, sizeof(stamp), "%FT%TZ", std::gmtime(&t));
    j["timestamp"] = stamp;
    return j.dump(2) + "\n";
  }
};

}  // namespace clvboost::tools
