#ifndef PWHOM_CONFIG_HPP
#define PWHOM_CONFIG_HPP

#include <string>

#include "pwhom/benchmarks.hpp"

namespace pwh {

inline constexpr const char* kToolVersion = "pwhom 0.1.0";

// Loads a benchmark from a JSON config document: either a builtin id with
// optional overrides, or a fully custom coefficient set. Throws ConfigError
// with the offending field named.
Benchmark load_benchmark(const std::string& config_path);

// Serialized cell solution (matrices as nested [re, im] arrays).
std::string cell_solution_to_json(const CellSolution& sol);

struct RunManifest {
  std::string command;
  std::string config_path;
  std::uint64_t seed = 0;
  int threads = 1;
  std::string out_dir;
  std::string tool_version = kToolVersion;
  double wall_seconds = 0.0;
  std::vector<std::string> outputs;
};

// Serializes and writes the manifest atomically (temp file + rename).
void write_manifest(const std::string& path, const RunManifest& manifest);

}  // namespace pwh

#endif
