// Run manifests: the resolved configuration, seeds, timing and a digest
// inventory of every output file, written alongside the outputs so that a
// run can be audited and re-executed bit-for-bit from the manifest alone.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace nlse {

extern const char* kToolVersion;

struct OutputEntry {
  std::string path;  // relative to the output directory
  std::uint64_t bytes = 0;
  std::string sha256;
};

struct RunManifest {
  std::string command;           // subcommand plus arguments
  std::string config_resolved;   // JSON echo of the full configuration
  std::uint64_t seed = 0;
  double wall_clock_s = 0.0;
  std::vector<OutputEntry> outputs;
  std::vector<std::string> conventions;  // recorded normalization choices
};

/// Hex SHA-256 of a file's contents.  Throws on I/O failure.
std::string sha256_file(const std::string& path);

/// Scan the listed files (paths relative to dir), fill the inventory, and
/// write dir/manifest.json.  Returns the manifest text.
std::string write_manifest(const std::string& dir, RunManifest m,
                           const std::vector<std::string>& files);

/// The convention notes every manifest carries: the equation form the
/// integrator discretizes and the scalings the diagnostics assume.
std::vector<std::string> standard_conventions();

}  // namespace nlse
