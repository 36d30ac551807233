#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace ddtool {

std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::filesystem::path& path);

struct FileDigest {
  std::string path;
  std::string sha256;
};

struct RunManifest {
  std::vector<std::string> command_line;
  nlohmann::json config = nlohmann::json::object();
  std::uint64_t master_seed = 0;
  std::string version;
  std::vector<FileDigest> inputs;
  std::vector<FileDigest> outputs;
  double wall_seconds = 0.0;
  int exit_code = 0;

  nlohmann::json to_json() const;
};

inline constexpr int kManifestVersion = 1;
inline constexpr const char* kManifestFile = "manifest.json";

/// Appends `run` to <dir>/manifest.json, creating it if needed. Existing runs
/// are never rewritten; a file that does not parse as a manifest is an error.
void append_manifest(const std::filesystem::path& dir, const RunManifest& run);

/// Parsed runs of <dir>/manifest.json.
std::vector<nlohmann::json> read_manifest(const std::filesystem::path& dir);

}  // namespace ddtool
