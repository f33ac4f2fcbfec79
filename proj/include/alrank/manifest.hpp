#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace alrank {

/// Provenance record written next to every CLI output.
struct RunManifest {
  std::string command;
  std::string config_hash;  // sha256 of the canonical resolved config
  std::uint64_t seed = 0;
  std::vector<std::string> input_paths;
  std::vector<std::string> output_paths;
  std::string engine_version = ALRANK_VERSION;
  std::string settings;  // human-readable summary of the resolved defaults
  std::string config_json;  // canonical resolved config the hash covers
};

std::string sha256_hex(std::string_view data);
/// sha256 of a file's bytes.
std::string file_digest(const std::filesystem::path& path);

/// Writes `content` to `path` through a temporary file and rename.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string manifest_json(const RunManifest& manifest);
void write_manifest(const std::filesystem::path& path, const RunManifest& manifest);

}  // namespace alrank
