#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace confls::cli {

/// Everything needed to replay a command: the fully defaulted flags in
/// order, plus a digest of every input file so a replay can detect drift.
struct RunManifest {
  std::string tool_version;
  std::string command;
  std::vector<std::pair<std::string, std::string>> flags;
  struct Input {
    std::string flag;
    std::string path;
    std::string digest;
  };
  std::vector<Input> inputs;
  std::vector<std::string> outputs;
  std::uint64_t seed = 0;

  /// argv-style arguments, starting with the command name.
  [[nodiscard]] std::vector<std::string> to_args() const;
};

std::string serialize_manifest(const RunManifest& manifest);
RunManifest parse_manifest(const std::string& text, const std::string& source);
void save_manifest(const RunManifest& manifest, const std::filesystem::path& path);
RunManifest load_manifest(const std::filesystem::path& path);

/// Digest of a file's bytes (FNV-1a 64, hex).
std::string file_digest(const std::filesystem::path& path);

}  // namespace confls::cli
