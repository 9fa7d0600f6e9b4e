#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace fairmeta {

struct ManifestInput {
  std::string path;
  std::string sha256;
};

/// Written as manifest.json next to the outputs of every pipeline run.
struct RunManifest {
  std::string timestamp;  // ISO-8601 UTC
  std::string command;
  std::vector<std::string> arguments;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> backend_config_digest;
  std::vector<ManifestInput> inputs;
  std::vector<std::string> outputs;  // relative to the manifest's directory
};

/// Current UTC time, or SOURCE_DATE_EPOCH when that variable is set so that
/// reruns can produce identical manifests.
std::string manifest_timestamp();

std::string file_sha256(const std::filesystem::path& path);

std::string manifest_to_json(const RunManifest& manifest);
RunManifest manifest_from_json(std::string_view text);

/// Writes <dir>/manifest.json, replacing any previous manifest there.
void write_manifest(const std::filesystem::path& dir, const RunManifest& manifest);
RunManifest read_manifest(const std::filesystem::path& dir);

}  // namespace fairmeta
