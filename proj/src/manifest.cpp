#include "fairmeta/manifest.hpp"

#include <fmt/chrono.h>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "fairmeta/errors.hpp"
#include "fairmeta/text.hpp"

namespace fairmeta {

std::string manifest_timestamp() {
  std::chrono::sys_seconds now;
  const char* epoch = std::getenv("SOURCE_DATE_EPOCH");
  if (epoch != nullptr && *epoch != '\0') {
    now = std::chrono::sys_seconds(std::chrono::seconds(std::stoll(epoch)));
  } else {
    now = std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());
  }
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(t));
}

std::string file_sha256(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return sha256_hex(buffer.str());
}

std::string manifest_to_json(const RunManifest& manifest) {
  nlohmann::ordered_json doc;
  doc["timestamp"] = manifest.timestamp;
  doc["command"] = manifest.command;
  doc["arguments"] = manifest.arguments;
  doc["seed"] = manifest.seed ? nlohmann::ordered_json(*manifest.seed) : nlohmann::ordered_json(nullptr);
  doc["backend_config_digest"] = manifest.backend_config_digest
                                     ? nlohmann::ordered_json(*manifest.backend_config_digest)
                                     : nlohmann::ordered_json(nullptr);
  doc["inputs"] = nlohmann::ordered_json::array();
  for (const auto& input : manifest.inputs) {
    doc["inputs"].push_back({{"path", input.path}, {"sha256", input.sha256}});
  }
  doc["outputs"] = manifest.outputs;
  return doc.dump(2) + "\n";
}

RunManifest manifest_from_json(std::string_view text) {
  try {
    const auto doc = nlohmann::json::parse(text);
    RunManifest manifest;
    manifest.timestamp = doc.at("timestamp").get<std::string>();
    manifest.command = doc.at("command").get<std::string>();
    manifest.arguments = doc.value("arguments", std::vector<std::string>{});
    if (doc.contains("seed") && !doc["seed"].is_null()) {
      manifest.seed = doc["seed"].get<std::uint64_t>();
    }
    if (doc.contains("backend_config_digest") && !doc["backend_config_digest"].is_null()) {
      manifest.backend_config_digest = doc["backend_config_digest"].get<std::string>();
    }
    for (const auto& input : doc.at("inputs")) {
      manifest.inputs.push_back({input.at("path").get<std::string>(),
                                 input.at("sha256").get<std::string>()});
    }
    manifest.outputs = doc.at("outputs").get<std::vector<std::string>>();
    return manifest;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("invalid manifest: ") + e.what());
  }
}

void write_manifest(const std::filesystem::path& dir, const RunManifest& manifest) {
  std::filesystem::create_directories(dir);
  std::ofstream out(dir / "manifest.json", std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + (dir / "manifest.json").string());
  out << manifest_to_json(manifest);
}

RunManifest read_manifest(const std::filesystem::path& dir) {
  std::ifstream in(dir / "manifest.json", std::ios::binary);
  if (!in) throw Error("no manifest in " + dir.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return manifest_from_json(buffer.str());
}

}  // namespace fairmeta
