#pragma once

#include <chrono>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "fairmeta/schema.hpp"
#include "fairmeta/standardizer.hpp"

namespace fairmeta {

/// Deterministic stand-in for a model. It reads the record back out of the
/// prompt and applies the guidance mechanically:
///   - tissue values naming a disease from the template's disease branch are
///     moved to `disease`;
///   - under CEDAR, a non-conforming tissue value is mapped through the gold
///     keyword rules onto the matching ontology term ("PBMC" -> "blood");
///   - under DD, generic qualifiers are stripped from tissue values
///     ("whole blood" -> "blood");
///   - every guidance field is emitted, with NA when the record lacks it.
class RuleBackend final : public CompletionBackend {
 public:
  RuleBackend(MetadataTemplate tpl, DataDictionary dictionary, PromptAssets assets = {});

  std::string complete(const Prompt& prompt) override;

  /// Direct entry point: the corrected pairs for `pairs` under `condition`.
  std::vector<FieldValuePair> correct(const std::vector<FieldValuePair>& pairs,
                                      Condition condition) const;

 private:
  MetadataTemplate tpl_;
  DataDictionary dictionary_;
  PromptAssets assets_;
};

enum class ReplayMode { Strict, Capture };

/// Serves responses recorded under `<cache_dir>/<sha256(prompt text)>.txt`.
/// Strict mode fails on a cache miss; capture mode asks `inner` and records
/// the answer.
class ReplayBackend final : public CompletionBackend {
 public:
  ReplayBackend(std::filesystem::path cache_dir, ReplayMode mode,
                std::unique_ptr<CompletionBackend> inner = nullptr);

  std::string complete(const Prompt& prompt) override;
  bool concurrent_safe() const override;

  static std::string cache_key(const Prompt& prompt);

 private:
  std::filesystem::path cache_dir_;
  ReplayMode mode_;
  std::unique_ptr<CompletionBackend> inner_;
  std::mutex write_mutex_;
};

struct LiveBackendConfig {
  std::string endpoint;  // full URL of a chat-completions style endpoint
  std::string model;
  std::string api_key;   // sent as a bearer token when non-empty
  std::chrono::seconds timeout{120};
};

/// Chat-completion client: one user message, temperature 0, single choice.
/// Any non-200 response (including context-length rejections) is a BackendError.
class LiveBackend final : public CompletionBackend {
 public:
  explicit LiveBackend(LiveBackendConfig config);

  std::string complete(const Prompt& prompt) override;

  static std::string request_body(const LiveBackendConfig& config, const Prompt& prompt);
  static std::string parse_response(const std::string& body);

 private:
  LiveBackendConfig config_;
};

enum class BackendKind { Live, Replay, Rule };

/// Backend config file: {kind, endpoint?, model?, cache_path?, max_inflight,
/// mode?, inner?, template?, dictionary?, prompts?}. Relative paths resolve
/// against the config file's directory.
struct BackendConfig {
  BackendKind kind = BackendKind::Rule;
  std::string endpoint;
  std::string model;
  std::filesystem::path cache_path;
  std::size_t max_inflight = 4;
  ReplayMode mode = ReplayMode::Strict;
  std::shared_ptr<BackendConfig> inner;
  std::filesystem::path template_path;
  std::filesystem::path dictionary_path;
  std::filesystem::path prompts_path;
};

BackendConfig parse_backend_config(std::string_view json_text, const std::filesystem::path& base_dir);
BackendConfig load_backend_config(const std::filesystem::path& path);

/// Builds the backend. The rule backend falls back to `default_template` /
/// `default_dictionary` when the config names none. The live backend reads
/// its key from LLM_API_KEY.
std::unique_ptr<CompletionBackend> make_backend(const BackendConfig& config,
                                                const MetadataTemplate* default_template = nullptr,
                                                const DataDictionary* default_dictionary = nullptr,
                                                const PromptAssets& assets = {});

}  // namespace fairmeta
