#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fairmeta/record.hpp"
#include "fairmeta/schema.hpp"
#include "fairmeta/search.hpp"

namespace fairmeta {

struct FieldDiff {
  std::string field_name;
  std::map<Condition, std::optional<std::string>> values;
  bool changed = false;
  std::map<Condition, ValidationResult> validation;  // empty without a template
};

struct PairedRecordView {
  std::string corpus;
  std::string id;
  std::map<Condition, MetadataRecord> versions;
  std::vector<FieldDiff> field_diffs;
};

/// Field diffs over the given versions: fields in order of first appearance,
/// `changed` when the canonical values differ. An absent field and the
/// missing marker compare equal.
std::vector<FieldDiff> diff_versions(const std::map<Condition, MetadataRecord>& versions,
                                     std::span<const Condition> order,
                                     const MetadataTemplate* tpl);

// Data directory layout:
//   corpora/*.jsonl               corpus files; a corpus name groups its conditions
//   reports/<run>/report.json     evaluation runs, each with a manifest.json
//   template.json                 optional, enables per-field validation
//   ui/                           optional static assets served under /ui
struct ServiceData;

/// Immutable state loaded once at startup.
class ServiceState {
 public:
  static ServiceState load(const std::filesystem::path& data_dir);
  ~ServiceState();
  ServiceState(ServiceState&&) noexcept;
  ServiceState& operator=(ServiceState&&) noexcept;

  struct Response {
    int status = 200;
    std::string content_type = "application/json";
    std::string body;
    std::string corpus_hash;
  };

  /// Routes a GET request. `path` excludes the query string.
  Response get(const std::string& path, const std::multimap<std::string, std::string>& params) const;

  std::optional<std::filesystem::path> ui_dir() const;

 private:
  explicit ServiceState(std::unique_ptr<ServiceData> data);
  std::unique_ptr<ServiceData> data_;
};

struct ServeOptions {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::string cors_origin = "*";
};

/// HTTP front end over a ServiceState. Handlers run on a thread pool and only
/// read the shared state.
class HttpService {
 public:
  HttpService(ServiceState state, ServeOptions options);
  ~HttpService();

  /// Binds the socket; returns the bound port. Throws Error on failure.
  int bind();
  /// Serves until stop() is called. bind() must have succeeded.
  void run();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Parses "host:port". Throws Error on malformed input.
std::pair<std::string, int> parse_listen_address(std::string_view text);

}  // namespace fairmeta
