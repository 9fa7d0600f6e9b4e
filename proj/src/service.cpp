#include "fairmeta/service.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "fairmeta/errors.hpp"
#include "fairmeta/gold_labeler.hpp"
#include "fairmeta/manifest.hpp"
#include "fairmeta/text.hpp"
#include "http.hpp"

namespace fairmeta {

using ojson = nlohmann::ordered_json;

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::optional<std::string> canonical_or_absent(const std::optional<std::string>& value) {
  if (!value) return std::nullopt;
  return canonicalize(*value);
}

ojson optional_json(const std::optional<std::string>& value) {
  return value ? ojson(*value) : ojson(nullptr);
}

std::optional<std::string> field_value(const MetadataRecord& record, std::string_view name) {
  const FieldValuePair* pair = find_field(record, name);
  return pair ? pair->value : std::nullopt;
}

ojson record_json(const MetadataRecord& record) {
  ojson fields = ojson::array();
  for (const auto& pair : record.fields) {
    fields.push_back({{"name", pair.name}, {"value", optional_json(pair.value)}});
  }
  return {{"id", record.id}, {"source", to_string(record.source)}, {"fields", fields}};
}

ojson validation_json(const ValidationResult& result) {
  ojson out;
  out["conforms"] = result.conforms();
  out["violation"] = result.violation ? ojson(to_string(*result.violation)) : ojson(nullptr);
  return out;
}

std::string json_body(const ojson& doc) { return doc.dump(2) + "\n"; }

ServiceState::Response error_response(int status, const std::string& message) {
  ServiceState::Response response;
  response.status = status;
  response.body = json_body({{"error", message}, {"status", status}});
  return response;
}

std::optional<std::string> param(const std::multimap<std::string, std::string>& params,
                                 const std::string& name) {
  const auto it = params.find(name);
  if (it == params.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> parse_count(const std::string& text) {
  std::size_t value = 0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size()) return std::nullopt;
  return value;
}

}  // namespace

std::vector<FieldDiff> diff_versions(const std::map<Condition, MetadataRecord>& versions,
                                     std::span<const Condition> order,
                                     const MetadataTemplate* tpl) {
  std::vector<std::string> names;
  std::set<std::string> seen;
  for (Condition condition : order) {
    const auto it = versions.find(condition);
    if (it == versions.end()) continue;
    for (const auto& pair : it->second.fields) {
      if (seen.insert(pair.name).second) names.push_back(pair.name);
    }
  }

  std::vector<FieldDiff> diffs;
  for (const std::string& name : names) {
    FieldDiff diff;
    diff.field_name = name;
    std::set<std::optional<std::string>> distinct;
    for (Condition condition : order) {
      const auto it = versions.find(condition);
      if (it == versions.end()) continue;
      const FieldValuePair* pair = find_field(it->second, name);
      const std::optional<std::string> value = pair ? pair->value : std::nullopt;
      diff.values[condition] = value;
      distinct.insert(canonical_or_absent(value));
      if (tpl != nullptr) diff.validation[condition] = validate_optional_value(*tpl, name, value);
    }
    diff.changed = distinct.size() > 1;
    diffs.push_back(std::move(diff));
  }
  return diffs;
}

// ---------------------------------------------------------------------------

struct LoadedCorpus {
  Corpus corpus;
  std::optional<SearchIndex> canonical_index;
  std::optional<SearchIndex> strict_index;
  std::map<std::string, std::size_t> positions;  // id -> record index
  std::string file_hash;
};

struct CorpusGroup {
  std::string name;
  Source source = Source::BioSample;
  Cohort cohort = Cohort::Lung;
  std::map<Condition, LoadedCorpus> conditions;
  std::string hash;  // over the member files
};

struct ServiceData {
  std::map<std::string, CorpusGroup> groups;
  std::optional<MetadataTemplate> tpl;
  std::optional<std::string> latest_report;
  std::string latest_report_hash;
  std::string data_hash;
  std::optional<std::filesystem::path> ui_dir;

  ServiceState::Response corpora() const;
  ServiceState::Response search(const std::multimap<std::string, std::string>& params) const;
  ServiceState::Response record(const std::string& corpus, const std::string& id,
                                const std::multimap<std::string, std::string>& params) const;
};

ServiceState::ServiceState(std::unique_ptr<ServiceData> data) : data_(std::move(data)) {}
ServiceState::~ServiceState() = default;
ServiceState::ServiceState(ServiceState&&) noexcept = default;
ServiceState& ServiceState::operator=(ServiceState&&) noexcept = default;

ServiceState ServiceState::load(const std::filesystem::path& data_dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(data_dir)) throw Error("data directory not found: " + data_dir.string());
  auto data = std::make_unique<ServiceData>();

  std::vector<fs::path> files;
  if (fs::is_directory(data_dir / "corpora")) {
    for (const auto& entry : fs::directory_iterator(data_dir / "corpora")) {
      if (entry.is_regular_file() && entry.path().extension() == ".jsonl") files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());

  std::string all_hashes;
  for (const fs::path& file : files) {
    const std::string bytes = read_file(file);
    Corpus corpus;
    try {
      corpus = deserialize_corpus(bytes);
    } catch (const FormatError& e) {
      throw FormatError(file.string() + ": " + e.what());
    }
    CorpusGroup& group = data->groups[corpus.name];
    if (group.conditions.empty()) {
      group.name = corpus.name;
      group.source = corpus.source;
      group.cohort = corpus.cohort;
    } else if (group.source != corpus.source || group.cohort != corpus.cohort) {
      throw FormatError(fmt::format("{}: corpus '{}' mixes sources or cohorts", file.string(),
                                    corpus.name));
    }
    if (group.conditions.contains(corpus.condition)) {
      throw FormatError(fmt::format("{}: second {} file for corpus '{}'", file.string(),
                                    to_string(corpus.condition), corpus.name));
    }
    LoadedCorpus loaded;
    loaded.file_hash = sha256_hex(bytes);
    loaded.canonical_index = build_index(corpus, MatchMode::Canonical);
    loaded.strict_index = build_index(corpus, MatchMode::StrictCase);
    for (std::size_t i = 0; i < corpus.records.size(); ++i) loaded.positions[corpus.records[i].id] = i;
    loaded.corpus = std::move(corpus);
    all_hashes += loaded.file_hash;
    const Condition condition = loaded.corpus.condition;
    group.conditions.emplace(condition, std::move(loaded));
  }
  for (auto& [name, group] : data->groups) {
    std::string joined;
    for (const auto& [condition, loaded] : group.conditions) joined += loaded.file_hash;
    group.hash = sha256_hex(joined);
  }
  data->data_hash = sha256_hex(all_hashes);

  if (fs::is_regular_file(data_dir / "template.json")) {
    data->tpl = load_template(data_dir / "template.json");
  }

  // Latest report: newest manifest timestamp, ties broken by run directory name.
  std::optional<std::pair<std::string, fs::path>> newest;
  if (fs::is_directory(data_dir / "reports")) {
    for (const auto& entry : fs::directory_iterator(data_dir / "reports")) {
      if (!entry.is_directory() || !fs::is_regular_file(entry.path() / "report.json")) continue;
      std::string stamp;
      if (fs::is_regular_file(entry.path() / "manifest.json")) {
        stamp = read_manifest(entry.path()).timestamp;
      }
      const std::string key = stamp + '\x1f' + entry.path().filename().string();
      if (!newest || key > newest->first) newest.emplace(key, entry.path());
    }
  }
  if (newest) {
    data->latest_report = read_file(newest->second / "report.json");
    data->latest_report_hash = sha256_hex(*data->latest_report);
  }

  if (fs::is_directory(data_dir / "ui")) data->ui_dir = data_dir / "ui";
  return ServiceState(std::move(data));
}

std::optional<std::filesystem::path> ServiceState::ui_dir() const { return data_->ui_dir; }

ServiceState::Response ServiceState::get(const std::string& path,
                                         const std::multimap<std::string, std::string>& params) const {
  if (path == "/corpora") return data_->corpora();
  if (path == "/search") return data_->search(params);
  if (path == "/reports/latest") {
    if (!data_->latest_report) return error_response(404, "no evaluation report available");
    Response response;
    response.body = *data_->latest_report;
    response.corpus_hash = data_->latest_report_hash;
    return response;
  }
  constexpr std::string_view kRecords = "/records/";
  if (path.starts_with(kRecords)) {
    const std::string rest = path.substr(kRecords.size());
    const auto slash = rest.find('/');
    if (slash == std::string::npos || slash == 0 || slash + 1 == rest.size()) {
      return error_response(404, "expected /records/<corpus>/<id>");
    }
    return data_->record(rest.substr(0, slash), rest.substr(slash + 1), params);
  }
  return error_response(404, "no such endpoint: " + path);
}

ServiceState::Response ServiceData::corpora() const {
  ojson list = ojson::array();
  for (const auto& [name, group] : groups) {
    ojson conditions = ojson::array();
    std::size_t count = 0;
    for (const auto& [condition, loaded] : group.conditions) {
      conditions.push_back(to_string(condition));
      if (condition == Condition::Baseline || count == 0) count = loaded.corpus.records.size();
    }
    list.push_back({{"name", name},
                    {"source", to_string(group.source)},
                    {"cohort", to_string(group.cohort)},
                    {"conditions", conditions},
                    {"record_count", count}});
  }
  ServiceState::Response response;
  response.body = json_body(list);
  response.corpus_hash = data_hash;
  return response;
}

ServiceState::Response ServiceData::search(
    const std::multimap<std::string, std::string>& params) const {
  const auto corpus_name = param(params, "corpus");
  const auto condition_text = param(params, "condition");
  const auto q = param(params, "q");
  if (!corpus_name || !condition_text || !q) {
    return error_response(400, "search needs corpus, condition and q parameters");
  }
  const auto group = groups.find(*corpus_name);
  if (group == groups.end()) return error_response(404, "unknown corpus: " + *corpus_name);
  Condition condition;
  try {
    condition = parse_condition(*condition_text);
  } catch (const FormatError&) {
    return error_response(404, "unknown condition: " + *condition_text);
  }
  const auto loaded = group->second.conditions.find(condition);
  if (loaded == group->second.conditions.end()) {
    return error_response(404, fmt::format("corpus {} has no {} version", *corpus_name,
                                           to_string(condition)));
  }

  const bool strict = param(params, "strict_case").value_or("false") == "true";
  const MatchMode mode = strict ? MatchMode::StrictCase : MatchMode::Canonical;
  std::size_t offset = 0;
  std::size_t limit = 100;
  if (const auto text = param(params, "offset")) {
    const auto value = parse_count(*text);
    if (!value) return error_response(400, "offset must be a non-negative integer");
    offset = *value;
  }
  if (const auto text = param(params, "limit")) {
    const auto value = parse_count(*text);
    if (!value) return error_response(400, "limit must be a non-negative integer");
    limit = *value;
  }

  SearchQuery query;
  try {
    query = parse_query(*q, mode);
  } catch (const InvalidQuery& e) {
    return error_response(400, e.what());
  }
  const LoadedCorpus& target = loaded->second;
  const QueryResult result =
      execute_indexed(query, strict ? *target.strict_index : *target.canonical_index);

  const auto baseline = group->second.conditions.find(Condition::Baseline);
  ojson hits = ojson::array();
  for (std::size_t i = offset; i < result.retrieved_ids.size() && i < offset + limit; ++i) {
    const std::string& id = result.retrieved_ids[i];
    const MetadataRecord& record = target.corpus.records[target.positions.at(id)];
    ojson gold = nullptr;
    if (baseline != group->second.conditions.end()) {
      const auto pos = baseline->second.positions.find(id);
      if (pos != baseline->second.positions.end()) {
        gold = to_string(assign_tissue_label(baseline->second.corpus.records[pos->second]));
      }
    }
    hits.push_back({{"id", id}, {"tissue", optional_json(field_value(record, "tissue"))},
                    {"gold_label", gold}});
  }

  ojson body;
  body["corpus"] = *corpus_name;
  body["condition"] = to_string(condition);
  body["query"] = to_string(query);
  body["match_mode"] = strict ? "strict_case" : "canonical";
  body["total"] = result.retrieved_ids.size();
  body["offset"] = offset;
  body["limit"] = limit;
  body["retrieved_ids"] = result.retrieved_ids;
  body["hits"] = hits;
  ServiceState::Response response;
  response.body = json_body(body);
  response.corpus_hash = group->second.hash;
  return response;
}

ServiceState::Response ServiceData::record(
    const std::string& corpus_name, const std::string& id,
    const std::multimap<std::string, std::string>& params) const {
  const auto group = groups.find(corpus_name);
  if (group == groups.end()) return error_response(404, "unknown corpus: " + corpus_name);

  std::vector<Condition> order;
  if (const auto text = param(params, "conditions")) {
    for (const std::string& item : split(*text, ",")) {
      if (trim(item).empty()) continue;
      try {
        const Condition condition = parse_condition(trim(item));
        if (std::find(order.begin(), order.end(), condition) == order.end()) order.push_back(condition);
      } catch (const FormatError&) {
        return error_response(404, "unknown condition: " + trim(item));
      }
    }
  } else {
    for (const auto& [condition, loaded] : group->second.conditions) order.push_back(condition);
  }
  if (order.empty()) return error_response(404, "no conditions requested");

  PairedRecordView view;
  view.corpus = corpus_name;
  view.id = id;
  for (Condition condition : order) {
    const auto loaded = group->second.conditions.find(condition);
    if (loaded == group->second.conditions.end()) {
      return error_response(404, fmt::format("corpus {} has no {} version", corpus_name,
                                             to_string(condition)));
    }
    const auto pos = loaded->second.positions.find(id);
    if (pos == loaded->second.positions.end()) {
      return error_response(404, fmt::format("record {} is not in the {} version of {}", id,
                                             to_string(condition), corpus_name));
    }
    view.versions.emplace(condition, loaded->second.corpus.records[pos->second]);
  }
  view.field_diffs = diff_versions(view.versions, order, tpl ? &*tpl : nullptr);

  ojson body;
  body["corpus"] = view.corpus;
  body["id"] = view.id;
  body["conditions"] = ojson::array();
  for (Condition condition : order) body["conditions"].push_back(to_string(condition));
  body["versions"] = ojson::object();
  for (Condition condition : order) {
    body["versions"][std::string(to_string(condition))] = record_json(view.versions.at(condition));
  }
  body["field_diffs"] = ojson::array();
  for (const FieldDiff& diff : view.field_diffs) {
    ojson entry;
    entry["field_name"] = diff.field_name;
    entry["values"] = ojson::object();
    for (Condition condition : order) {
      entry["values"][std::string(to_string(condition))] = optional_json(diff.values.at(condition));
    }
    entry["changed"] = diff.changed;
    if (diff.validation.empty()) {
      entry["validation"] = nullptr;
    } else {
      entry["validation"] = ojson::object();
      for (Condition condition : order) {
        entry["validation"][std::string(to_string(condition))] =
            validation_json(diff.validation.at(condition));
      }
    }
    body["field_diffs"].push_back(std::move(entry));
  }
  ServiceState::Response response;
  response.body = json_body(body);
  response.corpus_hash = group->second.hash;
  return response;
}

// ---------------------------------------------------------------------------

std::pair<std::string, int> parse_listen_address(std::string_view text) {
  const auto colon = text.rfind(':');
  if (colon == std::string_view::npos || colon == 0) {
    throw Error("listen address must look like host:port, got '" + std::string(text) + "'");
  }
  int port = -1;
  const std::string_view digits = text.substr(colon + 1);
  const auto [end, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), port);
  if (ec != std::errc() || end != digits.data() + digits.size() || port < 0 || port > 65535) {
    throw Error("invalid port in listen address '" + std::string(text) + "'");
  }
  return {std::string(text.substr(0, colon)), port};
}

struct HttpService::Impl {
  Impl(ServiceState s, ServeOptions o) : state(std::move(s)), options(std::move(o)) {}

  ServiceState state;
  ServeOptions options;
  httplib::Server server;
  bool bound = false;
};

HttpService::HttpService(ServiceState state, ServeOptions options)
    : impl_(std::make_unique<Impl>(std::move(state), std::move(options))) {
  Impl& impl = *impl_;
  const std::string origin = impl.options.cors_origin;
  impl.server.set_default_headers({{"Access-Control-Allow-Origin", origin},
                                   {"Cache-Control", "no-store"}});
  if (const auto ui = impl.state.ui_dir()) impl.server.set_mount_point("/ui", ui->string());

  impl.server.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Methods", "GET, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.status = 204;
  });
  auto handler = [&impl](const httplib::Request& req, httplib::Response& res) {
    std::multimap<std::string, std::string> params(req.params.begin(), req.params.end());
    const ServiceState::Response response = impl.state.get(req.path, params);
    res.status = response.status;
    if (!response.corpus_hash.empty()) res.set_header("X-Corpus-Hash", response.corpus_hash);
    res.set_header("Access-Control-Expose-Headers", "X-Corpus-Hash");
    res.set_content(response.body, response.content_type + "; charset=utf-8");
  };
  impl.server.Get("/corpora", handler);
  impl.server.Get("/search", handler);
  impl.server.Get("/reports/latest", handler);
  impl.server.Get(R"(/records/.+)", handler);
}

HttpService::~HttpService() { stop(); }

int HttpService::bind() {
  Impl& impl = *impl_;
  int port = impl.options.port;
  if (port == 0) {
    port = impl.server.bind_to_any_port(impl.options.host);
    if (port < 0) throw Error("cannot bind to " + impl.options.host);
  } else if (!impl.server.bind_to_port(impl.options.host, port)) {
    throw Error(fmt::format("cannot listen on {}:{}", impl.options.host, port));
  }
  impl.bound = true;
  return port;
}

void HttpService::run() {
  if (!impl_->bound) throw Error("HttpService::run called before bind");
  impl_->server.listen_after_bind();
}

void HttpService::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

}  // namespace fairmeta
