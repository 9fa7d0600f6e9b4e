#include "fairmeta/backends.hpp"

#include <nlohmann/json.hpp>

#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_set>

#include "fairmeta/errors.hpp"
#include "fairmeta/gold_labeler.hpp"
#include "fairmeta/text.hpp"
#include "http.hpp"

namespace fairmeta {

using json = nlohmann::json;

namespace {

const std::unordered_set<std::string> kQualifierWords = {
    "tissue", "tissues", "sample", "samples", "specimen", "whole",
    "normal", "healthy", "primary", "adjacent", "human"};

const OntologyBranchConstraint* branch_for(const MetadataTemplate& tpl, std::string_view name) {
  const TemplateField* field = tpl.find(name);
  if (field == nullptr) return nullptr;
  return std::get_if<OntologyBranchConstraint>(&field->constraint);
}

bool has_term(const OntologyBranchConstraint* branch, std::string_view term) {
  if (branch == nullptr) return false;
  return std::find(branch->terms.begin(), branch->terms.end(), term) != branch->terms.end();
}

bool contains_words(std::string_view haystack, std::string_view needle) {
  std::size_t pos = 0;
  while ((pos = haystack.find(needle, pos)) != std::string_view::npos) {
    const bool left = pos == 0 || haystack[pos - 1] == ' ';
    const std::size_t end = pos + needle.size();
    const bool right = end == haystack.size() || haystack[end] == ' ';
    if (left && right) return true;
    ++pos;
  }
  return false;
}

// Longest disease term equal to or contained (on word boundaries) in `value`.
std::optional<std::string> match_disease(const OntologyBranchConstraint* diseases,
                                         std::string_view value) {
  if (diseases == nullptr) return std::nullopt;
  std::optional<std::string> best;
  for (const auto& term : diseases->terms) {
    if (contains_words(value, term) && (!best || term.size() > best->size())) best = term;
  }
  return best;
}

std::optional<std::string> ontology_term_for(TissueLabel label) {
  switch (label) {
    case TissueLabel::Lung: return "lung";
    case TissueLabel::Liver: return "liver";
    case TissueLabel::Ovary: return "ovary";
    case TissueLabel::Blood: return "blood";
    case TissueLabel::Plasma: return "blood plasma";
    case TissueLabel::Lymph: return "lymph node";
    case TissueLabel::Unknown: return std::nullopt;
  }
  return std::nullopt;
}

std::string strip_qualifiers(const std::string& canon) {
  std::vector<std::string> kept;
  for (const auto& word : split(canon, " ")) {
    if (!word.empty() && !kQualifierWords.contains(word)) kept.push_back(word);
  }
  std::string out;
  for (const auto& word : kept) {
    if (!out.empty()) out.push_back(' ');
    out += word;
  }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& value) {
  if (value.empty()) return {};
  std::filesystem::path path(value);
  return path.is_absolute() ? path : base / path;
}

}  // namespace

// ---------------------------------------------------------------------------

RuleBackend::RuleBackend(MetadataTemplate tpl, DataDictionary dictionary, PromptAssets assets)
    : tpl_(std::move(tpl)), dictionary_(std::move(dictionary)), assets_(std::move(assets)) {}

std::vector<FieldValuePair> RuleBackend::correct(const std::vector<FieldValuePair>& pairs,
                                                 Condition condition) const {
  if (condition == Condition::Baseline) return pairs;

  std::map<std::string, std::optional<std::string>> values;
  for (const auto& pair : pairs) values.try_emplace(pair.name, pair.value);

  const OntologyBranchConstraint* tissues = branch_for(tpl_, "tissue");
  const OntologyBranchConstraint* diseases = branch_for(tpl_, "disease");

  if (auto it = values.find("tissue"); it != values.end() && it->second) {
    const std::string original = *it->second;
    const std::string canon = canonicalize(original);
    const std::optional<std::string> disease = match_disease(diseases, canon);
    auto& disease_slot = values["disease"];
    if (disease && !disease_slot) disease_slot = *disease;

    std::optional<std::string> tissue = original;
    if (condition == Condition::CEDAR) {
      if (has_term(tissues, canon)) {
        tissue = canon;
      } else if (auto term = ontology_term_for(label_tissue_value(canon)); term && has_term(tissues, *term)) {
        tissue = *term;
      } else if (disease) {
        tissue.reset();
      }
    } else {
      if (disease) {
        tissue.reset();
      } else if (std::string stripped = strip_qualifiers(canon); !stripped.empty() && stripped != canon) {
        tissue = stripped;
      }
    }
    values["tissue"] = tissue;
  }

  if (condition == Condition::CEDAR) {
    for (const auto& field : tpl_.fields) {
      auto it = values.find(field.name);
      if (it == values.end() || !it->second) continue;
      const std::string canon = canonicalize(*it->second);
      if (!std::holds_alternative<DataTypeConstraint>(field.constraint) &&
          satisfies(field.constraint, canon)) {
        it->second = canon;
      }
    }
  }

  std::vector<std::string> order;
  if (condition == Condition::CEDAR) {
    for (const auto& field : tpl_.fields) order.push_back(field.name);
  } else {
    for (const auto& entry : dictionary_.entries) order.push_back(entry.field_name);
  }
  std::unordered_set<std::string> guided(order.begin(), order.end());

  std::vector<FieldValuePair> out;
  for (const auto& name : order) {
    auto it = values.find(name);
    FieldValuePair pair{name, std::nullopt};
    if (it != values.end()) pair.value = it->second;
    out.push_back(std::move(pair));
  }
  std::unordered_set<std::string> emitted;
  for (const auto& pair : pairs) {
    if (guided.contains(pair.name) || !emitted.insert(pair.name).second) continue;
    out.push_back({pair.name, values[pair.name]});
  }
  return out;
}

std::string RuleBackend::complete(const Prompt& prompt) {
  const std::optional<std::string> inline_record = extract_record_inline(prompt.text, assets_);
  if (!inline_record) throw BackendError("rule backend: prompt does not contain a record");
  const std::vector<FieldValuePair> corrected =
      correct(parse_record_inline(*inline_record), prompt.condition);
  std::string out;
  for (const auto& pair : corrected) {
    out += pair.name + ": " + pair.display_value() + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------

ReplayBackend::ReplayBackend(std::filesystem::path cache_dir, ReplayMode mode,
                             std::unique_ptr<CompletionBackend> inner)
    : cache_dir_(std::move(cache_dir)), mode_(mode), inner_(std::move(inner)) {
  if (mode_ == ReplayMode::Capture && !inner_) {
    throw Error("replay capture mode needs an inner backend");
  }
}

std::string ReplayBackend::cache_key(const Prompt& prompt) { return sha256_hex(prompt.text); }

bool ReplayBackend::concurrent_safe() const {
  return mode_ == ReplayMode::Strict || inner_->concurrent_safe();
}

std::string ReplayBackend::complete(const Prompt& prompt) {
  const std::filesystem::path file = cache_dir_ / (cache_key(prompt) + ".txt");
  if (std::filesystem::exists(file)) return read_file(file);
  if (mode_ == ReplayMode::Strict) {
    throw BackendError("replay cache miss for record " + prompt.record_id);
  }
  std::string response = inner_->complete(prompt);
  std::lock_guard lock(write_mutex_);
  std::filesystem::create_directories(cache_dir_);
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  out << response;
  return response;
}

// ---------------------------------------------------------------------------

LiveBackend::LiveBackend(LiveBackendConfig config) : config_(std::move(config)) {
  if (config_.endpoint.empty()) throw Error("live backend needs an endpoint");
}

std::string LiveBackend::request_body(const LiveBackendConfig& config, const Prompt& prompt) {
  json body;
  body["model"] = config.model;
  body["temperature"] = 0;
  body["n"] = 1;
  body["messages"] = json::array({json{{"role", "user"}, {"content", prompt.text}}});
  return body.dump();
}

std::string LiveBackend::parse_response(const std::string& body) {
  try {
    const json document = json::parse(body);
    return document.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    throw BackendError(std::string("unexpected completion response: ") + e.what());
  }
}

std::string LiveBackend::complete(const Prompt& prompt) {
  const auto [base, path] = detail::split_url(config_.endpoint);
  httplib::Client client(base);
  client.set_connection_timeout(std::chrono::seconds(10));
  client.set_read_timeout(config_.timeout);
  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);
  auto response = client.Post(path, headers, request_body(config_, prompt), "application/json");
  if (!response) {
    throw BackendError("completion request failed: " + httplib::to_string(response.error()));
  }
  if (response->status != 200) {
    throw BackendError("completion endpoint returned HTTP " + std::to_string(response->status) +
                       ": " + response->body.substr(0, 200));
  }
  return parse_response(response->body);
}

// ---------------------------------------------------------------------------

BackendConfig parse_backend_config(std::string_view json_text, const std::filesystem::path& base_dir) {
  json document;
  try {
    document = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("backend config is not valid JSON: ") + e.what());
  }
  if (!document.is_object()) throw FormatError("backend config must be an object");
  BackendConfig config;
  const std::string kind = document.value("kind", "");
  if (kind == "live") {
    config.kind = BackendKind::Live;
  } else if (kind == "replay") {
    config.kind = BackendKind::Replay;
  } else if (kind == "rule") {
    config.kind = BackendKind::Rule;
  } else {
    throw FormatError("backend kind must be live, replay or rule");
  }
  config.endpoint = document.value("endpoint", "");
  config.model = document.value("model", "");
  config.cache_path = resolve(base_dir, document.value("cache_path", ""));
  const auto inflight = document.value("max_inflight", 4);
  if (inflight < 1) throw FormatError("max_inflight must be positive");
  config.max_inflight = static_cast<std::size_t>(inflight);
  const std::string mode = document.value("mode", "strict");
  if (mode == "strict") {
    config.mode = ReplayMode::Strict;
  } else if (mode == "capture") {
    config.mode = ReplayMode::Capture;
  } else {
    throw FormatError("replay mode must be strict or capture");
  }
  if (document.contains("inner")) {
    config.inner = std::make_shared<BackendConfig>(
        parse_backend_config(document["inner"].dump(), base_dir));
  }
  config.template_path = resolve(base_dir, document.value("template", ""));
  config.dictionary_path = resolve(base_dir, document.value("dictionary", ""));
  config.prompts_path = resolve(base_dir, document.value("prompts", ""));
  if (config.kind == BackendKind::Live && config.endpoint.empty()) {
    throw FormatError("live backend config needs an endpoint");
  }
  if (config.kind == BackendKind::Replay && config.cache_path.empty()) {
    throw FormatError("replay backend config needs cache_path");
  }
  return config;
}

BackendConfig load_backend_config(const std::filesystem::path& path) {
  return parse_backend_config(read_file(path), path.parent_path());
}

std::unique_ptr<CompletionBackend> make_backend(const BackendConfig& config,
                                                const MetadataTemplate* default_template,
                                                const DataDictionary* default_dictionary,
                                                const PromptAssets& assets) {
  switch (config.kind) {
    case BackendKind::Rule: {
      MetadataTemplate tpl;
      if (!config.template_path.empty()) {
        tpl = load_template(config.template_path);
      } else if (default_template != nullptr) {
        tpl = *default_template;
      } else {
        throw Error("rule backend needs a template");
      }
      DataDictionary dictionary;
      if (!config.dictionary_path.empty()) {
        dictionary = load_data_dictionary(config.dictionary_path);
      } else if (default_dictionary != nullptr) {
        dictionary = *default_dictionary;
      }
      return std::make_unique<RuleBackend>(std::move(tpl), std::move(dictionary), assets);
    }
    case BackendKind::Replay: {
      std::unique_ptr<CompletionBackend> inner;
      if (config.inner) inner = make_backend(*config.inner, default_template, default_dictionary, assets);
      return std::make_unique<ReplayBackend>(config.cache_path, config.mode, std::move(inner));
    }
    case BackendKind::Live: {
      LiveBackendConfig live;
      live.endpoint = config.endpoint;
      live.model = config.model;
      if (const char* key = std::getenv("LLM_API_KEY")) live.api_key = key;
      return std::make_unique<LiveBackend>(std::move(live));
    }
  }
  throw Error("unknown backend kind");
}

}  // namespace fairmeta
