#include "fairmeta/standardizer.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <fstream>
#include <sstream>
#include <thread>

#include "fairmeta/errors.hpp"
#include "fairmeta/text.hpp"

namespace fairmeta {

using json = nlohmann::ordered_json;

namespace {

constexpr std::string_view kInlineSeparator = " \xE2\x80\x94 ";
constexpr std::string_view kGuidanceSeparator = " \xE2\x80\x94 ";
constexpr std::size_t kMaxFieldNameLength = 64;

std::string replace_all(std::string text, std::string_view from, std::string_view to) {
  std::size_t pos = 0;
  while ((pos = text.find(from, pos)) != std::string::npos) {
    text.replace(pos, from.size(), to);
    pos += to.size();
  }
  return text;
}

std::string join(const std::vector<std::string>& parts, std::string_view separator) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += separator;
    out += parts[i];
  }
  return out;
}

bool plausible_field_name(std::string_view name) {
  if (name.empty() || name.size() > kMaxFieldNameLength) return false;
  return std::all_of(name.begin(), name.end(), [](char c) {
    const auto u = static_cast<unsigned char>(c);
    return std::isalnum(u) || c == ' ' || c == '_' || c == '-' || c == '.' || c == '(' ||
           c == ')' || c == '/' || c == '!' || c == '#' || u >= 0x80;
  });
}

// Removes list bullets and markdown emphasis around a model output line.
std::string clean_output_line(std::string_view raw) {
  std::string line = trim(raw);
  for (std::string_view bullet : {"- ", "* ", "\xE2\x80\xA2 "}) {
    if (line.starts_with(bullet)) {
      line = trim(std::string_view(line).substr(bullet.size()));
      break;
    }
  }
  line.erase(std::remove(line.begin(), line.end(), '`'), line.end());
  line = replace_all(line, "**", "");
  return trim(line);
}

// Position of the earliest " <known>:" inside `value`, with the name length.
std::optional<std::pair<std::size_t, std::size_t>> find_embedded_field(
    std::string_view value, const std::vector<std::string>& known_names) {
  const std::string lower = [&] {
    std::string out(value);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
  }();
  std::optional<std::pair<std::size_t, std::size_t>> best;
  for (const auto& name : known_names) {
    if (name.empty()) continue;
    std::size_t pos = 0;
    while ((pos = lower.find(name, pos)) != std::string::npos) {
      const std::size_t end = pos + name.size();
      const bool boundary = pos > 0 && std::isspace(static_cast<unsigned char>(lower[pos - 1]));
      if (boundary && end < lower.size() && lower[end] == ':') {
        if (!best || pos < best->first || (pos == best->first && name.size() > best->second)) {
          best = std::make_pair(pos, name.size());
        }
        break;
      }
      ++pos;
    }
  }
  return best;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::vector<std::string> guidance_names(const Guidance& guidance, Condition condition) {
  std::vector<std::string> names;
  if (condition == Condition::DD && guidance.dictionary != nullptr) {
    for (const auto& entry : guidance.dictionary->entries) names.push_back(entry.field_name);
  }
  if (condition == Condition::CEDAR && guidance.tpl != nullptr) {
    for (const auto& field : guidance.tpl->fields) names.push_back(field.name);
  }
  return names;
}

}  // namespace

PromptAssets load_prompt_assets(const std::filesystem::path& path) {
  json document;
  try {
    document = json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("prompt assets are not valid JSON: ") + e.what());
  }
  PromptAssets assets;
  auto take = [&](const char* key, std::string& slot) {
    if (auto it = document.find(key); it != document.end()) {
      if (!it->is_string()) throw FormatError(std::string("prompt asset '") + key + "' must be a string");
      slot = it->get<std::string>();
    }
  };
  take("version", assets.version);
  take("dd_instruction", assets.dd_instruction);
  take("dd_header", assets.dd_header);
  take("cedar_instruction", assets.cedar_instruction);
  take("cedar_header", assets.cedar_header);
  take("response_rules", assets.response_rules);
  take("retry_reminder", assets.retry_reminder);
  return assets;
}

std::string prompt_assets_to_json(const PromptAssets& assets) {
  json document;
  document["version"] = assets.version;
  document["dd_instruction"] = assets.dd_instruction;
  document["dd_header"] = assets.dd_header;
  document["cedar_instruction"] = assets.cedar_instruction;
  document["cedar_header"] = assets.cedar_header;
  document["response_rules"] = assets.response_rules;
  document["retry_reminder"] = assets.retry_reminder;
  return document.dump(2) + "\n";
}

std::string render_record_inline(const MetadataRecord& record) {
  std::vector<std::string> parts;
  parts.reserve(record.fields.size());
  for (const auto& pair : record.fields) parts.push_back(pair.name + ":" + pair.display_value());
  return join(parts, kInlineSeparator);
}

std::vector<FieldValuePair> parse_record_inline(std::string_view inline_text) {
  std::vector<FieldValuePair> pairs;
  if (trim(inline_text).empty()) return pairs;
  for (const std::string& piece : split(inline_text, kInlineSeparator)) {
    const std::size_t colon = piece.find(':');
    if (colon == std::string::npos) continue;
    const std::string name = canonical_field_name(piece.substr(0, colon));
    if (name.empty()) continue;
    pairs.push_back(FieldValuePair::make(name, piece.substr(colon + 1)));
  }
  return pairs;
}

std::string render_dictionary(const DataDictionary& dictionary, const PromptAssets& assets) {
  std::vector<std::string> blocks{assets.dd_header};
  for (const auto& entry : dictionary.entries) {
    blocks.push_back(entry.field_name + std::string(kGuidanceSeparator) + entry.description +
                     std::string(kGuidanceSeparator) + entry.value_format);
  }
  return join(blocks, "\n\n");
}

std::string render_template(const MetadataTemplate& tpl, const PromptAssets& assets) {
  std::vector<std::string> blocks{assets.cedar_header};
  for (const auto& field : tpl.fields) {
    blocks.push_back(field.name + std::string(kGuidanceSeparator) + field.description +
                     std::string(kGuidanceSeparator) + describe_constraint(field.constraint));
  }
  return join(blocks, "\n\n");
}

Prompt build_prompt(const MetadataRecord& record, Condition condition, const Guidance& guidance,
                    const PromptAssets& assets) {
  std::string instruction;
  std::string guidance_block;
  switch (condition) {
    case Condition::Baseline:
      throw MissingGuidance("the baseline condition has no prompt");
    case Condition::DD:
      if (guidance.dictionary == nullptr) throw MissingGuidance("DD prompting needs a data dictionary");
      instruction = replace_all(assets.dd_instruction, "{dictionary}", guidance.dictionary->name);
      guidance_block = render_dictionary(*guidance.dictionary, assets);
      break;
    case Condition::CEDAR:
      if (guidance.tpl == nullptr) throw MissingGuidance("CEDAR prompting needs a template");
      instruction = assets.cedar_instruction;
      guidance_block = render_template(*guidance.tpl, assets);
      break;
  }
  instruction = replace_all(instruction, "{record}", render_record_inline(record));

  Prompt prompt;
  prompt.record_id = record.id;
  prompt.condition = condition;
  prompt.guidance_digest = sha256_hex(guidance_block);
  prompt.text = instruction + "\n\n\"" + guidance_block + "\"\n\n" + assets.response_rules;
  return prompt;
}

std::optional<std::string> extract_record_inline(std::string_view prompt_text,
                                                 const PromptAssets& assets) {
  for (const std::string* instruction : {&assets.dd_instruction, &assets.cedar_instruction}) {
    const std::size_t slot = instruction->find("{record}");
    if (slot == std::string::npos) continue;
    const std::string_view prefix = std::string_view(*instruction).substr(0, slot);
    std::string_view suffix = std::string_view(*instruction).substr(slot + 8);
    if (std::size_t next = suffix.find('{'); next != std::string_view::npos) {
      suffix = suffix.substr(0, next);
    }
    if (!prompt_text.starts_with(prefix)) continue;
    const std::size_t begin = prefix.size();
    const std::size_t end = suffix.empty() ? prompt_text.find('\n', begin)
                                           : prompt_text.find(suffix, begin);
    if (end == std::string_view::npos) continue;
    return std::string(prompt_text.substr(begin, end - begin));
  }
  return std::nullopt;
}

MetadataRecord parse_model_output(std::string_view text, const std::vector<std::string>& known_names) {
  MetadataRecord record;
  std::vector<std::string> names;
  for (const auto& name : known_names) names.push_back(canonical_field_name(name));

  for (const std::string& raw_line : split(text, "\n")) {
    std::string rest = clean_output_line(raw_line);
    while (true) {
      const std::size_t colon = rest.find(':');
      if (colon == std::string::npos) break;
      const std::string name = canonical_field_name(rest.substr(0, colon));
      std::string value = trim(std::string_view(rest).substr(colon + 1));
      if (!plausible_field_name(name) || value.empty()) break;

      std::string remainder;
      if (!names.empty()) {
        if (auto embedded = find_embedded_field(value, names)) {
          remainder = value.substr(embedded->first);
          value = trim(std::string_view(value).substr(0, embedded->first));
        }
      }
      record.fields.push_back(FieldValuePair::make(name, value));
      if (remainder.empty()) break;
      rest = std::move(remainder);
    }
  }
  if (record.fields.empty()) {
    throw ParseFailed("model output contains no `name: value` lines");
  }
  return record;
}

std::string_view to_string(OutcomeStatus status) {
  switch (status) {
    case OutcomeStatus::Corrected: return "corrected";
    case OutcomeStatus::ParseFailed: return "parse_failed";
    case OutcomeStatus::BackendFailed: return "backend_failed";
  }
  return "?";
}

namespace {

StandardizationOutcome standardize_one(const MetadataRecord& record, Condition condition,
                                       CompletionBackend& backend, const Guidance& guidance,
                                       const StandardizeOptions& options) {
  StandardizationOutcome outcome;
  outcome.record_id = record.id;

  std::vector<std::string> known = guidance_names(guidance, condition);
  for (const auto& pair : record.fields) known.push_back(pair.name);

  Prompt prompt = build_prompt(record, condition, guidance, options.assets);
  for (int attempt = 1; attempt <= 2; ++attempt) {
    std::string response;
    outcome.attempts = attempt;
    try {
      response = backend.complete(prompt);
    } catch (const std::exception& e) {
      outcome.status = OutcomeStatus::BackendFailed;
      outcome.message = e.what();
      return outcome;
    }
    try {
      MetadataRecord corrected = parse_model_output(response, known);
      corrected.id = record.id;
      corrected.source = record.source;
      outcome.status = OutcomeStatus::Corrected;
      outcome.corrected = std::move(corrected);
      outcome.message.clear();
      return outcome;
    } catch (const Error& e) {
      outcome.status = OutcomeStatus::ParseFailed;
      outcome.message = e.what();
    }
    prompt.text += "\n\n" + options.assets.retry_reminder;
  }
  return outcome;
}

}  // namespace

BatchResult standardize_batch(const Corpus& corpus, Condition condition, CompletionBackend& backend,
                              const Guidance& guidance, const StandardizeOptions& options) {
  BatchResult result;
  result.corpus = corpus;
  result.corpus.condition = condition;
  const std::size_t n = corpus.records.size();
  result.outcomes.resize(n);

  if (condition == Condition::Baseline) {
    for (std::size_t i = 0; i < n; ++i) {
      auto& outcome = result.outcomes[i];
      outcome.record_id = corpus.records[i].id;
      outcome.status = OutcomeStatus::Corrected;
      outcome.corrected = corpus.records[i];
      outcome.attempts = 0;
    }
    return result;
  }
  // Surface missing guidance once, before any backend call.
  if (condition == Condition::DD && guidance.dictionary == nullptr) {
    throw MissingGuidance("DD prompting needs a data dictionary");
  }
  if (condition == Condition::CEDAR && guidance.tpl == nullptr) {
    throw MissingGuidance("CEDAR prompting needs a template");
  }

  const std::size_t workers =
      backend.concurrent_safe() ? std::clamp<std::size_t>(options.max_inflight, 1, std::max<std::size_t>(n, 1)) : 1;
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      result.outcomes[i] = standardize_one(corpus.records[i], condition, backend, guidance, options);
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }

  for (std::size_t i = 0; i < n; ++i) {
    auto& outcome = result.outcomes[i];
    auto& slot = result.corpus.records[i];
    if (outcome.status == OutcomeStatus::Corrected) {
      slot = *outcome.corrected;
    } else {
      slot.flags.emplace_back(outcome.status == OutcomeStatus::BackendFailed ? kFlagBackendFailed
                                                                             : kFlagParseFailed);
    }
  }
  return result;
}

std::string outcomes_to_jsonl(const std::vector<StandardizationOutcome>& outcomes) {
  std::string out;
  for (const auto& outcome : outcomes) {
    json line;
    line["id"] = outcome.record_id;
    line["status"] = to_string(outcome.status);
    line["attempts"] = outcome.attempts;
    line["message"] = outcome.message;
    out += line.dump() + "\n";
  }
  return out;
}

}  // namespace fairmeta
