#include "fairmeta/record.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <sstream>
#include <unordered_set>

#include "fairmeta/errors.hpp"
#include "fairmeta/text.hpp"

namespace fairmeta {

using json = nlohmann::ordered_json;

namespace {

constexpr std::string_view kHeaderPrefix = "#corpus ";

template <typename Enum, std::size_t N>
Enum parse_enum(std::string_view text, const Enum (&values)[N], std::string_view kind) {
  const std::string canon = canonicalize(text);
  for (Enum value : values) {
    if (canon == to_string(value)) return value;
  }
  throw FormatError("unknown " + std::string(kind) + " '" + std::string(text) + "'");
}

json field_to_json(const FieldValuePair& pair) {
  json out;
  out["name"] = pair.name;
  out["value"] = pair.value ? json(*pair.value) : json(nullptr);
  return out;
}

const json& require(const json& object, const char* key, std::size_t line) {
  auto it = object.find(key);
  if (it == object.end()) {
    throw FormatError(std::string("missing key '") + key + "'", line);
  }
  return *it;
}

std::string require_string(const json& object, const char* key, std::size_t line) {
  const json& value = require(object, key, line);
  if (!value.is_string()) {
    throw FormatError(std::string("key '") + key + "' must be a string", line);
  }
  return value.get<std::string>();
}

}  // namespace

std::string_view to_string(Source source) {
  switch (source) {
    case Source::BioSample: return "biosample";
    case Source::GEO: return "geo";
  }
  return "?";
}

std::string_view to_string(Cohort cohort) {
  switch (cohort) {
    case Cohort::Lung: return "lung";
    case Cohort::Liver: return "liver";
    case Cohort::Ovarian: return "ovarian";
  }
  return "?";
}

std::string_view to_string(Condition condition) {
  switch (condition) {
    case Condition::Baseline: return "baseline";
    case Condition::DD: return "dd";
    case Condition::CEDAR: return "cedar";
  }
  return "?";
}

Source parse_source(std::string_view text) { return parse_enum(text, kAllSources, "source"); }
Cohort parse_cohort(std::string_view text) { return parse_enum(text, kAllCohorts, "cohort"); }
Condition parse_condition(std::string_view text) {
  return parse_enum(text, kAllConditions, "condition");
}

FieldValuePair FieldValuePair::make(std::string_view name, std::string_view value) {
  FieldValuePair pair;
  pair.name = canonical_field_name(name);
  if (pair.name.empty()) {
    throw MalformedRecord("field name is empty");
  }
  if (!is_missing_marker(value)) {
    pair.value = trim(value);
  }
  return pair;
}

std::string FieldValuePair::display_value() const {
  return value ? *value : std::string(kMissingMarker);
}

const FieldValuePair* find_field(const MetadataRecord& record, std::string_view name) {
  const std::string canon = canonical_field_name(name);
  for (const auto& pair : record.fields) {
    if (pair.name == canon) return &pair;
  }
  return nullptr;
}

std::optional<std::string> lookup_field(const MetadataRecord& record, std::string_view name) {
  const FieldValuePair* pair = find_field(record, name);
  if (pair == nullptr) return std::nullopt;
  return pair->display_value();
}

void check_corpus(const Corpus& corpus) {
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < corpus.records.size(); ++i) {
    const auto& record = corpus.records[i];
    if (record.id.empty()) {
      throw FormatError("record has an empty id", i + 1);
    }
    if (!seen.insert(record.id).second) {
      throw FormatError("duplicate record id '" + record.id + "'", i + 1);
    }
    if (record.source != corpus.source) {
      throw FormatError("record '" + record.id + "' source differs from corpus source", i + 1);
    }
  }
}

std::string serialize_corpus(const Corpus& corpus) {
  check_corpus(corpus);
  std::ostringstream out;
  json header;
  header["name"] = corpus.name;
  header["source"] = to_string(corpus.source);
  header["cohort"] = to_string(corpus.cohort);
  header["condition"] = to_string(corpus.condition);
  if (corpus.seed) header["seed"] = *corpus.seed;
  out << kHeaderPrefix << header.dump() << '\n';

  for (const auto& record : corpus.records) {
    json line;
    line["id"] = record.id;
    line["source"] = to_string(record.source);
    line["cohort"] = to_string(corpus.cohort);
    line["condition"] = to_string(corpus.condition);
    json fields = json::array();
    for (const auto& pair : record.fields) fields.push_back(field_to_json(pair));
    line["fields"] = std::move(fields);
    if (record.raw) line["raw"] = *record.raw;
    if (!record.flags.empty()) line["flags"] = record.flags;
    out << line.dump() << '\n';
  }
  return out.str();
}

Corpus deserialize_corpus(std::string_view text) {
  Corpus corpus;
  std::unordered_set<std::string> ids;
  bool have_header = false;
  std::size_t line_number = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim(line).empty()) continue;

    json object;
    const bool is_header = line.starts_with(kHeaderPrefix);
    if (!is_header && !have_header) {
      throw FormatError("corpus file must begin with a '#corpus' header", line_number);
    }
    if (is_header && have_header) {
      throw FormatError("duplicate '#corpus' header", line_number);
    }
    try {
      object = json::parse(is_header ? line.substr(kHeaderPrefix.size()) : line);
    } catch (const json::parse_error& e) {
      throw FormatError(std::string("invalid JSON: ") + e.what(), line_number);
    }
    if (!object.is_object()) {
      throw FormatError("expected a JSON object", line_number);
    }

    try {
      if (is_header) {
        corpus.name = require_string(object, "name", line_number);
        corpus.source = parse_source(require_string(object, "source", line_number));
        corpus.cohort = parse_cohort(require_string(object, "cohort", line_number));
        corpus.condition = parse_condition(require_string(object, "condition", line_number));
        if (auto it = object.find("seed"); it != object.end()) {
          if (!it->is_number_unsigned()) throw FormatError("seed must be unsigned", line_number);
          corpus.seed = it->get<std::uint64_t>();
        }
        have_header = true;
        continue;
      }

      MetadataRecord record;
      record.id = require_string(object, "id", line_number);
      if (record.id.empty()) throw FormatError("empty id", line_number);
      record.source = parse_source(require_string(object, "source", line_number));
      if (record.source != corpus.source) {
        throw FormatError("record source differs from corpus header", line_number);
      }
      if (parse_cohort(require_string(object, "cohort", line_number)) != corpus.cohort ||
          parse_condition(require_string(object, "condition", line_number)) != corpus.condition) {
        throw FormatError("record cohort/condition differs from corpus header", line_number);
      }
      const json& fields = require(object, "fields", line_number);
      if (!fields.is_array()) throw FormatError("'fields' must be an array", line_number);
      for (const auto& field : fields) {
        if (!field.is_object()) throw FormatError("field entries must be objects", line_number);
        const std::string name = require_string(field, "name", line_number);
        const json& value = require(field, "value", line_number);
        if (value.is_null()) {
          FieldValuePair pair = FieldValuePair::make(name, kMissingMarker);
          record.fields.push_back(std::move(pair));
        } else if (value.is_string()) {
          record.fields.push_back(FieldValuePair::make(name, value.get<std::string>()));
        } else {
          throw FormatError("field value must be a string or null", line_number);
        }
      }
      if (auto it = object.find("raw"); it != object.end() && !it->is_null()) {
        if (!it->is_string()) throw FormatError("'raw' must be a string", line_number);
        record.raw = it->get<std::string>();
      }
      if (auto it = object.find("flags"); it != object.end()) {
        if (!it->is_array()) throw FormatError("'flags' must be an array", line_number);
        for (const auto& flag : *it) {
          if (!flag.is_string()) throw FormatError("flags must be strings", line_number);
          record.flags.push_back(flag.get<std::string>());
        }
      }
      if (!ids.insert(record.id).second) {
        throw FormatError("duplicate record id '" + record.id + "'", line_number);
      }
      corpus.records.push_back(std::move(record));
    } catch (const FormatError&) {
      throw;
    } catch (const Error& e) {
      throw FormatError(e.what(), line_number);
    }
  }
  if (!have_header) {
    throw FormatError("corpus file has no '#corpus' header", line_number == 0 ? 1 : line_number);
  }
  return corpus;
}

Corpus read_corpus_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open corpus file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return deserialize_corpus(buffer.str());
}

void write_corpus_file(const std::filesystem::path& path, const Corpus& corpus) {
  const std::string text = serialize_corpus(corpus);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write corpus file " + path.string());
  out << text;
}

}  // namespace fairmeta
