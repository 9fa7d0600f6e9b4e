#include "fairmeta/schema.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <fstream>
#include <regex>
#include <sstream>
#include <unordered_set>

#include "fairmeta/errors.hpp"
#include "fairmeta/text.hpp"

namespace fairmeta {

using json = nlohmann::json;

namespace {

constexpr std::string_view kEmDash = "\xE2\x80\x94";

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::string strip_wrapping_quotes(std::string text) {
  text = trim(text);
  if (!text.empty() && text.front() == '"') text.erase(0, 1);
  if (!text.empty() && text.back() == '"') text.pop_back();
  return trim(text);
}

std::vector<std::string> canonical_terms(const json& terms, std::size_t field_index) {
  if (!terms.is_array()) throw FormatError("'terms' must be an array", field_index);
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  for (const auto& term : terms) {
    if (!term.is_string()) throw FormatError("terms must be strings", field_index);
    std::string canon = canonicalize(term.get<std::string>());
    if (canon.empty()) continue;
    if (seen.insert(canon).second) out.push_back(std::move(canon));
  }
  if (out.empty()) {
    throw EmptyTermList("template field #" + std::to_string(field_index) + " has no terms");
  }
  return out;
}

FieldConstraint parse_constraint(const json& object, std::size_t field_index) {
  if (!object.is_object()) throw FormatError("constraint must be an object", field_index);
  const std::string kind = object.value("kind", "");
  if (kind == "data_type") {
    const std::string type = canonicalize(object.value("type", "text"));
    for (DataKind candidate : {DataKind::Text, DataKind::Integer, DataKind::FloatWithUnit, DataKind::Date}) {
      if (type == to_string(candidate)) return DataTypeConstraint{candidate};
    }
    throw FormatError("unknown data type '" + type + "'", field_index);
  }
  if (kind == "value_set") {
    if (!object.contains("terms")) throw EmptyTermList("value_set without terms");
    return ValueSetConstraint{canonical_terms(object.at("terms"), field_index)};
  }
  if (kind == "ontology_branch") {
    OntologyBranchConstraint branch;
    branch.ontology = object.value("ontology", "");
    if (branch.ontology.empty()) throw FormatError("ontology_branch needs 'ontology'", field_index);
    branch.label = object.value("label", branch.ontology);
    if (!object.contains("terms")) throw EmptyTermList("ontology_branch without terms");
    branch.terms = canonical_terms(object.at("terms"), field_index);
    return branch;
  }
  throw FormatError("unknown constraint kind '" + kind + "'", field_index);
}

bool is_valid_date(std::string_view value) {
  static const std::regex pattern(R"(^(\d{4})(?:-(\d{2})(?:-(\d{2}))?)?$)");
  std::match_results<std::string_view::const_iterator> m;
  if (!std::regex_match(value.begin(), value.end(), m, pattern)) return false;
  const int year = std::stoi(m[1].str());
  if (!m[2].matched) return true;
  const unsigned month = static_cast<unsigned>(std::stoi(m[2].str()));
  if (month < 1 || month > 12) return false;
  if (!m[3].matched) return true;
  const unsigned day = static_cast<unsigned>(std::stoi(m[3].str()));
  return std::chrono::year_month_day{std::chrono::year{year}, std::chrono::month{month},
                                     std::chrono::day{day}}
      .ok();
}

bool contains(const std::vector<std::string>& terms, std::string_view value) {
  return std::find(terms.begin(), terms.end(), value) != terms.end();
}

}  // namespace

// ---------------------------------------------------------------------------

const DictionaryEntry* DataDictionary::find(std::string_view field_name) const {
  const std::string canon = canonical_field_name(field_name);
  for (const auto& entry : entries) {
    if (entry.field_name == canon) return &entry;
  }
  return nullptr;
}

DataDictionary parse_data_dictionary(std::string_view text) {
  DataDictionary dictionary;
  std::unordered_set<std::string> names;
  std::size_t index = 0;
  for (const std::string& raw_line : split(text, "\n")) {
    const std::string line = strip_wrapping_quotes(raw_line);
    if (line.empty() || line == "..." || line == "\xE2\x80\xA6") continue;
    std::vector<std::string> columns = split(line, kEmDash);
    for (auto& column : columns) column = trim(column);
    if (columns.size() >= 2 && canonicalize(columns[0]) == "name" &&
        canonicalize(columns[1]) == "description") {
      continue;  // header row
    }
    ++index;
    if (columns.size() < 3) {
      throw FormatError("dictionary entry needs three em-dash separated columns", index);
    }
    DictionaryEntry entry;
    entry.field_name = canonical_field_name(columns.front());
    entry.value_format = columns.back();
    for (std::size_t i = 1; i + 1 < columns.size(); ++i) {
      if (i > 1) entry.description += " \xE2\x80\x94 ";
      entry.description += columns[i];
    }
    if (entry.field_name.empty()) throw FormatError("dictionary entry has no name", index);
    if (!names.insert(entry.field_name).second) {
      throw FormatError("duplicate dictionary field '" + entry.field_name + "'", index);
    }
    dictionary.entries.push_back(std::move(entry));
  }
  return dictionary;
}

DataDictionary load_data_dictionary(const std::filesystem::path& path) {
  return parse_data_dictionary(read_file(path));
}

// ---------------------------------------------------------------------------

std::string_view to_string(DataKind kind) {
  switch (kind) {
    case DataKind::Text: return "text";
    case DataKind::Integer: return "integer";
    case DataKind::FloatWithUnit: return "float_with_unit";
    case DataKind::Date: return "date";
  }
  return "?";
}

std::string describe_constraint(const FieldConstraint& constraint) {
  if (const auto* type = std::get_if<DataTypeConstraint>(&constraint)) {
    switch (type->kind) {
      case DataKind::Text: return "{text}";
      case DataKind::Integer: return "{integer}";
      case DataKind::FloatWithUnit: return "{float}{unit}";
      case DataKind::Date: return "{date}";
    }
  }
  if (const auto* set = std::get_if<ValueSetConstraint>(&constraint)) {
    std::string out = "Must be one of: ";
    for (std::size_t i = 0; i < set->terms.size(); ++i) {
      if (i > 0) out += ", ";
      out += set->terms[i];
    }
    return out;
  }
  const auto& branch = std::get<OntologyBranchConstraint>(constraint);
  return "Must be from " + branch.label + " ontology";
}

const TemplateField* MetadataTemplate::find(std::string_view field_name) const {
  const std::string canon = canonical_field_name(field_name);
  for (const auto& field : fields) {
    if (field.name == canon) return &field;
  }
  return nullptr;
}

MetadataTemplate parse_template(std::string_view json_text) {
  json document;
  try {
    document = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("template is not valid JSON: ") + e.what());
  }
  if (!document.is_object()) throw FormatError("template must be a JSON object");

  MetadataTemplate tpl;
  tpl.name = document.value("name", "");
  if (!document.contains("fields") || !document["fields"].is_array()) {
    throw FormatError("template needs a 'fields' array");
  }
  std::unordered_set<std::string> names;
  std::size_t index = 0;
  for (const auto& item : document["fields"]) {
    ++index;
    if (!item.is_object()) throw FormatError("template fields must be objects", index);
    TemplateField field;
    field.name = canonical_field_name(item.value("name", ""));
    if (field.name.empty()) throw FormatError("template field without a name", index);
    if (!names.insert(field.name).second) {
      throw FormatError("duplicate template field '" + field.name + "'", index);
    }
    field.description = item.value("description", "");
    field.required = item.value("required", false);
    if (!item.contains("constraint")) throw FormatError("template field without a constraint", index);
    field.constraint = parse_constraint(item["constraint"], index);
    tpl.fields.push_back(std::move(field));
  }
  if (tpl.fields.empty()) throw FormatError("template has no fields");
  return tpl;
}

MetadataTemplate load_template(const std::filesystem::path& path) {
  return parse_template(read_file(path));
}

MetadataTemplate restrict_template(const MetadataTemplate& source,
                                   const std::vector<std::string>& field_names, std::string name) {
  std::unordered_set<std::string> keep;
  for (const auto& field_name : field_names) keep.insert(canonical_field_name(field_name));
  MetadataTemplate out;
  out.name = std::move(name);
  for (const auto& field : source.fields) {
    if (keep.contains(field.name)) out.fields.push_back(field);
  }
  if (out.fields.empty()) throw FormatError("restricted template has no fields");
  return out;
}

// ---------------------------------------------------------------------------

std::string_view to_string(Violation violation) {
  switch (violation) {
    case Violation::UnknownField: return "UnknownField";
    case Violation::TypeMismatch: return "TypeMismatch";
    case Violation::NotInValueSet: return "NotInValueSet";
    case Violation::NotInOntologyBranch: return "NotInOntologyBranch";
    case Violation::MissingRequired: return "MissingRequired";
  }
  return "?";
}

bool satisfies(const FieldConstraint& constraint, std::string_view value) {
  const std::string canon = canonicalize(value);
  if (const auto* type = std::get_if<DataTypeConstraint>(&constraint)) {
    switch (type->kind) {
      case DataKind::Text:
        return !canon.empty();
      case DataKind::Integer: {
        static const std::regex pattern(R"(^[+-]?\d+$)");
        return std::regex_match(canon, pattern);
      }
      case DataKind::FloatWithUnit: {
        static const std::regex pattern(
            R"(^[+-]?(\d+(\.\d*)?|\.\d+)(e[+-]?\d+)?( ?[a-z%][a-z0-9%/._^-]*)?$)");
        return std::regex_match(canon, pattern);
      }
      case DataKind::Date:
        return is_valid_date(canon);
    }
    return false;
  }
  if (const auto* set = std::get_if<ValueSetConstraint>(&constraint)) {
    return contains(set->terms, canon);
  }
  return contains(std::get<OntologyBranchConstraint>(constraint).terms, canon);
}

ValidationResult validate_optional_value(const MetadataTemplate& tpl, std::string_view field_name,
                                         const std::optional<std::string>& value) {
  const TemplateField* field = tpl.find(field_name);
  if (field == nullptr) return {Violation::UnknownField};
  if (!value || is_missing_marker(*value) || trim(*value).empty()) {
    if (field->required) return {Violation::MissingRequired};
    return {};
  }
  if (satisfies(field->constraint, *value)) return {};
  if (std::holds_alternative<DataTypeConstraint>(field->constraint)) return {Violation::TypeMismatch};
  if (std::holds_alternative<ValueSetConstraint>(field->constraint)) return {Violation::NotInValueSet};
  return {Violation::NotInOntologyBranch};
}

ValidationResult validate_value(const MetadataTemplate& tpl, std::string_view field_name,
                                std::string_view value) {
  return validate_optional_value(tpl, field_name, std::string(value));
}

std::vector<std::pair<std::string, ValidationResult>> validate_record(const MetadataTemplate& tpl,
                                                                      const MetadataRecord& record) {
  std::vector<std::pair<std::string, ValidationResult>> results;
  for (const auto& field : tpl.fields) {
    const FieldValuePair* pair = find_field(record, field.name);
    std::optional<std::string> value;
    if (pair != nullptr) value = pair->value;
    results.emplace_back(field.name, validate_optional_value(tpl, field.name, value));
  }
  std::unordered_set<std::string> reported;
  for (const auto& pair : record.fields) {
    if (tpl.find(pair.name) == nullptr && reported.insert(pair.name).second) {
      results.emplace_back(pair.name, ValidationResult{Violation::UnknownField});
    }
  }
  return results;
}

}  // namespace fairmeta
