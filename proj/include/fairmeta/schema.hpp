#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "fairmeta/record.hpp"

namespace fairmeta {

// ---------------------------------------------------------------------------
// Data dictionary: one "Name, Description, Value format" row per line, columns
// separated by an em-dash (U+2014).

struct DictionaryEntry {
  std::string field_name;
  std::string description;
  std::string value_format;

  friend bool operator==(const DictionaryEntry&, const DictionaryEntry&) = default;
};

struct DataDictionary {
  std::string name = "BioSample data dictionary";
  std::vector<DictionaryEntry> entries;

  const DictionaryEntry* find(std::string_view field_name) const;
};

/// Entries are separated by newlines; columns by an em-dash. The header row,
/// blank lines and "..." elisions are skipped, as are quotes wrapping a line.
/// Throws FormatError(entry index) for rows with fewer than three columns or
/// a repeated field name.
DataDictionary parse_data_dictionary(std::string_view text);
DataDictionary load_data_dictionary(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Templates.

enum class DataKind { Text, Integer, FloatWithUnit, Date };

std::string_view to_string(DataKind kind);

struct DataTypeConstraint {
  DataKind kind = DataKind::Text;
  friend bool operator==(const DataTypeConstraint&, const DataTypeConstraint&) = default;
};

struct ValueSetConstraint {
  std::vector<std::string> terms;  // canonical, deduplicated, non-empty
  friend bool operator==(const ValueSetConstraint&, const ValueSetConstraint&) = default;
};

/// Static snapshot of the permissible labels of one ontology branch.
struct OntologyBranchConstraint {
  std::string ontology;  // e.g. "UBERON"
  std::string label;     // display name used in prompts, e.g. "Uberon"
  std::vector<std::string> terms;
  friend bool operator==(const OntologyBranchConstraint&, const OntologyBranchConstraint&) = default;
};

using FieldConstraint = std::variant<DataTypeConstraint, ValueSetConstraint, OntologyBranchConstraint>;

/// Human-readable rule used in CEDAR prompts ("Must be from Uberon ontology").
std::string describe_constraint(const FieldConstraint& constraint);

struct TemplateField {
  std::string name;
  std::string description;
  FieldConstraint constraint;
  bool required = false;
};

struct MetadataTemplate {
  std::string name;
  std::vector<TemplateField> fields;

  const TemplateField* find(std::string_view field_name) const;
};

/// Template JSON: {name, fields: [{name, description, required, constraint}]}.
/// Throws FormatError on structural problems, EmptyTermList on empty term lists.
MetadataTemplate parse_template(std::string_view json_text);
MetadataTemplate load_template(const std::filesystem::path& path);

/// Copy of `source` keeping only the named fields, in template order.
MetadataTemplate restrict_template(const MetadataTemplate& source,
                                   const std::vector<std::string>& field_names,
                                   std::string name);

// ---------------------------------------------------------------------------
// Validation.

enum class Violation { UnknownField, TypeMismatch, NotInValueSet, NotInOntologyBranch, MissingRequired };

std::string_view to_string(Violation violation);

struct ValidationResult {
  std::optional<Violation> violation;

  bool conforms() const noexcept { return !violation.has_value(); }
  friend bool operator==(const ValidationResult&, const ValidationResult&) = default;
};

/// The missing marker ("NA") and empty values count as absent.
ValidationResult validate_value(const MetadataTemplate& tpl, std::string_view field_name,
                                std::string_view value);

/// Same, for a value that may be absent altogether.
ValidationResult validate_optional_value(const MetadataTemplate& tpl, std::string_view field_name,
                                         const std::optional<std::string>& value);

bool satisfies(const FieldConstraint& constraint, std::string_view value);

/// One result per template field (template order), then an UnknownField
/// result for each distinct record field the template does not define.
std::vector<std::pair<std::string, ValidationResult>> validate_record(const MetadataTemplate& tpl,
                                                                      const MetadataRecord& record);

}  // namespace fairmeta
