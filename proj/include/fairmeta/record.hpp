#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fairmeta {

enum class Source { BioSample, GEO };
enum class Cohort { Lung, Liver, Ovarian };
enum class Condition { Baseline, DD, CEDAR };

inline constexpr Source kAllSources[] = {Source::BioSample, Source::GEO};
inline constexpr Cohort kAllCohorts[] = {Cohort::Lung, Cohort::Liver, Cohort::Ovarian};
inline constexpr Condition kAllConditions[] = {Condition::Baseline, Condition::DD,
                                               Condition::CEDAR};

std::string_view to_string(Source source);
std::string_view to_string(Cohort cohort);
std::string_view to_string(Condition condition);

// Case-insensitive; throw FormatError on unknown names.
Source parse_source(std::string_view text);
Cohort parse_cohort(std::string_view text);
Condition parse_condition(std::string_view text);

/// One field-name/field-value pair. The name is always canonical; an empty
/// optional value is the explicit missing marker ("NA" in the source text).
struct FieldValuePair {
  std::string name;
  std::optional<std::string> value;

  /// Canonicalizes the name and trims the value. "NA" (any case) becomes the
  /// missing marker. Throws MalformedRecord if the name canonicalizes to "".
  static FieldValuePair make(std::string_view name, std::string_view value);

  bool missing() const noexcept { return !value.has_value(); }
  /// Value as text, with the missing marker rendered as "NA".
  std::string display_value() const;

  friend bool operator==(const FieldValuePair&, const FieldValuePair&) = default;
};

struct MetadataRecord {
  std::string id;
  Source source = Source::BioSample;
  std::vector<FieldValuePair> fields;
  std::optional<std::string> raw;
  // Processing annotations, e.g. "standardize:backend_failed".
  std::vector<std::string> flags;

  friend bool operator==(const MetadataRecord&, const MetadataRecord&) = default;
};

/// First pair whose canonical name matches canonical_field_name(name).
const FieldValuePair* find_field(const MetadataRecord& record, std::string_view name);

/// Value of the first matching pair ("NA" for the missing marker); nullopt
/// when the record has no such field.
std::optional<std::string> lookup_field(const MetadataRecord& record, std::string_view name);

struct Corpus {
  std::string name;
  Source source = Source::BioSample;
  Cohort cohort = Cohort::Lung;
  Condition condition = Condition::Baseline;
  std::optional<std::uint64_t> seed;
  std::vector<MetadataRecord> records;

  friend bool operator==(const Corpus&, const Corpus&) = default;
};

/// Throws FormatError when ids repeat or a record's source differs from the corpus.
void check_corpus(const Corpus& corpus);

/// Line-delimited form: a `#corpus {...}` header followed by one JSON object
/// per record.
std::string serialize_corpus(const Corpus& corpus);
Corpus deserialize_corpus(std::string_view text);

Corpus read_corpus_file(const std::filesystem::path& path);
void write_corpus_file(const std::filesystem::path& path, const Corpus& corpus);

}  // namespace fairmeta
