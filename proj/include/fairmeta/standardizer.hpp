#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fairmeta/record.hpp"
#include "fairmeta/schema.hpp"

namespace fairmeta {

/// Fixed prompt wording. `{record}` and `{dictionary}` are substituted.
struct PromptAssets {
  std::string version = "v1";
  std::string dd_instruction =
      "Convert the record: \"{record}\" to the format given by the {dictionary}:";
  std::string dd_header = "Name \xE2\x80\x94 Description \xE2\x80\x94 Value format";
  std::string cedar_instruction =
      "Convert the record: \"{record}\" to the format given by the CEDAR template";
  std::string cedar_header = "Name \xE2\x80\x94 Description \xE2\x80\x94 Comments";
  std::string response_rules =
      "Respond with one line per field in the form `name: value`. Use NA for fields without a value.";
  std::string retry_reminder = "Respond only as `name: value` lines.";

  friend bool operator==(const PromptAssets&, const PromptAssets&) = default;
};

/// Reads a prompt asset JSON file; keys missing from the file keep defaults.
PromptAssets load_prompt_assets(const std::filesystem::path& path);
std::string prompt_assets_to_json(const PromptAssets& assets);

struct Guidance {
  const DataDictionary* dictionary = nullptr;
  const MetadataTemplate* tpl = nullptr;
};

struct Prompt {
  std::string text;
  std::string record_id;
  Condition condition = Condition::DD;
  std::string guidance_digest;  // sha256 of the rendered guidance block
};

/// `name:value` pairs joined by a spaced em-dash (U+2014), in record order.
std::string render_record_inline(const MetadataRecord& record);

/// Parses the inline rendering back into pairs (used by the rule backend).
std::vector<FieldValuePair> parse_record_inline(std::string_view inline_text);

std::string render_dictionary(const DataDictionary& dictionary, const PromptAssets& assets = {});
std::string render_template(const MetadataTemplate& tpl, const PromptAssets& assets = {});

/// Throws MissingGuidance for Baseline, or when the condition's guidance is absent.
Prompt build_prompt(const MetadataRecord& record, Condition condition, const Guidance& guidance,
                    const PromptAssets& assets = {});

/// Recovers the inline record from a prompt built with `assets`; nullopt if
/// the prompt does not have that shape.
std::optional<std::string> extract_record_inline(std::string_view prompt_text,
                                                 const PromptAssets& assets = {});

/// Each `name: value` line becomes a pair; other lines are ignored. When
/// `known_names` is given, a value that contains " <known name>:" is split
/// into further pairs (models sometimes put several fields on one line).
/// Throws ParseFailed if no pair is found.
MetadataRecord parse_model_output(std::string_view text,
                                  const std::vector<std::string>& known_names = {});

// ---------------------------------------------------------------------------

class CompletionBackend {
 public:
  virtual ~CompletionBackend() = default;
  /// Throws BackendError (or any std::exception) on failure.
  virtual std::string complete(const Prompt& prompt) = 0;
  /// Whether complete() may be called from several threads at once.
  virtual bool concurrent_safe() const { return true; }
};

enum class OutcomeStatus { Corrected, ParseFailed, BackendFailed };

std::string_view to_string(OutcomeStatus status);

struct StandardizationOutcome {
  std::string record_id;
  OutcomeStatus status = OutcomeStatus::Corrected;
  std::optional<MetadataRecord> corrected;
  int attempts = 0;
  std::string message;
};

struct StandardizeOptions {
  std::size_t max_inflight = 4;
  PromptAssets assets;
};

struct BatchResult {
  Corpus corpus;
  std::vector<StandardizationOutcome> outcomes;
};

inline constexpr std::string_view kFlagBackendFailed = "standardize:backend_failed";
inline constexpr std::string_view kFlagParseFailed = "standardize:parse_failed";

/// One outcome per input record, in input order. Failed records are copied
/// unchanged into the output corpus with a flag. Baseline makes no backend
/// calls and returns the input unchanged.
BatchResult standardize_batch(const Corpus& corpus, Condition condition, CompletionBackend& backend,
                              const Guidance& guidance, const StandardizeOptions& options = {});

/// Outcomes as JSON lines: {id, status, attempts, message}.
std::string outcomes_to_jsonl(const std::vector<StandardizationOutcome>& outcomes);

}  // namespace fairmeta
