#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "fairmeta/evaluation.hpp"

namespace fairmeta {

// An evaluation suite file is a small TOML subset: `[table]` headers and
// `key = "string"` or `key = integer` lines, `#` comments.
//
//   [suite]
//   name = "fixture"
//   averaging = "macro"          # or "micro"
//   match_mode = "canonical"     # or "strict_case"
//
//   [corpora.biosample.lung]
//   baseline = "corpora/biosample_lung.baseline.jsonl"
//   dd = "corpora/biosample_lung.dd.jsonl"
//   cedar = "corpora/biosample_lung.cedar.jsonl"
//
//   [queries]                     # optional per-cohort override
//   liver = "tissue:liver, tissue:blood"
struct EvaluationSuite {
  std::string name;
  std::filesystem::path base_dir;
  EvaluationOptions options;
  std::map<CorpusKey, std::filesystem::path> corpora;  // resolved against base_dir
};

EvaluationSuite parse_suite(std::string_view text, const std::filesystem::path& base_dir);
EvaluationSuite load_suite(const std::filesystem::path& path);

/// Reads every corpus listed in the suite and checks each one's header
/// matches its grid position.
CorpusGrid load_suite_corpora(const EvaluationSuite& suite);

}  // namespace fairmeta
