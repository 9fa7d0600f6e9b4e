#pragma once

#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "fairmeta/record.hpp"

namespace fairmeta {

enum class MatchMode {
  Canonical,   // compare trimmed, lowercased, whitespace-collapsed values
  StrictCase,  // compare the stored (trimmed) bytes with the query bytes
};

struct SearchQuery {
  std::string field;  // canonical
  std::string value;  // canonical, or trimmed only under MatchMode::StrictCase

  friend bool operator==(const SearchQuery&, const SearchQuery&) = default;
};

std::string to_string(const SearchQuery& query);

struct QueryResult {
  SearchQuery query;
  std::string corpus_name;
  std::vector<std::string> retrieved_ids;  // corpus order, no duplicates
};

/// Splits at the first colon. Throws InvalidQuery when there is no colon or
/// either side is empty.
SearchQuery parse_query(std::string_view text, MatchMode mode = MatchMode::Canonical);

/// Reference linear scan: a record matches when its first field with the
/// query's name holds a non-missing value equal to the query value. No
/// partial matching, stemming, or synonym expansion.
QueryResult execute(const SearchQuery& query, const Corpus& corpus,
                    MatchMode mode = MatchMode::Canonical);

/// Inverted index over (field, value) of each record's first occurrence of a
/// field. Immutable once built.
class SearchIndex {
 public:
  explicit SearchIndex(const Corpus& corpus, MatchMode mode = MatchMode::Canonical);

  QueryResult execute(const SearchQuery& query) const;

  const std::string& corpus_name() const noexcept { return corpus_name_; }
  MatchMode mode() const noexcept { return mode_; }

 private:
  static std::string key(std::string_view field, std::string_view value);

  std::string corpus_name_;
  MatchMode mode_;
  std::vector<std::string> ids_;
  std::unordered_map<std::string, std::vector<std::size_t>> postings_;
};

SearchIndex build_index(const Corpus& corpus, MatchMode mode = MatchMode::Canonical);
QueryResult execute_indexed(const SearchQuery& query, const SearchIndex& index);

}  // namespace fairmeta
