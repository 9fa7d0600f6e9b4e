#include "fairmeta/search.hpp"

#include <unordered_set>

#include "fairmeta/errors.hpp"
#include "fairmeta/text.hpp"

namespace fairmeta {

namespace {

std::string match_form(std::string_view value, MatchMode mode) {
  return mode == MatchMode::Canonical ? canonicalize(value) : trim(value);
}

}  // namespace

std::string to_string(const SearchQuery& query) { return query.field + ":" + query.value; }

SearchQuery parse_query(std::string_view text, MatchMode mode) {
  const std::size_t colon = text.find(':');
  if (colon == std::string_view::npos) {
    throw InvalidQuery("query must have the form field:value");
  }
  SearchQuery query{canonical_field_name(text.substr(0, colon)),
                    match_form(text.substr(colon + 1), mode)};
  if (query.field.empty() || query.value.empty()) {
    throw InvalidQuery("query field and value must both be non-empty");
  }
  return query;
}

QueryResult execute(const SearchQuery& query, const Corpus& corpus, MatchMode mode) {
  QueryResult result{query, corpus.name, {}};
  for (const auto& record : corpus.records) {
    const FieldValuePair* pair = find_field(record, query.field);
    if (pair == nullptr || pair->missing()) continue;
    if (match_form(*pair->value, mode) == query.value) result.retrieved_ids.push_back(record.id);
  }
  return result;
}

std::string SearchIndex::key(std::string_view field, std::string_view value) {
  std::string out;
  out.reserve(field.size() + value.size() + 1);
  out.append(field);
  out.push_back('\x1f');
  out.append(value);
  return out;
}

SearchIndex::SearchIndex(const Corpus& corpus, MatchMode mode)
    : corpus_name_(corpus.name), mode_(mode) {
  ids_.reserve(corpus.records.size());
  for (std::size_t i = 0; i < corpus.records.size(); ++i) {
    const auto& record = corpus.records[i];
    ids_.push_back(record.id);
    std::unordered_set<std::string_view> seen_fields;
    for (const auto& pair : record.fields) {
      // Lookup semantics: only the first occurrence of a name is searchable.
      if (!seen_fields.insert(pair.name).second) continue;
      if (pair.missing()) continue;
      postings_[key(pair.name, match_form(*pair.value, mode))].push_back(i);
    }
  }
}

QueryResult SearchIndex::execute(const SearchQuery& query) const {
  QueryResult result{query, corpus_name_, {}};
  auto it = postings_.find(key(query.field, query.value));
  if (it == postings_.end()) return result;
  result.retrieved_ids.reserve(it->second.size());
  for (std::size_t index : it->second) result.retrieved_ids.push_back(ids_[index]);
  return result;
}

SearchIndex build_index(const Corpus& corpus, MatchMode mode) { return SearchIndex(corpus, mode); }

QueryResult execute_indexed(const SearchQuery& query, const SearchIndex& index) {
  return index.execute(query);
}

}  // namespace fairmeta
