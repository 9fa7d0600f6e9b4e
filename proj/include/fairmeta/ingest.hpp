#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fairmeta/record.hpp"

namespace fairmeta {

struct CohortQuery {
  Cohort cohort;
  Source source;
  std::string query_string;
};

/// Repository search string for a cohort, e.g.
/// `lung cancer[All Fields] AND human[Organism]` for GEO.
CohortQuery build_query(Cohort cohort, Source source);

/// E-utilities database name: "biosample" or "gds".
std::string_view repository_database(Source source);

struct SamplingPlan {
  std::size_t initial_count = 1000;
  std::size_t target_count = 800;
  std::uint64_t seed = 0;
};

struct RawRecord {
  std::string id;
  std::string text;
};

/// Thread-safe request log shared by a fetch run.
class FetchLog {
 public:
  void request(std::string line);
  void retry(std::string line);

  std::vector<std::string> entries() const;
  std::size_t retries() const;

 private:
  mutable std::mutex mutex_;
  std::vector<std::string> entries_;
  std::size_t retries_ = 0;
};

class RepositoryClient {
 public:
  virtual ~RepositoryClient() = default;
  virtual std::vector<std::string> search_ids(const CohortQuery& query, std::size_t limit,
                                              FetchLog& log) = 0;
  virtual std::string fetch_record(Source source, const std::string& id, FetchLog& log) = 0;
};

/// Serves canned payloads; search returns their ids in order.
class FixtureClient final : public RepositoryClient {
 public:
  explicit FixtureClient(std::vector<RawRecord> payloads);

  std::vector<std::string> search_ids(const CohortQuery& query, std::size_t limit,
                                      FetchLog& log) override;
  std::string fetch_record(Source source, const std::string& id, FetchLog& log) override;

 private:
  std::vector<RawRecord> payloads_;
};

struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{1000};
  double multiplier = 2.0;
  std::function<void(std::chrono::milliseconds)> sleep;  // defaults to this_thread::sleep_for
};

/// HTTP statuses worth retrying: 429 and 5xx gateway/availability errors.
bool is_transient_status(int status);

struct EutilsConfig {
  std::string base_url = "https://eutils.ncbi.nlm.nih.gov/entrez/eutils";
  std::string api_key;  // NCBI_API_KEY
  RetryPolicy retry;
  std::chrono::milliseconds min_interval{340};  // polite spacing between requests
};

/// NCBI E-utilities client: esearch for ids, efetch per record.
/// Transient failures are retried per the policy and then raise NetworkError;
/// HTTP 403 raises QuotaError without retrying.
class EutilsClient final : public RepositoryClient {
 public:
  explicit EutilsClient(EutilsConfig config);

  std::vector<std::string> search_ids(const CohortQuery& query, std::size_t limit,
                                      FetchLog& log) override;
  std::string fetch_record(Source source, const std::string& id, FetchLog& log) override;

 private:
  std::string get(const std::string& path_and_query, FetchLog& log);
  void pace();

  EutilsConfig config_;
  std::mutex pace_mutex_;
  std::chrono::steady_clock::time_point next_slot_{};
  std::size_t request_counter_ = 0;
};

struct FetchOptions {
  std::size_t max_concurrent = 3;
  // When set, payloads are cached at <cache_root>/raw/<source>/<cohort>/<id>.
  std::optional<std::filesystem::path> cache_root;
};

/// Up to `limit` raw payloads for the query, in search order.
std::vector<RawRecord> fetch_raw(const CohortQuery& query, std::size_t limit, RepositoryClient& client,
                                 FetchLog& log, const FetchOptions& options = {});

using RecordParser = std::function<MetadataRecord(std::string_view text, std::string_view fallback_id)>;

RecordParser parser_for(Source source);

struct SamplingReport {
  std::size_t input = 0;
  std::size_t malformed = 0;
  std::size_t duplicates = 0;
  std::size_t sampled = 0;

  friend bool operator==(const SamplingReport&, const SamplingReport&) = default;
};

struct SampleResult {
  Corpus corpus;
  SamplingReport report;
};

struct CorpusIdentity {
  std::string name;
  Source source = Source::BioSample;
  Cohort cohort = Cohort::Lung;
};

/// Parses every payload, drops malformed ones (and repeated ids), shuffles the
/// survivors with a seeded Fisher-Yates pass and keeps the first
/// `plan.target_count`. Throws InsufficientRecords when too few survive.
SampleResult sample_uniform(std::span<const RawRecord> raw, const SamplingPlan& plan,
                            const RecordParser& parser, const CorpusIdentity& identity);

/// Seeded in-place shuffle; identical across platforms for a given seed.
void deterministic_shuffle(std::vector<std::size_t>& items, std::uint64_t seed);

}  // namespace fairmeta
