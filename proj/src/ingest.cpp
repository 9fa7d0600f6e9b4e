#include "fairmeta/ingest.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <thread>
#include <unordered_set>

#include "fairmeta/errors.hpp"
#include "fairmeta/parsers.hpp"
#include "http.hpp"

namespace fairmeta {

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// Unbiased draw in [0, bound) from a 64-bit generator (rejection sampling).
std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t value;
  do {
    value = rng();
  } while (value >= limit);
  return value % bound;
}

}  // namespace

CohortQuery build_query(Cohort cohort, Source source) {
  const std::string disease = fmt::format("{} cancer[All Fields]", to_string(cohort));
  const std::string filter =
      source == Source::BioSample ? "\"human 1 0\"[filter]" : "human[Organism]";
  return {cohort, source, disease + " AND " + filter};
}

std::string_view repository_database(Source source) {
  return source == Source::BioSample ? "biosample" : "gds";
}

// ---------------------------------------------------------------------------

void FetchLog::request(std::string line) {
  std::lock_guard lock(mutex_);
  entries_.push_back(std::move(line));
}

void FetchLog::retry(std::string line) {
  std::lock_guard lock(mutex_);
  ++retries_;
  entries_.push_back(std::move(line));
}

std::vector<std::string> FetchLog::entries() const {
  std::lock_guard lock(mutex_);
  return entries_;
}

std::size_t FetchLog::retries() const {
  std::lock_guard lock(mutex_);
  return retries_;
}

// ---------------------------------------------------------------------------

FixtureClient::FixtureClient(std::vector<RawRecord> payloads) : payloads_(std::move(payloads)) {}

std::vector<std::string> FixtureClient::search_ids(const CohortQuery& query, std::size_t limit,
                                                   FetchLog& log) {
  log.request("fixture search " + query.query_string);
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < payloads_.size() && i < limit; ++i) ids.push_back(payloads_[i].id);
  return ids;
}

std::string FixtureClient::fetch_record(Source, const std::string& id, FetchLog& log) {
  log.request("fixture fetch " + id);
  for (const auto& payload : payloads_) {
    if (payload.id == id) return payload.text;
  }
  throw NetworkError("fixture has no record " + id, 404);
}

// ---------------------------------------------------------------------------

bool is_transient_status(int status) {
  return status == 429 || status == 500 || status == 502 || status == 503 || status == 504;
}

EutilsClient::EutilsClient(EutilsConfig config) : config_(std::move(config)) {
  if (!config_.retry.sleep) {
    config_.retry.sleep = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
  }
  if (config_.retry.max_attempts < 1) config_.retry.max_attempts = 1;
}

void EutilsClient::pace() {
  std::chrono::steady_clock::time_point slot;
  {
    std::lock_guard lock(pace_mutex_);
    const auto now = std::chrono::steady_clock::now();
    slot = std::max(now, next_slot_);
    next_slot_ = slot + config_.min_interval;
  }
  std::this_thread::sleep_until(slot);
}

std::string EutilsClient::get(const std::string& path_and_query, FetchLog& log) {
  const auto [base, prefix] = detail::split_url(config_.base_url);
  const std::string path = (prefix == "/" ? std::string() : prefix) + path_and_query;
  std::chrono::milliseconds backoff = config_.retry.initial_backoff;

  for (int attempt = 1;; ++attempt) {
    pace();
    std::size_t request_id;
    {
      std::lock_guard lock(pace_mutex_);
      request_id = ++request_counter_;
    }
    httplib::Client client(base);
    client.set_connection_timeout(std::chrono::seconds(10));
    client.set_read_timeout(std::chrono::seconds(60));
    auto response = client.Get(path);

    int status = 0;
    std::string failure;
    if (!response) {
      failure = httplib::to_string(response.error());
    } else {
      status = response->status;
      std::string phid = response->get_header_value("NCBI-PHID");
      log.request(fmt::format("request {} GET {} -> {}{}", request_id, path, status,
                              phid.empty() ? "" : " phid=" + phid));
      if (status == 200) return response->body;
      if (status == 403) throw QuotaError("repository refused the request (HTTP 403): " + path);
      failure = "HTTP " + std::to_string(status);
    }

    const bool transient = !response || is_transient_status(status);
    if (!transient) throw NetworkError("request failed: " + failure + " for " + path, status);
    if (attempt >= config_.retry.max_attempts) {
      throw NetworkError(fmt::format("request failed after {} attempts: {} for {}", attempt,
                                     failure, path),
                         status);
    }
    log.retry(fmt::format("retry {} of request {} after {} (backoff {} ms)", attempt, request_id,
                          failure, backoff.count()));
    config_.retry.sleep(backoff);
    backoff = std::chrono::milliseconds(
        static_cast<long long>(static_cast<double>(backoff.count()) * config_.retry.multiplier));
  }
}

std::vector<std::string> EutilsClient::search_ids(const CohortQuery& query, std::size_t limit,
                                                  FetchLog& log) {
  httplib::Params params{{"db", std::string(repository_database(query.source))},
                         {"term", query.query_string},
                         {"retmax", std::to_string(limit)},
                         {"retmode", "json"}};
  if (!config_.api_key.empty()) params.emplace("api_key", config_.api_key);
  const std::string body =
      get("/esearch.fcgi?" + httplib::detail::params_to_query_str(params), log);
  try {
    const auto document = nlohmann::json::parse(body);
    std::vector<std::string> ids;
    for (const auto& id : document.at("esearchresult").at("idlist")) {
      ids.push_back(id.get<std::string>());
      if (ids.size() == limit) break;
    }
    return ids;
  } catch (const nlohmann::json::exception& e) {
    throw NetworkError(std::string("unexpected esearch response: ") + e.what(), 200);
  }
}

std::string EutilsClient::fetch_record(Source source, const std::string& id, FetchLog& log) {
  httplib::Params params{{"db", std::string(repository_database(source))},
                         {"id", id},
                         {"retmode", source == Source::BioSample ? "xml" : "text"}};
  if (!config_.api_key.empty()) params.emplace("api_key", config_.api_key);
  return get("/efetch.fcgi?" + httplib::detail::params_to_query_str(params), log);
}

// ---------------------------------------------------------------------------

std::vector<RawRecord> fetch_raw(const CohortQuery& query, std::size_t limit, RepositoryClient& client,
                                 FetchLog& log, const FetchOptions& options) {
  if (limit == 0) return {};
  std::vector<std::string> ids = client.search_ids(query, limit, log);
  if (ids.size() > limit) ids.resize(limit);

  std::optional<std::filesystem::path> cache_dir;
  if (options.cache_root) {
    cache_dir = *options.cache_root / "raw" / std::string(to_string(query.source)) /
                std::string(to_string(query.cohort));
    std::filesystem::create_directories(*cache_dir);
  }

  std::vector<RawRecord> records(ids.size());
  std::vector<std::exception_ptr> errors(ids.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < ids.size(); i = next++) {
      try {
        records[i].id = ids[i];
        if (cache_dir && std::filesystem::exists(*cache_dir / ids[i])) {
          records[i].text = read_file(*cache_dir / ids[i]);
          continue;
        }
        records[i].text = client.fetch_record(query.source, ids[i], log);
        if (cache_dir) {
          std::ofstream out(*cache_dir / ids[i], std::ios::binary | std::ios::trunc);
          out << records[i].text;
        }
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t workers = std::clamp<std::size_t>(options.max_concurrent, 1, ids.size());
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
  }
  for (const auto& error : errors) {
    if (error) std::rethrow_exception(error);
  }
  return records;
}

RecordParser parser_for(Source source) {
  if (source == Source::BioSample) {
    return [](std::string_view text, std::string_view id) { return parse_biosample_record(text, id); };
  }
  return [](std::string_view text, std::string_view id) { return parse_geo_record(text, id); };
}

void deterministic_shuffle(std::vector<std::size_t>& items, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (std::size_t i = items.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(uniform_below(rng, i));
    std::swap(items[i - 1], items[j]);
  }
}

SampleResult sample_uniform(std::span<const RawRecord> raw, const SamplingPlan& plan,
                            const RecordParser& parser, const CorpusIdentity& identity) {
  if (plan.target_count == 0 || plan.initial_count == 0 || plan.target_count > plan.initial_count) {
    throw Error("sampling plan needs 0 < target_count <= initial_count");
  }
  SampleResult result;
  result.report.input = raw.size();

  std::vector<MetadataRecord> survivors;
  std::unordered_set<std::string> ids;
  for (const auto& payload : raw) {
    MetadataRecord record;
    try {
      record = parser(payload.text, payload.id);
    } catch (const MalformedRecord&) {
      ++result.report.malformed;
      continue;
    }
    if (!ids.insert(record.id).second) {
      ++result.report.duplicates;
      continue;
    }
    survivors.push_back(std::move(record));
  }
  if (survivors.size() < plan.target_count) {
    throw InsufficientRecords(fmt::format("{} well-formed records survive, {} requested",
                                          survivors.size(), plan.target_count));
  }

  std::vector<std::size_t> order(survivors.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  deterministic_shuffle(order, plan.seed);

  result.corpus.name = identity.name;
  result.corpus.source = identity.source;
  result.corpus.cohort = identity.cohort;
  result.corpus.condition = Condition::Baseline;
  result.corpus.seed = plan.seed;
  for (std::size_t i = 0; i < plan.target_count; ++i) {
    MetadataRecord record = std::move(survivors[order[i]]);
    record.source = identity.source;
    result.corpus.records.push_back(std::move(record));
  }
  result.report.sampled = result.corpus.records.size();
  return result;
}

}  // namespace fairmeta
