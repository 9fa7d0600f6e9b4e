#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <numeric>
#include <thread>

#include "fairmeta/errors.hpp"
#include "fairmeta/ingest.hpp"
#include "http.hpp"
#include "test_support.hpp"

using namespace fairmeta;
using testing_support::TempDir;

namespace {

std::string biosample_xml(const std::string& id, const std::string& tissue) {
  return "<BioSample accession=\"" + id + "\"><Description><Organism taxonomy_name=\"Homo sapiens\"/>"
         "</Description><Attributes><Attribute attribute_name=\"tissue\">" + tissue +
         "</Attribute></Attributes></BioSample>";
}

std::vector<RawRecord> raw_payloads(std::size_t good, std::size_t malformed) {
  std::vector<RawRecord> raw;
  for (std::size_t i = 0; i < good; ++i) {
    const std::string id = "SAMN" + std::to_string(100 + i);
    raw.push_back({id, biosample_xml(id, "lung")});
  }
  for (std::size_t i = 0; i < malformed; ++i) raw.push_back({"BAD" + std::to_string(i), "<BioSample"});
  return raw;
}

// Local stand-in for the E-utilities endpoints.
class FakeEutils {
 public:
  FakeEutils() {
    server_.Get("/eutils/esearch.fcgi", [this](const httplib::Request& request, httplib::Response& response) {
      esearch_terms.push_back(request.get_param_value("term"));
      esearch_targets.push_back(request.target);
      response.set_header("NCBI-PHID", "abc");
      response.set_content(R"({"esearchresult":{"count":"3","idlist":["11","12","13"]}})", "application/json");
    });
    server_.Get("/eutils/efetch.fcgi", [this](const httplib::Request& request, httplib::Response& response) {
      const std::string id = request.get_param_value("id");
      const int hit = ++hits_[id == "flaky" ? 0 : id == "quota" ? 1 : id == "gone" ? 2 : 3];
      if (id == "flaky" && hit < 3) {
        response.status = 429;
        return;
      }
      if (id == "quota") {
        response.status = 403;
        return;
      }
      if (id == "gone") {
        response.status = 404;
        return;
      }
      if (id == "down") {
        response.status = 503;
        return;
      }
      response.set_content("record " + id + " retmode=" + request.get_param_value("retmode"), "text/plain");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::jthread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeEutils() { server_.stop(); }

  EutilsConfig config(std::vector<std::chrono::milliseconds>* sleeps) const {
    EutilsConfig config;
    config.base_url = "http://127.0.0.1:" + std::to_string(port_) + "/eutils";
    config.min_interval = std::chrono::milliseconds(0);
    config.retry.initial_backoff = std::chrono::milliseconds(100);
    config.retry.sleep = [sleeps](std::chrono::milliseconds d) { sleeps->push_back(d); };
    return config;
  }

  std::vector<std::string> esearch_terms;
  std::vector<std::string> esearch_targets;

 private:
  httplib::Server server_;
  int port_ = 0;
  std::jthread thread_;
  std::atomic<int> hits_[4] = {0, 0, 0, 0};
};

}  // namespace

TEST(Queries, CohortStrings) {
  EXPECT_EQ(build_query(Cohort::Lung, Source::GEO).query_string, "lung cancer[All Fields] AND human[Organism]");
  EXPECT_EQ(build_query(Cohort::Ovarian, Source::BioSample).query_string,
            "ovarian cancer[All Fields] AND \"human 1 0\"[filter]");
  EXPECT_EQ(build_query(Cohort::Liver, Source::GEO).query_string, "liver cancer[All Fields] AND human[Organism]");
  EXPECT_EQ(repository_database(Source::BioSample), "biosample");
  EXPECT_EQ(repository_database(Source::GEO), "gds");
}

TEST(Shuffle, IsAPermutationAndSeedStable) {
  std::vector<std::size_t> a(50);
  std::iota(a.begin(), a.end(), 0);
  std::vector<std::size_t> b = a;
  deterministic_shuffle(a, 42);
  deterministic_shuffle(b, 42);
  EXPECT_EQ(a, b);
  std::vector<std::size_t> c(50);
  std::iota(c.begin(), c.end(), 0);
  deterministic_shuffle(c, 43);
  EXPECT_NE(a, c);
  std::sort(a.begin(), a.end());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i], i);
}

// Cross-checked against an independent mt19937_64 implementation.
TEST(Shuffle, FrozenOrder) {
  std::vector<std::size_t> items(10);
  std::iota(items.begin(), items.end(), 0);
  deterministic_shuffle(items, 7);
  EXPECT_EQ(items, (std::vector<std::size_t>{0, 7, 4, 9, 3, 1, 2, 8, 6, 5}));
}

TEST(Sampling, DropsMalformedAndDuplicates) {
  auto raw = raw_payloads(12, 3);
  raw.push_back(raw[0]);
  const SampleResult result = sample_uniform(raw, {16, 10, 5}, parser_for(Source::BioSample),
                                             {"biosample_lung", Source::BioSample, Cohort::Lung});
  EXPECT_EQ(result.report, (SamplingReport{16, 3, 1, 10}));
  EXPECT_EQ(result.corpus.records.size(), 10u);
  EXPECT_EQ(result.corpus.seed, 5u);
  EXPECT_EQ(result.corpus.condition, Condition::Baseline);
  EXPECT_NO_THROW(check_corpus(result.corpus));
  for (const auto& record : result.corpus.records) EXPECT_TRUE(record.id.starts_with("SAMN"));
}

TEST(Sampling, SameSeedSameSample) {
  const auto raw = raw_payloads(30, 2);
  const CorpusIdentity identity{"x", Source::BioSample, Cohort::Lung};
  const auto first = sample_uniform(raw, {32, 20, 9}, parser_for(Source::BioSample), identity);
  const auto second = sample_uniform(raw, {32, 20, 9}, parser_for(Source::BioSample), identity);
  const auto other = sample_uniform(raw, {32, 20, 10}, parser_for(Source::BioSample), identity);
  EXPECT_EQ(first.corpus, second.corpus);
  EXPECT_NE(first.corpus.records, other.corpus.records);
}

TEST(Sampling, InsufficientAndInvalidPlans) {
  const auto raw = raw_payloads(5, 5);
  const CorpusIdentity identity{"x", Source::BioSample, Cohort::Lung};
  EXPECT_THROW(sample_uniform(raw, {10, 8, 1}, parser_for(Source::BioSample), identity), InsufficientRecords);
  EXPECT_THROW(sample_uniform(raw, {10, 11, 1}, parser_for(Source::BioSample), identity), Error);
  EXPECT_THROW(sample_uniform(raw, {10, 0, 1}, parser_for(Source::BioSample), identity), Error);
}

TEST(FixtureClient, FetchesAndCaches) {
  TempDir dir;
  FixtureClient client(raw_payloads(5, 0));
  FetchLog log;
  FetchOptions options;
  options.cache_root = dir.path();
  options.max_concurrent = 3;
  const auto query = build_query(Cohort::Lung, Source::BioSample);
  const auto first = fetch_raw(query, 4, client, log, options);
  ASSERT_EQ(first.size(), 4u);
  EXPECT_EQ(first[2].id, "SAMN102");
  EXPECT_TRUE(std::filesystem::exists(dir.path() / "raw" / "biosample" / "lung" / "SAMN103"));
  const std::size_t requests = log.entries().size();
  const auto second = fetch_raw(query, 4, client, log, options);
  EXPECT_EQ(log.entries().size(), requests + 1);  // only the search
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(first[i].text, second[i].text);

  FixtureClient missing(std::vector<RawRecord>{{"a", "x"}});
  FetchLog other;
  EXPECT_EQ(fetch_raw(query, 0, missing, other).size(), 0u);
}

TEST(Eutils, SearchEncodesTermAndParsesIds) {
  FakeEutils server;
  std::vector<std::chrono::milliseconds> sleeps;
  EutilsClient client(server.config(&sleeps));
  FetchLog log;
  const auto ids = client.search_ids(build_query(Cohort::Lung, Source::BioSample), 2, log);
  EXPECT_EQ(ids, (std::vector<std::string>{"11", "12"}));
  ASSERT_EQ(server.esearch_terms.size(), 1u);
  EXPECT_EQ(server.esearch_terms[0], "lung cancer[All Fields] AND \"human 1 0\"[filter]");
  EXPECT_EQ(server.esearch_targets[0].find(' '), std::string::npos);
  ASSERT_EQ(log.entries().size(), 1u);
  EXPECT_TRUE(log.entries()[0].ends_with("-> 200 phid=abc"));
}

TEST(Eutils, RetriesTransientStatusWithBackoff) {
  FakeEutils server;
  std::vector<std::chrono::milliseconds> sleeps;
  EutilsClient client(server.config(&sleeps));
  FetchLog log;
  EXPECT_EQ(client.fetch_record(Source::GEO, "flaky", log), "record flaky retmode=text");
  EXPECT_EQ(log.retries(), 2u);
  EXPECT_EQ(sleeps, (std::vector<std::chrono::milliseconds>{std::chrono::milliseconds(100),
                                                            std::chrono::milliseconds(200)}));
}

TEST(Eutils, GivesUpAfterMaxAttempts) {
  FakeEutils server;
  std::vector<std::chrono::milliseconds> sleeps;
  EutilsClient client(server.config(&sleeps));
  FetchLog log;
  try {
    client.fetch_record(Source::BioSample, "down", log);
    FAIL() << "expected NetworkError";
  } catch (const NetworkError& e) {
    EXPECT_EQ(e.status(), 503);
  }
  EXPECT_EQ(sleeps.size(), 2u);
}

TEST(Eutils, QuotaAndPermanentErrorsAreNotRetried) {
  FakeEutils server;
  std::vector<std::chrono::milliseconds> sleeps;
  EutilsClient client(server.config(&sleeps));
  FetchLog log;
  EXPECT_THROW(client.fetch_record(Source::BioSample, "quota", log), QuotaError);
  EXPECT_THROW(client.fetch_record(Source::BioSample, "gone", log), NetworkError);
  EXPECT_TRUE(sleeps.empty());
  EXPECT_EQ(client.fetch_record(Source::BioSample, "ok", log), "record ok retmode=xml");
}

TEST(Eutils, UnreachableHostIsNetworkError) {
  EutilsConfig config;
  config.base_url = "http://127.0.0.1:1/eutils";
  config.min_interval = std::chrono::milliseconds(0);
  config.retry.max_attempts = 2;
  config.retry.sleep = [](std::chrono::milliseconds) {};
  EutilsClient client(config);
  FetchLog log;
  EXPECT_THROW(client.fetch_record(Source::GEO, "x", log), NetworkError);
  EXPECT_EQ(log.retries(), 1u);
}
