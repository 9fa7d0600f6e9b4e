#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include <atomic>
#include <thread>

#include "fairmeta/backends.hpp"
#include "fairmeta/errors.hpp"
#include "fairmeta/standardizer.hpp"
#include "http.hpp"
#include "test_support.hpp"

using namespace fairmeta;
using testing_support::make_corpus;
using testing_support::make_record;
using testing_support::TempDir;

namespace {

const MetadataTemplate& shipped_template() {
  static const MetadataTemplate tpl =
      load_template(testing_support::data_dir() / "templates" / "biosample_human.json");
  return tpl;
}

const DataDictionary& shipped_dictionary() {
  static const DataDictionary dictionary =
      load_data_dictionary(testing_support::data_dir() / "dictionary" / "biosample_human.txt");
  return dictionary;
}

MetadataRecord lung_record() {
  return make_record("SAMN1", {{"sample name", "TN_32"}, {"age", "67"}, {"sex", "female"},
                               {"tissue", "lung cancer"}});
}

// Scripted backend: pops responses per call; "!throw" raises.
class ScriptedBackend final : public CompletionBackend {
 public:
  explicit ScriptedBackend(std::vector<std::string> script) : script_(std::move(script)) {}
  std::string complete(const Prompt& prompt) override {
    prompts.push_back(prompt.text);
    const std::string next = script_.at(calls++);
    if (next == "!throw") throw BackendError("scripted failure");
    return next;
  }
  bool concurrent_safe() const override { return false; }

  std::size_t calls = 0;
  std::vector<std::string> prompts;

 private:
  std::vector<std::string> script_;
};

// Answers based on the record id; safe to call concurrently.
class EchoBackend final : public CompletionBackend {
 public:
  std::string complete(const Prompt& prompt) override {
    ++calls;
    std::this_thread::sleep_for(std::chrono::milliseconds(prompt.record_id.size() % 3));
    if (prompt.record_id == "bad") return "no pairs here";
    if (prompt.record_id == "down") throw BackendError("offline");
    return "tissue: " + prompt.record_id + "\n";
  }
  std::atomic<int> calls{0};
};

}  // namespace

TEST(Prompts, DataDictionaryShape) {
  const Prompt prompt = build_prompt(lung_record(), Condition::DD, {&shipped_dictionary(), nullptr});
  const std::string expected_start =
      "Convert the record: \"sample name:TN_32 \xE2\x80\x94 age:67 \xE2\x80\x94 sex:female \xE2\x80\x94 "
      "tissue:lung cancer\" to the format given by the BioSample data dictionary:\n\n\""
      "Name \xE2\x80\x94 Description \xE2\x80\x94 Value format\n\n";
  EXPECT_EQ(prompt.text.substr(0, expected_start.size()), expected_start);
  EXPECT_NE(prompt.text.find("tissue \xE2\x80\x94 Type of tissue the sample was taken from \xE2\x80\x94 {term}"),
            std::string::npos);
  EXPECT_EQ(prompt.record_id, "SAMN1");
  EXPECT_EQ(prompt.guidance_digest.size(), 64u);
}

TEST(Prompts, TemplateShape) {
  const Prompt prompt = build_prompt(lung_record(), Condition::CEDAR, {nullptr, &shipped_template()});
  EXPECT_TRUE(prompt.text.starts_with("Convert the record: \"sample name:TN_32"));
  EXPECT_NE(prompt.text.find("\" to the format given by the CEDAR template\n\n\"Name \xE2\x80\x94 Description "
                             "\xE2\x80\x94 Comments\n\n"),
            std::string::npos);
  EXPECT_NE(prompt.text.find("Must be from Uberon ontology"), std::string::npos);
  EXPECT_NE(prompt.text.find("Must be from Disease Ontology (DO) ontology"), std::string::npos);
}

TEST(Prompts, MissingGuidance) {
  EXPECT_THROW(build_prompt(lung_record(), Condition::Baseline, {&shipped_dictionary(), &shipped_template()}),
               MissingGuidance);
  EXPECT_THROW(build_prompt(lung_record(), Condition::DD, {nullptr, &shipped_template()}), MissingGuidance);
  EXPECT_THROW(build_prompt(lung_record(), Condition::CEDAR, {&shipped_dictionary(), nullptr}), MissingGuidance);
}

TEST(Prompts, RecordRoundTripsThroughPrompt) {
  const MetadataRecord record = lung_record();
  for (Condition condition : {Condition::DD, Condition::CEDAR}) {
    const Prompt prompt = build_prompt(record, condition, {&shipped_dictionary(), &shipped_template()});
    const auto inline_text = extract_record_inline(prompt.text);
    ASSERT_TRUE(inline_text);
    EXPECT_EQ(parse_record_inline(*inline_text), record.fields);
  }
}

TEST(Prompts, ShippedAssetsEqualDefaults) {
  EXPECT_EQ(load_prompt_assets(testing_support::data_dir() / "prompts" / "v1.json"), PromptAssets{});
  EXPECT_EQ(testing_support::slurp(testing_support::data_dir() / "prompts" / "v1.json"),
            prompt_assets_to_json(PromptAssets{}));
}

TEST(ModelOutput, LinesAndNoise) {
  const MetadataRecord parsed = parse_model_output(
      "Here is the record:\n- **tissue**: lung\n* disease: lung cancer\n`sex: female`\nage: NA\n\nThanks!");
  ASSERT_EQ(parsed.fields.size(), 4u);
  EXPECT_EQ(parsed.fields[0], FieldValuePair::make("tissue", "lung"));
  EXPECT_EQ(parsed.fields[1], FieldValuePair::make("disease", "lung cancer"));
  EXPECT_EQ(parsed.fields[2], FieldValuePair::make("sex", "female"));
  EXPECT_TRUE(parsed.fields[3].missing());
  EXPECT_THROW(parse_model_output("I cannot help with that."), ParseFailed);
  EXPECT_THROW(parse_model_output(""), ParseFailed);
}

TEST(ModelOutput, SplitsRunOnLines) {
  const MetadataRecord parsed =
      parse_model_output("tissue: lung disease: lung cancer sex: female", {"tissue", "disease", "sex"});
  ASSERT_EQ(parsed.fields.size(), 3u);
  EXPECT_EQ(*parsed.fields[0].value, "lung");
  EXPECT_EQ(*parsed.fields[1].value, "lung cancer");
  EXPECT_EQ(*parsed.fields[2].value, "female");
  // Without known names the line stays one pair.
  EXPECT_EQ(parse_model_output("tissue: lung disease: lung cancer").fields.size(), 1u);
}

TEST(Batch, RetryOnceThenSucceed) {
  ScriptedBackend backend({"sorry, no", "tissue: lung\n"});
  const Corpus corpus = make_corpus("c", Condition::Baseline, {lung_record()});
  const BatchResult result = standardize_batch(corpus, Condition::CEDAR, backend, {nullptr, &shipped_template()});
  ASSERT_EQ(result.outcomes.size(), 1u);
  EXPECT_EQ(result.outcomes[0].status, OutcomeStatus::Corrected);
  EXPECT_EQ(result.outcomes[0].attempts, 2);
  EXPECT_TRUE(backend.prompts[1].ends_with("Respond only as `name: value` lines."));
  EXPECT_EQ(result.corpus.condition, Condition::CEDAR);
  EXPECT_EQ(*lookup_field(result.corpus.records[0], "tissue"), "lung");
}

TEST(Batch, ParseFailureKeepsOriginalWithFlag) {
  ScriptedBackend backend({"nope", "still nope"});
  const Corpus corpus = make_corpus("c", Condition::Baseline, {lung_record()});
  const BatchResult result = standardize_batch(corpus, Condition::DD, backend, {&shipped_dictionary(), nullptr});
  EXPECT_EQ(result.outcomes[0].status, OutcomeStatus::ParseFailed);
  EXPECT_EQ(result.outcomes[0].attempts, 2);
  EXPECT_EQ(result.corpus.records[0].fields, corpus.records[0].fields);
  EXPECT_EQ(result.corpus.records[0].flags, std::vector<std::string>{"standardize:parse_failed"});
}

TEST(Batch, BackendFailureIsNotRetried) {
  ScriptedBackend backend({"!throw"});
  const Corpus corpus = make_corpus("c", Condition::Baseline, {lung_record()});
  const BatchResult result = standardize_batch(corpus, Condition::DD, backend, {&shipped_dictionary(), nullptr});
  EXPECT_EQ(result.outcomes[0].status, OutcomeStatus::BackendFailed);
  EXPECT_EQ(backend.calls, 1u);
  EXPECT_EQ(result.corpus.records[0].flags, std::vector<std::string>{"standardize:backend_failed"});
}

TEST(Batch, ConcurrentRunKeepsInputOrder) {
  std::vector<MetadataRecord> records;
  for (int i = 0; i < 60; ++i) records.push_back(make_record("r" + std::to_string(i), {{"tissue", "x"}}));
  records[7].id = "bad";
  records[13].id = "down";
  const Corpus corpus = make_corpus("c", Condition::Baseline, records);
  EchoBackend backend;
  StandardizeOptions options;
  options.max_inflight = 8;
  const BatchResult result =
      standardize_batch(corpus, Condition::CEDAR, backend, {nullptr, &shipped_template()}, options);
  ASSERT_EQ(result.outcomes.size(), 60u);
  for (std::size_t i = 0; i < 60; ++i) {
    EXPECT_EQ(result.outcomes[i].record_id, records[i].id);
    EXPECT_EQ(result.corpus.records[i].id, records[i].id);
  }
  EXPECT_EQ(result.outcomes[7].status, OutcomeStatus::ParseFailed);
  EXPECT_EQ(result.outcomes[13].status, OutcomeStatus::BackendFailed);
  EXPECT_EQ(*lookup_field(result.corpus.records[20], "tissue"), "r20");
  EXPECT_EQ(backend.calls.load(), 61);  // one retry for "bad"
}

TEST(Batch, BaselineMakesNoCalls) {
  ScriptedBackend backend({});
  const Corpus corpus = make_corpus("c", Condition::Baseline, {lung_record()});
  const BatchResult result = standardize_batch(corpus, Condition::Baseline, backend, {});
  EXPECT_EQ(result.corpus, corpus);
  EXPECT_EQ(backend.calls, 0u);
  EXPECT_THROW(standardize_batch(corpus, Condition::DD, backend, {}), MissingGuidance);
}

TEST(Outcomes, JsonLines) {
  StandardizationOutcome outcome;
  outcome.record_id = "a";
  outcome.status = OutcomeStatus::ParseFailed;
  outcome.attempts = 2;
  outcome.message = "m";
  EXPECT_EQ(outcomes_to_jsonl({outcome}), "{\"id\":\"a\",\"status\":\"parse_failed\",\"attempts\":2,\"message\":\"m\"}\n");
}

TEST(RuleBackend, MovesDiseaseOutOfTissue) {
  const RuleBackend rule(shipped_template(), shipped_dictionary());
  const auto cedar = rule.correct(lung_record().fields, Condition::CEDAR);
  MetadataRecord as_record;
  as_record.fields = cedar;
  EXPECT_EQ(*lookup_field(as_record, "tissue"), "lung");
  EXPECT_EQ(*lookup_field(as_record, "disease"), "lung cancer");
  EXPECT_EQ(*lookup_field(as_record, "sample name"), "TN_32");
  EXPECT_EQ(cedar.size(), shipped_template().fields.size());

  as_record.fields = rule.correct(lung_record().fields, Condition::DD);
  EXPECT_EQ(*lookup_field(as_record, "tissue"), "NA");
  EXPECT_EQ(*lookup_field(as_record, "disease"), "lung cancer");
}

TEST(RuleBackend, MapsSynonymsUnderCedarAndStripsUnderDd) {
  const RuleBackend rule(shipped_template(), shipped_dictionary());
  MetadataRecord out;
  out.fields = rule.correct({FieldValuePair::make("tissue", "PBMC")}, Condition::CEDAR);
  EXPECT_EQ(*lookup_field(out, "tissue"), "blood");
  out.fields = rule.correct({FieldValuePair::make("tissue", "whole blood")}, Condition::DD);
  EXPECT_EQ(*lookup_field(out, "tissue"), "blood");
  out.fields = rule.correct({FieldValuePair::make("tissue", "Liver")}, Condition::CEDAR);
  EXPECT_EQ(*lookup_field(out, "tissue"), "liver");
}

TEST(RuleBackend, CompletesPrompts) {
  RuleBackend rule(shipped_template(), shipped_dictionary());
  const Corpus corpus = make_corpus("c", Condition::Baseline, {lung_record()});
  const BatchResult result = standardize_batch(corpus, Condition::CEDAR, rule, {nullptr, &shipped_template()});
  EXPECT_EQ(result.outcomes[0].status, OutcomeStatus::Corrected);
  EXPECT_EQ(*lookup_field(result.corpus.records[0], "tissue"), "lung");
}

TEST(ReplayBackend, StrictMissAndCapture) {
  TempDir dir;
  const Prompt prompt = build_prompt(lung_record(), Condition::DD, {&shipped_dictionary(), nullptr});
  ReplayBackend strict(dir.path(), ReplayMode::Strict);
  EXPECT_THROW(strict.complete(prompt), BackendError);

  auto inner = std::make_unique<ScriptedBackend>(std::vector<std::string>{"tissue: lung\n"});
  ScriptedBackend* inner_ptr = inner.get();
  ReplayBackend capture(dir.path(), ReplayMode::Capture, std::move(inner));
  EXPECT_EQ(capture.complete(prompt), "tissue: lung\n");
  EXPECT_EQ(capture.complete(prompt), "tissue: lung\n");
  EXPECT_EQ(inner_ptr->calls, 1u);
  EXPECT_TRUE(std::filesystem::exists(dir.path() / (ReplayBackend::cache_key(prompt) + ".txt")));
  EXPECT_EQ(strict.complete(prompt), "tissue: lung\n");
  EXPECT_THROW(ReplayBackend(dir.path(), ReplayMode::Capture), Error);
}

TEST(ReplayBackend, FixtureCacheCoversFixtureCorpora) {
  const auto suite = testing_support::fixture_suite();
  ReplayBackend replay(suite / "replay", ReplayMode::Strict);
  const Corpus baseline = read_corpus_file(suite / "corpora" / "geo_liver.baseline.jsonl");
  const BatchResult cedar =
      standardize_batch(baseline, Condition::CEDAR, replay, {&shipped_dictionary(), &shipped_template()});
  for (const auto& outcome : cedar.outcomes) EXPECT_EQ(outcome.status, OutcomeStatus::Corrected) << outcome.message;
  EXPECT_EQ(cedar.corpus, read_corpus_file(suite / "corpora" / "geo_liver.cedar.jsonl"));
}

TEST(BackendConfig, ParsesAndResolvesPaths) {
  const BackendConfig config = parse_backend_config(
      R"({"kind":"replay","cache_path":"cache","mode":"capture","max_inflight":2,
          "inner":{"kind":"rule","template":"/abs/t.json"}})",
      "/base");
  EXPECT_EQ(config.kind, BackendKind::Replay);
  EXPECT_EQ(config.cache_path, std::filesystem::path("/base/cache"));
  EXPECT_EQ(config.mode, ReplayMode::Capture);
  EXPECT_EQ(config.max_inflight, 2u);
  ASSERT_TRUE(config.inner);
  EXPECT_EQ(config.inner->template_path, std::filesystem::path("/abs/t.json"));
  EXPECT_THROW(parse_backend_config(R"({"kind":"oracle"})", "/"), FormatError);
  EXPECT_THROW(parse_backend_config(R"({"kind":"live"})", "/"), FormatError);
  EXPECT_THROW(parse_backend_config(R"({"kind":"replay"})", "/"), FormatError);
  EXPECT_THROW(parse_backend_config("[", "/"), FormatError);
}

TEST(LiveBackend, TalksToChatEndpoint) {
  httplib::Server server;
  std::string seen_body;
  std::string seen_auth;
  server.Post("/v1/chat/completions", [&](const httplib::Request& request, httplib::Response& response) {
    seen_body = request.body;
    seen_auth = request.get_header_value("Authorization");
    const auto body = nlohmann::json::parse(request.body);
    const std::string content = body["messages"][0]["content"];
    if (content.find("too long") != std::string::npos) {
      response.status = 400;
      response.set_content(R"({"error":"context_length_exceeded"})", "application/json");
      return;
    }
    response.set_content(R"({"choices":[{"message":{"role":"assistant","content":"tissue: lung\n"}}]})",
                         "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::jthread thread([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  LiveBackendConfig config;
  config.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions";
  config.model = "test-model";
  config.api_key = "k";
  LiveBackend live(config);
  Prompt prompt;
  prompt.text = "hello";
  EXPECT_EQ(live.complete(prompt), "tissue: lung\n");
  const auto sent = nlohmann::json::parse(seen_body);
  EXPECT_EQ(sent["model"], "test-model");
  EXPECT_EQ(sent["temperature"], 0);
  EXPECT_EQ(seen_auth, "Bearer k");

  prompt.text = "too long";
  EXPECT_THROW(live.complete(prompt), BackendError);
  EXPECT_THROW(LiveBackend::parse_response("{}"), BackendError);
  server.stop();
}
