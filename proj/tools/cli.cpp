#include "cli.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "fairmeta/backends.hpp"
#include "fairmeta/errors.hpp"
#include "fairmeta/evaluation.hpp"
#include "fairmeta/gold_labeler.hpp"
#include "fairmeta/ingest.hpp"
#include "fairmeta/manifest.hpp"
#include "fairmeta/schema.hpp"
#include "fairmeta/search.hpp"
#include "fairmeta/service.hpp"
#include "fairmeta/standardizer.hpp"
#include "fairmeta/suite.hpp"
#include "fairmeta/text.hpp"

#ifndef FAIRMETA_DATA_DIR
#define FAIRMETA_DATA_DIR "data"
#endif

namespace fairmeta::cli {

namespace fs = std::filesystem;

namespace {

const std::vector<std::string> kSourceNames = {"biosample", "geo"};
const std::vector<std::string> kCohortNames = {"lung", "liver", "ovarian"};
const std::vector<std::string> kConditionNames = {"baseline", "dd", "cedar"};

struct Context {
  fs::path workdir = ".";
  std::vector<std::string> arguments;
  std::ostream* out = nullptr;
  std::ostream* err = nullptr;

  fs::path resolve(const fs::path& path) const {
    return path.is_absolute() ? path : workdir / path;
  }
};

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << content;
  if (!out) throw Error("write failed for " + path.string());
}

fs::path default_data_file(const fs::path& relative) { return fs::path(FAIRMETA_DATA_DIR) / relative; }

RunManifest new_manifest(const Context& ctx, std::string command) {
  RunManifest manifest;
  manifest.timestamp = manifest_timestamp();
  manifest.command = std::move(command);
  manifest.arguments = ctx.arguments;
  return manifest;
}

ManifestInput input_entry(const fs::path& shown, const fs::path& actual) {
  return {shown.generic_string(), file_sha256(actual)};
}

std::string env_or_empty(const char* name) {
  const char* value = std::getenv(name);
  return value == nullptr ? std::string() : std::string(value);
}

// ---------------------------------------------------------------------------
// ingest

struct IngestArgs {
  std::string source;
  std::string cohort;
  std::size_t limit = 1000;
  std::string out_dir;
  std::string base_url;
  std::string fixture_dir;
  std::size_t concurrency = 3;
};

std::vector<RawRecord> read_payload_dir(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error("not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file()) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<RawRecord> payloads;
  for (const auto& file : files) payloads.push_back({file.filename().string(), read_text(file)});
  return payloads;
}

int run_ingest(const Context& ctx, const IngestArgs& args) {
  const Source source = parse_source(args.source);
  const Cohort cohort = parse_cohort(args.cohort);
  const fs::path out_dir = ctx.resolve(args.out_dir);
  const CohortQuery query = build_query(cohort, source);

  std::unique_ptr<RepositoryClient> client;
  if (!args.fixture_dir.empty()) {
    client = std::make_unique<FixtureClient>(read_payload_dir(ctx.resolve(args.fixture_dir)));
  } else {
    EutilsConfig config;
    if (!args.base_url.empty()) config.base_url = args.base_url;
    config.api_key = env_or_empty("NCBI_API_KEY");
    client = std::make_unique<EutilsClient>(config);
  }

  FetchLog log;
  FetchOptions options;
  options.max_concurrent = args.concurrency;
  options.cache_root = out_dir;
  const std::vector<RawRecord> records = fetch_raw(query, args.limit, *client, log, options);

  const fs::path ids_rel = fs::path("raw") / std::string(to_string(source)) /
                           (std::string(to_string(cohort)) + ".ids");
  std::string ids;
  for (const auto& record : records) ids += record.id + "\n";
  write_text(out_dir / ids_rel, ids);
  std::string log_text = "query: " + query.query_string + "\n";
  for (const auto& line : log.entries()) log_text += line + "\n";
  write_text(out_dir / "fetch.log", log_text);

  RunManifest manifest = new_manifest(ctx, "ingest");
  manifest.outputs = {ids_rel.generic_string(),
                      (fs::path("raw") / std::string(to_string(source)) /
                       std::string(to_string(cohort)))
                          .generic_string(),
                      "fetch.log"};
  write_manifest(out_dir, manifest);
  *ctx.out << fmt::format("fetched {} records ({} retries) for: {}\n", records.size(), log.retries(),
                          query.query_string);
  return 0;
}

// ---------------------------------------------------------------------------
// sample

struct SampleArgs {
  std::string source;
  std::string cohort;
  std::string raw_dir;
  std::string ids_file;
  std::size_t initial = 1000;
  std::size_t target = 800;
  std::uint64_t seed = 0;
  std::string name;
  std::string out_dir;
};

int run_sample(const Context& ctx, const SampleArgs& args) {
  const Source source = parse_source(args.source);
  const Cohort cohort = parse_cohort(args.cohort);
  const fs::path raw_dir = ctx.resolve(args.raw_dir);
  if (!fs::is_directory(raw_dir)) throw Error("raw payload directory not found: " + raw_dir.string());

  // Payload order: the ingest id list when present, else file name order.
  fs::path ids_file = args.ids_file.empty() ? fs::path(raw_dir.string() + ".ids") : ctx.resolve(args.ids_file);
  std::vector<std::string> ids;
  if (fs::is_regular_file(ids_file)) {
    std::istringstream lines(read_text(ids_file));
    for (std::string line; std::getline(lines, line);) {
      if (!trim(line).empty()) ids.push_back(trim(line));
    }
  } else {
    for (const auto& payload : read_payload_dir(raw_dir)) ids.push_back(payload.id);
  }
  if (ids.size() > args.initial) ids.resize(args.initial);

  std::vector<RawRecord> payloads;
  std::string digest_input;
  for (const auto& id : ids) {
    RawRecord record{id, read_text(raw_dir / id)};
    digest_input += id + "\t" + sha256_hex(record.text) + "\n";
    payloads.push_back(std::move(record));
  }

  SamplingPlan plan;
  plan.initial_count = args.initial;
  plan.target_count = args.target;
  plan.seed = args.seed;
  const std::string name =
      args.name.empty() ? fmt::format("{}_{}", to_string(source), to_string(cohort)) : args.name;
  const SampleResult result =
      sample_uniform(payloads, plan, parser_for(source), CorpusIdentity{name, source, cohort});

  const fs::path out_dir = ctx.resolve(args.out_dir);
  const std::string corpus_file = name + ".baseline.jsonl";
  write_text(out_dir / corpus_file, serialize_corpus(result.corpus));
  nlohmann::ordered_json report{{"input", result.report.input},
                                {"malformed", result.report.malformed},
                                {"duplicates", result.report.duplicates},
                                {"sampled", result.report.sampled},
                                {"seed", args.seed}};
  write_text(out_dir / "sampling.json", report.dump(2) + "\n");

  RunManifest manifest = new_manifest(ctx, "sample");
  manifest.seed = args.seed;
  manifest.inputs.push_back({fs::path(args.raw_dir).generic_string(), sha256_hex(digest_input)});
  manifest.outputs = {corpus_file, "sampling.json"};
  write_manifest(out_dir, manifest);
  *ctx.out << fmt::format("sampled {} of {} payloads ({} malformed, {} duplicate ids) into {}\n",
                          result.report.sampled, result.report.input, result.report.malformed,
                          result.report.duplicates, (out_dir / corpus_file).string());
  return 0;
}

// ---------------------------------------------------------------------------
// standardize

struct StandardizeArgs {
  std::string corpus;
  std::string condition;
  std::string backend = "rule";
  std::string cache;
  std::string replay_mode = "strict";
  std::string endpoint;
  std::string model;
  std::string template_path;
  std::string dictionary_path;
  std::string prompts_path;
  std::size_t max_inflight = 0;
  std::string out_dir;
};

std::string optional_file_digest(const fs::path& path) {
  return path.empty() ? std::string() : file_sha256(path);
}

int run_standardize(const Context& ctx, const StandardizeArgs& args) {
  const fs::path corpus_path = ctx.resolve(args.corpus);
  const Corpus corpus = read_corpus_file(corpus_path);
  const Condition condition = parse_condition(args.condition);

  BackendConfig config;
  std::string config_digest_source;
  if (args.backend.ends_with(".json")) {
    const fs::path config_path = ctx.resolve(args.backend);
    config = load_backend_config(config_path);
    config_digest_source = read_text(config_path);
  } else {
    if (args.backend == "rule") {
      config.kind = BackendKind::Rule;
    } else if (args.backend == "replay") {
      config.kind = BackendKind::Replay;
      if (args.cache.empty()) throw CLI::ValidationError("--cache", "replay backend needs --cache");
      config.cache_path = ctx.resolve(args.cache);
      config.mode = args.replay_mode == "capture" ? ReplayMode::Capture : ReplayMode::Strict;
      if (config.mode == ReplayMode::Capture) config.inner = std::make_shared<BackendConfig>();
    } else if (args.backend == "live") {
      config.kind = BackendKind::Live;
      if (args.endpoint.empty()) throw CLI::ValidationError("--endpoint", "live backend needs --endpoint");
      config.endpoint = args.endpoint;
      config.model = args.model;
    } else {
      throw CLI::ValidationError("--backend", "expected rule, replay, live or a .json config file");
    }
    nlohmann::ordered_json described{{"kind", args.backend},
                                     {"endpoint", config.endpoint},
                                     {"model", config.model},
                                     {"mode", args.replay_mode}};
    config_digest_source = described.dump();
  }
  if (args.max_inflight > 0) config.max_inflight = args.max_inflight;
  if (!args.template_path.empty()) config.template_path = ctx.resolve(args.template_path);
  if (!args.dictionary_path.empty()) config.dictionary_path = ctx.resolve(args.dictionary_path);
  if (!args.prompts_path.empty()) config.prompts_path = ctx.resolve(args.prompts_path);
  if (config.template_path.empty()) config.template_path = default_data_file("templates/biosample_human.json");
  if (config.dictionary_path.empty()) config.dictionary_path = default_data_file("dictionary/biosample_human.txt");
  if (config.prompts_path.empty()) config.prompts_path = default_data_file("prompts/v1.json");
  if (config.inner && config.inner->template_path.empty()) {
    config.inner->template_path = config.template_path;
    config.inner->dictionary_path = config.dictionary_path;
    config.inner->prompts_path = config.prompts_path;
  }

  const MetadataTemplate tpl = load_template(config.template_path);
  const DataDictionary dictionary = load_data_dictionary(config.dictionary_path);
  StandardizeOptions options;
  options.assets = load_prompt_assets(config.prompts_path);
  options.max_inflight = config.max_inflight;

  const std::string backend_digest = sha256_hex(
      config_digest_source + "\n" + optional_file_digest(config.template_path) + "\n" +
      optional_file_digest(config.dictionary_path) + "\n" + optional_file_digest(config.prompts_path));

  std::unique_ptr<CompletionBackend> backend = make_backend(config, &tpl, &dictionary, options.assets);
  const BatchResult result =
      standardize_batch(corpus, condition, *backend, Guidance{&dictionary, &tpl}, options);

  const fs::path out_dir = ctx.resolve(args.out_dir);
  const std::string stem = fmt::format("{}.{}", corpus.name, to_string(condition));
  write_text(out_dir / (stem + ".jsonl"), serialize_corpus(result.corpus));
  write_text(out_dir / (stem + ".outcomes.jsonl"), outcomes_to_jsonl(result.outcomes));

  RunManifest manifest = new_manifest(ctx, "standardize");
  manifest.seed = corpus.seed;
  manifest.backend_config_digest = backend_digest;
  manifest.inputs.push_back(input_entry(args.corpus, corpus_path));
  manifest.inputs.push_back(input_entry(config.template_path, config.template_path));
  manifest.inputs.push_back(input_entry(config.dictionary_path, config.dictionary_path));
  manifest.inputs.push_back(input_entry(config.prompts_path, config.prompts_path));
  manifest.outputs = {stem + ".jsonl", stem + ".outcomes.jsonl"};
  write_manifest(out_dir, manifest);

  std::size_t failed = 0;
  for (const auto& outcome : result.outcomes) {
    if (outcome.status != OutcomeStatus::Corrected) ++failed;
  }
  *ctx.out << fmt::format("standardized {} records under {} ({} failed, kept unchanged)\n",
                          result.outcomes.size(), to_string(condition), failed);
  return 0;
}

// ---------------------------------------------------------------------------
// label, search, evaluate, serve

int run_label(const Context& ctx, const std::string& corpus_arg, const std::string& out_arg) {
  const fs::path corpus_path = ctx.resolve(corpus_arg);
  const Corpus corpus = read_corpus_file(corpus_path);
  std::string lines;
  for (const auto& record : corpus.records) {
    lines += record.id + "\t" + std::string(to_string(assign_tissue_label(record))) + "\n";
  }
  const fs::path out_dir = ctx.resolve(out_arg);
  const std::string file = corpus.name + ".labels";
  write_text(out_dir / file, lines);
  RunManifest manifest = new_manifest(ctx, "label");
  manifest.inputs.push_back(input_entry(corpus_arg, corpus_path));
  manifest.outputs = {file};
  write_manifest(out_dir, manifest);
  *ctx.out << fmt::format("labelled {} records into {}\n", corpus.records.size(),
                          (out_dir / file).string());
  return 0;
}

int run_search(const Context& ctx, const std::string& corpus_arg, const std::string& query_text,
               bool strict_case, const std::string& out_arg) {
  const fs::path corpus_path = ctx.resolve(corpus_arg);
  const Corpus corpus = read_corpus_file(corpus_path);
  const MatchMode mode = strict_case ? MatchMode::StrictCase : MatchMode::Canonical;
  const SearchQuery query = parse_query(query_text, mode);
  const QueryResult result = execute(query, corpus, mode);
  std::string lines;
  for (const auto& id : result.retrieved_ids) lines += id + "\n";
  *ctx.out << lines;
  if (!out_arg.empty()) {
    const fs::path out_dir = ctx.resolve(out_arg);
    write_text(out_dir / "results.txt", lines);
    RunManifest manifest = new_manifest(ctx, "search");
    manifest.inputs.push_back(input_entry(corpus_arg, corpus_path));
    manifest.outputs = {"results.txt"};
    write_manifest(out_dir, manifest);
  }
  return 0;
}

int run_evaluate(const Context& ctx, const std::string& suite_arg, const std::string& out_arg,
                 const std::string& averaging) {
  const fs::path suite_path = ctx.resolve(suite_arg);
  EvaluationSuite suite = load_suite(suite_path);
  if (averaging == "macro") suite.options.averaging = Averaging::Macro;
  if (averaging == "micro") suite.options.averaging = Averaging::Micro;
  const CorpusGrid grid = load_suite_corpora(suite);
  const EvaluationReport report = evaluate_all(grid, suite.options);

  const fs::path out_dir = ctx.resolve(out_arg);
  write_text(out_dir / "report.json", report_to_json(report));
  write_text(out_dir / "cells.csv", report_cells_csv(report));
  write_text(out_dir / "plot.csv", report_plot_csv(report));

  RunManifest manifest = new_manifest(ctx, "evaluate");
  manifest.inputs.push_back(input_entry(suite_arg, suite_path));
  for (const auto& [key, path] : suite.corpora) {
    manifest.inputs.push_back(
        input_entry(fs::relative(path, suite_path.parent_path()).generic_string(), path));
  }
  manifest.outputs = {"report.json", "cells.csv", "plot.csv"};
  write_manifest(out_dir, manifest);

  for (const auto& summary : report.overall) {
    *ctx.out << fmt::format("{:<8} precision {:.4f}  recall {:.4f}  f1 {:.4f}\n",
                            to_string(summary.condition), summary.values.precision,
                            summary.values.recall, summary.values.f1);
  }
  return 0;
}

int run_serve(const Context& ctx, const std::string& data_dir, const std::string& listen,
              const std::string& cors_origin) {
  const auto [host, port] = parse_listen_address(listen);
  ServiceState state = ServiceState::load(ctx.resolve(data_dir));
  HttpService service(std::move(state), ServeOptions{host, port, cors_origin});
  const int bound = service.bind();
  *ctx.out << fmt::format("serving {} on http://{}:{}\n", ctx.resolve(data_dir).string(), host, bound)
           << std::flush;
  service.run();
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Metadata standardization and retrieval evaluation pipeline", "fairmeta"};
  app.require_subcommand(1);
  app.fallthrough();
  Context ctx;
  ctx.arguments = args;
  ctx.out = &out;
  ctx.err = &err;
  std::string workdir = ".";
  app.add_option("--workdir", workdir, "Directory that relative paths are resolved against");

  IngestArgs ingest;
  auto* ingest_cmd = app.add_subcommand("ingest", "Fetch raw records for one source/cohort");
  ingest_cmd->add_option("--source", ingest.source)->required()->check(CLI::IsMember(kSourceNames));
  ingest_cmd->add_option("--cohort", ingest.cohort)->required()->check(CLI::IsMember(kCohortNames));
  ingest_cmd->add_option("--limit", ingest.limit, "Records to fetch")->capture_default_str();
  ingest_cmd->add_option("--out-dir", ingest.out_dir)->required();
  ingest_cmd->add_option("--base-url", ingest.base_url, "E-utilities base URL");
  ingest_cmd->add_option("--fixture-dir", ingest.fixture_dir,
                         "Serve payloads from files in this directory instead of the network");
  ingest_cmd->add_option("--concurrency", ingest.concurrency)->capture_default_str()->check(CLI::PositiveNumber);

  SampleArgs sample;
  auto* sample_cmd = app.add_subcommand("sample", "Parse raw records and draw a seeded uniform sample");
  sample_cmd->add_option("--source", sample.source)->required()->check(CLI::IsMember(kSourceNames));
  sample_cmd->add_option("--cohort", sample.cohort)->required()->check(CLI::IsMember(kCohortNames));
  sample_cmd->add_option("--raw-dir", sample.raw_dir, "Directory of raw payload files")->required();
  sample_cmd->add_option("--ids", sample.ids_file, "Payload order (defaults to <raw-dir>.ids)");
  sample_cmd->add_option("--initial", sample.initial)->capture_default_str()->check(CLI::PositiveNumber);
  sample_cmd->add_option("--target", sample.target)->capture_default_str()->check(CLI::PositiveNumber);
  sample_cmd->add_option("--seed", sample.seed)->required();
  sample_cmd->add_option("--name", sample.name, "Corpus name (default <source>_<cohort>)");
  sample_cmd->add_option("--out-dir", sample.out_dir)->required();

  StandardizeArgs standardize;
  auto* standardize_cmd = app.add_subcommand("standardize", "Correct a corpus under DD or CEDAR guidance");
  standardize_cmd->add_option("--corpus", standardize.corpus)->required();
  standardize_cmd->add_option("--condition", standardize.condition)->required()->check(CLI::IsMember(kConditionNames));
  standardize_cmd->add_option("--backend", standardize.backend, "rule, replay, live, or a backend config .json")
      ->capture_default_str();
  standardize_cmd->add_option("--cache", standardize.cache, "Replay cache directory");
  standardize_cmd->add_option("--replay-mode", standardize.replay_mode)
      ->capture_default_str()
      ->check(CLI::IsMember({"strict", "capture"}));
  standardize_cmd->add_option("--endpoint", standardize.endpoint, "Chat completions URL (live backend)");
  standardize_cmd->add_option("--model", standardize.model);
  standardize_cmd->add_option("--template", standardize.template_path);
  standardize_cmd->add_option("--dictionary", standardize.dictionary_path);
  standardize_cmd->add_option("--prompts", standardize.prompts_path);
  standardize_cmd->add_option("--max-inflight", standardize.max_inflight)->check(CLI::PositiveNumber);
  standardize_cmd->add_option("--out-dir", standardize.out_dir)->required();

  std::string label_corpus;
  std::string label_out;
  auto* label_cmd = app.add_subcommand("label", "Write gold tissue labels for a corpus");
  label_cmd->add_option("--corpus", label_corpus)->required();
  label_cmd->add_option("--out-dir", label_out)->required();

  std::string search_corpus;
  std::string search_query;
  std::string search_out;
  bool strict_case = false;
  auto* search_cmd = app.add_subcommand("search", "Exact-match field:value search over a corpus");
  search_cmd->add_option("--corpus", search_corpus)->required();
  search_cmd->add_option("--query", search_query, "e.g. tissue:lung")->required();
  search_cmd->add_flag("--strict-case", strict_case, "Compare stored values byte for byte");
  search_cmd->add_option("--out-dir", search_out, "Also write results.txt and a manifest here");

  std::string suite_path;
  std::string evaluate_out;
  std::string averaging;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Evaluate a suite of corpora");
  evaluate_cmd->add_option("--suite", suite_path)->required();
  evaluate_cmd->add_option("--out-dir", evaluate_out)->required();
  evaluate_cmd->add_option("--averaging", averaging, "Override the suite's averaging")
      ->check(CLI::IsMember({"macro", "micro"}));

  std::string data_dir;
  std::string listen = "127.0.0.1:8080";
  std::string cors_origin = "*";
  auto* serve_cmd = app.add_subcommand("serve", "Serve corpora, search and reports over HTTP");
  serve_cmd->add_option("--data-dir", data_dir)->required();
  serve_cmd->add_option("--listen", listen)->capture_default_str();
  serve_cmd->add_option("--cors-origin", cors_origin)->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
    ctx.workdir = workdir;

    if (*ingest_cmd) return run_ingest(ctx, ingest);
    if (*sample_cmd) return run_sample(ctx, sample);
    if (*standardize_cmd) return run_standardize(ctx, standardize);
    if (*label_cmd) return run_label(ctx, label_corpus, label_out);
    if (*search_cmd) return run_search(ctx, search_corpus, search_query, strict_case, search_out);
    if (*evaluate_cmd) return run_evaluate(ctx, suite_path, evaluate_out, averaging);
    if (*serve_cmd) return run_serve(ctx, data_dir, listen, cors_origin);
    return 2;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  } catch (const InvalidQuery& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace fairmeta::cli
