#include <gtest/gtest.h>

#include <cstdlib>

#include "fairmeta/errors.hpp"
#include "fairmeta/manifest.hpp"
#include "fairmeta/suite.hpp"
#include "test_support.hpp"

using namespace fairmeta;
using testing_support::TempDir;

TEST(Suite, ParsesFixture) {
  const EvaluationSuite suite = load_suite(testing_support::fixture_suite() / "suite.toml");
  EXPECT_EQ(suite.name, "fixture");
  EXPECT_EQ(suite.options.averaging, Averaging::Macro);
  EXPECT_EQ(suite.corpora.size(), 18u);
  const auto path = suite.corpora.at({Source::GEO, Cohort::Ovarian, Condition::CEDAR});
  EXPECT_EQ(path, testing_support::fixture_suite() / "corpora" / "geo_ovarian.cedar.jsonl");
  EXPECT_EQ(load_suite_corpora(suite).size(), 18u);
}

TEST(Suite, OptionsAndQueries) {
  const EvaluationSuite suite = parse_suite(R"(
[suite]
name = "x"   # trailing comment
averaging = "micro"
match_mode = "strict_case"

[corpora.geo.liver]
baseline = "b.jsonl"

[queries]
liver = "tissue:Liver, tissue:blood"
)",
                                            "/base");
  EXPECT_EQ(suite.options.averaging, Averaging::Micro);
  EXPECT_EQ(suite.options.match_mode, MatchMode::StrictCase);
  const auto& queries = suite.options.queries.at(Cohort::Liver);
  ASSERT_EQ(queries.size(), 2u);
  EXPECT_EQ(queries[0].value, "Liver");
  EXPECT_EQ(suite.corpora.at({Source::GEO, Cohort::Liver, Condition::Baseline}), std::filesystem::path("/base/b.jsonl"));
}

TEST(Suite, RejectsUnknownStructure) {
  EXPECT_THROW(parse_suite("[suite]\nname = \"x\"\n", "/"), FormatError);
  EXPECT_THROW(parse_suite("[suite]\ncolor = \"red\"\n[corpora.geo.lung]\nbaseline = \"a\"\n", "/"), FormatError);
  EXPECT_THROW(parse_suite("[extras]\na = \"b\"\n[corpora.geo.lung]\nbaseline = \"a\"\n", "/"), FormatError);
  EXPECT_THROW(parse_suite("[corpora.geo.lung]\nraw = \"a\"\n", "/"), FormatError);
  EXPECT_THROW(parse_suite("[corpora.pubmed.lung]\nbaseline = \"a\"\n", "/"), FormatError);
  EXPECT_THROW(parse_suite("[suite]\naveraging = \"weighted\"\n[corpora.geo.lung]\nbaseline = \"a\"\n", "/"),
               FormatError);
}

TEST(Suite, HeaderMustMatchGridKey) {
  TempDir dir;
  std::filesystem::copy_file(testing_support::fixture_suite() / "corpora" / "geo_lung.dd.jsonl", dir / "c.jsonl");
  const EvaluationSuite suite = parse_suite("[corpora.geo.lung]\ncedar = \"c.jsonl\"\n", dir.path());
  EXPECT_THROW(load_suite_corpora(suite), FormatError);
}

TEST(Manifest, RoundTripAndEpoch) {
  setenv("SOURCE_DATE_EPOCH", "0", 1);
  EXPECT_EQ(manifest_timestamp(), "1970-01-01T00:00:00Z");
  unsetenv("SOURCE_DATE_EPOCH");
  EXPECT_EQ(manifest_timestamp().size(), 20u);

  TempDir dir;
  testing_support::spit(dir / "in.txt", "abc");
  RunManifest manifest;
  manifest.timestamp = "2026-10-16T00:00:00Z";
  manifest.command = "sample";
  manifest.arguments = {"--seed", "5"};
  manifest.seed = 5;
  manifest.inputs = {{"in.txt", file_sha256(dir / "in.txt")}};
  manifest.outputs = {"out.jsonl"};
  EXPECT_EQ(manifest.inputs[0].sha256, "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  write_manifest(dir.path(), manifest);
  const RunManifest back = read_manifest(dir.path());
  EXPECT_EQ(manifest_to_json(back), manifest_to_json(manifest));
  EXPECT_EQ(back.seed, 5u);
  EXPECT_FALSE(back.backend_config_digest);
  EXPECT_THROW(manifest_from_json("{"), FormatError);
}
