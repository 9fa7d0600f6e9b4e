#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include <random>

#include "fairmeta/errors.hpp"
#include "fairmeta/evaluation.hpp"
#include "fairmeta/suite.hpp"
#include "test_support.hpp"

using namespace fairmeta;
using testing_support::make_corpus;
using testing_support::make_record;

TEST(Confusion, SetArithmetic) {
  const std::vector<std::string> retrieved{"a", "b", "c"};
  const std::vector<std::string> relevant{"b", "c", "d", "e"};
  EXPECT_EQ(compute_confusion(retrieved, relevant), (ConfusionCounts{2, 1, 2}));
  EXPECT_EQ(compute_confusion(std::vector<std::string>{"a"}, std::vector<std::string>{"a"}),
            (ConfusionCounts{1, 0, 0}));
  EXPECT_EQ(compute_confusion({}, {}), (ConfusionCounts{0, 0, 0}));
}

TEST(Metrics, Examples) {
  const MetricValues m = metrics({2, 1, 2});
  EXPECT_NEAR(m.precision, 0.6667, 1e-4);
  EXPECT_NEAR(m.recall, 0.5, 1e-4);
  EXPECT_NEAR(m.f1, 0.5714, 1e-4);
  EXPECT_EQ(metrics({5, 0, 0}), (MetricValues{1.0, 1.0, 1.0}));
  EXPECT_EQ(metrics({0, 0, 3}), (MetricValues{0.0, 0.0, 0.0}));
  EXPECT_EQ(metrics({0, 4, 0}), (MetricValues{0.0, 0.0, 0.0}));
}

TEST(Metrics, F1LiesBetweenPrecisionAndRecall) {
  for (std::size_t tp = 1; tp <= 20; ++tp) {
    for (std::size_t fp = 0; fp <= 20; ++fp) {
      for (std::size_t fn = 0; fn <= 20; ++fn) {
        const MetricValues m = metrics({tp, fp, fn});
        EXPECT_LE(std::min(m.precision, m.recall), m.f1 + 1e-15);
        EXPECT_GE(std::max(m.precision, m.recall), m.f1 - 1e-15);
      }
    }
  }
}

TEST(MacroAverage, MeansAndEmpty) {
  const std::vector<MetricValues> two{{0.0, 0.2, 0.0}, {0.0, 0.6, 0.0}};
  EXPECT_NEAR(macro_average(two).recall, 0.4, 1e-15);
  const std::vector<MetricValues> one{{0.1, 0.2, 0.3}};
  EXPECT_EQ(macro_average(one), one[0]);
  EXPECT_THROW(macro_average(std::vector<MetricValues>{}), EmptyInput);
}

TEST(RelevantSet, UsesGoldLabels) {
  // Gold labels: lung, lung, blood, unknown, liver, lung.
  const Corpus corpus = make_corpus(
      "c", Condition::Baseline,
      {make_record("1", {{"tissue", "lung"}}), make_record("2", {{"tissue", "lung cancer"}}),
       make_record("3", {{"tissue", "PBMC"}}), make_record("4", {{"tissue", "tumor"}}),
       make_record("5", {{"tissue", "HCC"}}), make_record("6", {{"tissue", "Lung tissue"}})});
  EXPECT_EQ(relevant_set(corpus, {"tissue", "lung"}), (std::vector<std::string>{"1", "2", "6"}));
  EXPECT_EQ(relevant_set(corpus, {"tissue", "ovary"}), std::vector<std::string>{});
  EXPECT_THROW(relevant_set(corpus, {"tissue", "plasma"}), UnsupportedQuery);
  EXPECT_THROW(relevant_set(corpus, {"disease", "lung"}), UnsupportedQuery);
}

namespace {

CorpusGrid grid_with(const std::vector<MetadataRecord>& base, const std::vector<MetadataRecord>& dd,
                     const std::vector<MetadataRecord>& cedar) {
  CorpusGrid grid;
  grid[{Source::BioSample, Cohort::Lung, Condition::Baseline}] = make_corpus("b", Condition::Baseline, base);
  grid[{Source::BioSample, Cohort::Lung, Condition::DD}] = make_corpus("b", Condition::DD, dd);
  grid[{Source::BioSample, Cohort::Lung, Condition::CEDAR}] = make_corpus("b", Condition::CEDAR, cedar);
  return grid;
}

std::vector<MetadataRecord> tissues(const std::vector<std::string>& values, const std::string& prefix = "r") {
  std::vector<MetadataRecord> records;
  for (std::size_t i = 0; i < values.size(); ++i) {
    records.push_back(make_record(prefix + std::to_string(i), {{"tissue", values[i]}}));
  }
  return records;
}

}  // namespace

TEST(EvaluateAll, MissingCorpus) {
  CorpusGrid grid = grid_with(tissues({"lung"}), tissues({"lung"}), tissues({"lung"}));
  grid.erase({Source::BioSample, Cohort::Lung, Condition::CEDAR});
  EXPECT_THROW(evaluate_all(grid), MissingCorpus);
}

TEST(EvaluateAll, IdenticalConditionsGiveNullEffects) {
  const auto records = tissues({"lung", "lung cancer", "blood", "PBMC"});
  const EvaluationReport report = evaluate_all(grid_with(records, records, records));
  ASSERT_EQ(report.cells.size(), 6u);
  for (const auto& comparison : report.comparisons) {
    EXPECT_EQ(comparison.t_statistic, 0.0);
    EXPECT_EQ(comparison.p_value, 1.0);
    EXPECT_EQ(comparison.cohens_d, 0.0);
    EXPECT_EQ(comparison.n_pairs, 2u);
    EXPECT_EQ(comparison.degrees_of_freedom, 1);
  }
  for (const auto& summary : report.overall) EXPECT_EQ(summary.values, report.overall[0].values);
}

TEST(EvaluateAll, ConstantImprovementIsDegenerate) {
  const EvaluationReport report = evaluate_all(
      grid_with(tissues({"lung cancer", "lung", "PBMC", "blood"}), tissues({"lung", "lung", "blood", "blood"}),
                tissues({"lung", "lung", "blood", "blood"})));
  // Both queries gain 0.5 recall from baseline to DD.
  EXPECT_FALSE(report.comparisons[0].t_statistic.has_value());
  EXPECT_EQ(report.comparisons[0].note, "degenerate variance: every paired difference is identical");
  EXPECT_EQ(report.comparisons[1].t_statistic, 0.0);
}

TEST(EvaluateAll, FootnotesForZeroDenominators) {
  const EvaluationReport report =
      evaluate_all(grid_with(tissues({"lung"}), tissues({"NA"}), tissues({"lung"})));
  const auto& notes = report.footnotes;
  EXPECT_NE(std::find(notes.begin(), notes.end(),
                      "precision zero denominator set to 0: biosample/lung/dd/tissue:lung"),
            notes.end());
  EXPECT_NE(std::find(notes.begin(), notes.end(),
                      "recall zero denominator set to 0: biosample/lung/baseline/tissue:blood"),
            notes.end());
}

TEST(EvaluateAll, MicroAveragingSumsCounts) {
  EvaluationOptions options;
  options.averaging = Averaging::Micro;
  const EvaluationReport report = evaluate_all(
      grid_with(tissues({"lung", "lung cancer", "lung", "PBMC"}), tissues({"lung", "NA", "lung", "PBMC"}),
                tissues({"lung", "lung", "lung", "blood"})),
      options);
  // baseline: lung query tp=2 fn=1, blood query tp=0 fn=1 -> recall 2/4
  EXPECT_DOUBLE_EQ(report.by_source[0].values.recall, 0.5);
  EXPECT_DOUBLE_EQ(report.overall[2].values.recall, 1.0);
}

TEST(EvaluateAll, QueryOverride) {
  EvaluationOptions options;
  options.queries[Cohort::Lung] = {SearchQuery{"tissue", "blood"}};
  const auto records = tissues({"blood", "lung"});
  const EvaluationReport report = evaluate_all(grid_with(records, records, records), options);
  ASSERT_EQ(report.cells.size(), 3u);
  EXPECT_EQ(report.cells[0].query.value, "blood");
}

// Property: replacing some records' tissue value by their gold query value
// never lowers recall for that query.
TEST(EvaluateAll, CorrectingTowardsGoldIsMonotone) {
  std::mt19937_64 rng(77);
  const std::vector<std::string> pool{"lung", "lung cancer", "Lung tissue", "PBMC", "blood", "whole blood",
                                      "HCC", "tumor", "plasma", "NA"};
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::string> values;
    for (int i = 0; i < 15; ++i) values.push_back(pool[rng() % pool.size()]);
    std::vector<std::string> edited = values;
    std::vector<std::string> more = values;
    for (std::size_t i = 0; i < values.size(); ++i) {
      const auto label = label_to_query_value(label_tissue_value(values[i]));
      if (label && rng() % 2) edited[i] = *label;
      more[i] = edited[i];
      if (label && rng() % 2) more[i] = *label;
    }
    const EvaluationReport report =
        evaluate_all(grid_with(tissues(values), tissues(edited), tissues(more)));
    for (std::size_t q = 0; q < report.cells.size(); q += 3) {
      EXPECT_LE(report.cells[q].values.recall, report.cells[q + 1].values.recall);
      EXPECT_LE(report.cells[q + 1].values.recall, report.cells[q + 2].values.recall);
    }
  }
}

// Property: duplicating every record with fresh ids leaves metrics unchanged.
TEST(EvaluateAll, ScaleFree) {
  std::mt19937_64 rng(8);
  const std::vector<std::string> pool{"lung", "lung cancer", "PBMC", "blood", "tumor", "NA", "liver"};
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::string> a, b, c;
    for (int i = 0; i < 12; ++i) {
      a.push_back(pool[rng() % pool.size()]);
      b.push_back(pool[rng() % pool.size()]);
      c.push_back(pool[rng() % pool.size()]);
    }
    auto doubled = [](const std::vector<std::string>& v) {
      auto records = tissues(v);
      auto copies = tissues(v, "dup");
      records.insert(records.end(), copies.begin(), copies.end());
      return records;
    };
    const EvaluationReport single = evaluate_all(grid_with(tissues(a), tissues(b), tissues(c)));
    const EvaluationReport twice = evaluate_all(grid_with(doubled(a), doubled(b), doubled(c)));
    ASSERT_EQ(single.cells.size(), twice.cells.size());
    for (std::size_t i = 0; i < single.cells.size(); ++i) {
      EXPECT_EQ(single.cells[i].values, twice.cells[i].values);
    }
  }
}

TEST(EvaluateAll, RecallMatchesDirectSetComputation) {
  const EvaluationSuite suite = load_suite(testing_support::fixture_suite() / "suite.toml");
  const CorpusGrid grid = load_suite_corpora(suite);
  const EvaluationReport report = evaluate_all(grid, suite.options);
  EXPECT_EQ(report.cells.size(), 36u);
  for (const auto& cell : report.cells) {
    const auto relevant = relevant_set(grid.at({cell.source, cell.cohort, Condition::Baseline}), cell.query);
    const auto retrieved = execute(cell.query, grid.at({cell.source, cell.cohort, cell.condition})).retrieved_ids;
    std::size_t both = 0;
    for (const auto& id : retrieved) both += std::count(relevant.begin(), relevant.end(), id);
    const double direct = relevant.empty() ? 0.0 : static_cast<double>(both) / static_cast<double>(relevant.size());
    EXPECT_DOUBLE_EQ(cell.values.recall, direct);
    EXPECT_EQ(cell.counts.tp + cell.counts.fp, retrieved.size());
    EXPECT_EQ(cell.counts.tp + cell.counts.fn, relevant.size());
  }
}

TEST(Report, CsvAndJsonShapes) {
  const auto records = tissues({"lung", "blood"});
  const EvaluationReport report = evaluate_all(grid_with(records, records, records));
  const auto doc = nlohmann::json::parse(report_to_json(report));
  EXPECT_EQ(doc["averaging"], "macro");
  EXPECT_EQ(doc["cells"].size(), 6u);
  EXPECT_EQ(doc["comparisons"][0]["metric"], "recall");
  const std::string csv = report_cells_csv(report);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "source,cohort,condition,query,tp,fp,fn,precision,recall,f1");
  EXPECT_NE(csv.find("biosample,lung,cedar,tissue:blood,1,0,0,1,1,1\n"), std::string::npos);
  EXPECT_NE(report_plot_csv(report).find("cedar,overall,1,1,1\n"), std::string::npos);
}
