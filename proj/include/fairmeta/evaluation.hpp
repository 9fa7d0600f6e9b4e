#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "fairmeta/gold_labeler.hpp"
#include "fairmeta/record.hpp"
#include "fairmeta/search.hpp"

namespace fairmeta {

struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;

  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

struct MetricValues {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;

  friend bool operator==(const MetricValues&, const MetricValues&) = default;
};

ConfusionCounts compute_confusion(std::span<const std::string> retrieved,
                                  std::span<const std::string> relevant);

/// Precision, recall and their harmonic mean; any zero denominator yields 0.
MetricValues metrics(const ConfusionCounts& counts);

/// Unweighted mean of each component. Throws EmptyInput.
MetricValues macro_average(std::span<const MetricValues> values);

/// Ids (corpus order) of baseline records whose gold tissue label is the
/// query's label. Throws UnsupportedQuery for fields other than "tissue" or
/// values outside lung/liver/ovary/blood.
std::vector<std::string> relevant_set(const Corpus& baseline, const SearchQuery& query);

enum class Averaging { Macro, Micro };

std::string_view to_string(Averaging averaging);

struct EvaluationCell {
  Source source;
  Cohort cohort;
  Condition condition;
  SearchQuery query;
  ConfusionCounts counts;
  MetricValues values;
};

struct SourceSummary {
  Source source;
  Condition condition;
  MetricValues values;
};

struct ConditionSummary {
  Condition condition;
  MetricValues values;
};

struct StatComparison {
  Condition condition_a;
  Condition condition_b;
  std::size_t n_pairs = 0;
  // Empty when the paired differences have zero variance and non-zero mean.
  std::optional<double> t_statistic;
  std::optional<double> p_value;
  std::optional<double> cohens_d;
  int degrees_of_freedom = 0;
  std::string note;
};

struct EvaluationReport {
  Averaging averaging = Averaging::Macro;
  std::vector<EvaluationCell> cells;
  std::vector<SourceSummary> by_source;
  std::vector<ConditionSummary> overall;
  std::vector<StatComparison> comparisons;
  std::vector<std::string> footnotes;
};

using CorpusKey = std::tuple<Source, Cohort, Condition>;
using CorpusGrid = std::map<CorpusKey, Corpus>;

struct EvaluationOptions {
  Averaging averaging = Averaging::Macro;
  MatchMode match_mode = MatchMode::Canonical;
  // Per-cohort query override; cohorts not listed use cohort_queries().
  std::map<Cohort, std::vector<SearchQuery>> queries;
};

/// The cohort's organ query followed by tissue:blood.
std::vector<SearchQuery> cohort_queries(Cohort cohort);

/// Evaluates every (source, cohort) present in the grid under all three
/// conditions. Gold labels come from the Baseline corpus. Recall is compared
/// across conditions with paired t-tests over (source, cohort, query) cells.
/// Throws MissingCorpus if any condition is absent for a present (source, cohort).
EvaluationReport evaluate_all(const CorpusGrid& corpora, const EvaluationOptions& options = {});

/// Structured report (2-space indented JSON, reals rounded to 10 significant digits).
std::string report_to_json(const EvaluationReport& report);
/// One row per (source, cohort, condition, query).
std::string report_cells_csv(const EvaluationReport& report);
/// Condition x source x mean metric, plus an "overall" source row per condition.
std::string report_plot_csv(const EvaluationReport& report);

}  // namespace fairmeta
