#include "fairmeta/evaluation.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <cmath>
#include <set>
#include <string>
#include <unordered_set>

#include "fairmeta/errors.hpp"
#include "fairmeta/stats.hpp"

namespace fairmeta {

using json = nlohmann::ordered_json;

namespace {

std::string cell_path(Source source, Cohort cohort, Condition condition, const SearchQuery& query) {
  return fmt::format("{}/{}/{}/{}", to_string(source), to_string(cohort), to_string(condition),
                     to_string(query));
}

MetricValues micro_metrics(const std::vector<const EvaluationCell*>& cells) {
  ConfusionCounts total;
  for (const auto* cell : cells) {
    total.tp += cell->counts.tp;
    total.fp += cell->counts.fp;
    total.fn += cell->counts.fn;
  }
  return metrics(total);
}

// Mean over queries within each cohort, then over cohorts.
MetricValues macro_over_cohorts(const std::vector<const EvaluationCell*>& cells) {
  std::vector<MetricValues> per_cohort;
  for (Cohort cohort : kAllCohorts) {
    std::vector<MetricValues> per_query;
    for (const auto* cell : cells) {
      if (cell->cohort == cohort) per_query.push_back(cell->values);
    }
    if (!per_query.empty()) per_cohort.push_back(macro_average(per_query));
  }
  return macro_average(per_cohort);
}

double round10(double value) {
  return std::stod(fmt::format("{:.10g}", value));
}

json real(double value) { return json(round10(value)); }

json optional_real(const std::optional<double>& value) {
  return value ? real(*value) : json(nullptr);
}

json metric_fields(json object, const MetricValues& values) {
  object["precision"] = real(values.precision);
  object["recall"] = real(values.recall);
  object["f1"] = real(values.f1);
  return object;
}

std::string csv_real(double value) { return fmt::format("{:.10g}", value); }

}  // namespace

ConfusionCounts compute_confusion(std::span<const std::string> retrieved,
                                  std::span<const std::string> relevant) {
  const std::unordered_set<std::string> retrieved_set(retrieved.begin(), retrieved.end());
  const std::unordered_set<std::string> relevant_set(relevant.begin(), relevant.end());
  ConfusionCounts counts;
  for (const auto& id : retrieved_set) {
    if (relevant_set.contains(id)) {
      ++counts.tp;
    } else {
      ++counts.fp;
    }
  }
  for (const auto& id : relevant_set) {
    if (!retrieved_set.contains(id)) ++counts.fn;
  }
  return counts;
}

MetricValues metrics(const ConfusionCounts& counts) {
  MetricValues values;
  const double tp = static_cast<double>(counts.tp);
  if (counts.tp + counts.fp > 0) values.precision = tp / static_cast<double>(counts.tp + counts.fp);
  if (counts.tp + counts.fn > 0) values.recall = tp / static_cast<double>(counts.tp + counts.fn);
  const double sum = values.precision + values.recall;
  if (sum > 0.0) values.f1 = 2.0 * values.precision * values.recall / sum;
  return values;
}

MetricValues macro_average(std::span<const MetricValues> values) {
  if (values.empty()) throw EmptyInput("cannot average an empty list of metrics");
  MetricValues mean;
  for (const auto& v : values) {
    mean.precision += v.precision;
    mean.recall += v.recall;
    mean.f1 += v.f1;
  }
  const double n = static_cast<double>(values.size());
  mean.precision /= n;
  mean.recall /= n;
  mean.f1 /= n;
  return mean;
}

std::vector<std::string> relevant_set(const Corpus& baseline, const SearchQuery& query) {
  if (query.field != "tissue") {
    throw UnsupportedQuery("gold labels exist only for the tissue field");
  }
  const std::optional<TissueLabel> target = query_value_to_label(query.value);
  if (!target) {
    throw UnsupportedQuery("no gold label corresponds to '" + query.value + "'");
  }
  std::vector<std::string> ids;
  for (const auto& record : baseline.records) {
    if (assign_tissue_label(record) == *target) ids.push_back(record.id);
  }
  return ids;
}

std::string_view to_string(Averaging averaging) {
  return averaging == Averaging::Macro ? "macro" : "micro";
}

std::vector<SearchQuery> cohort_queries(Cohort cohort) {
  std::string organ;
  switch (cohort) {
    case Cohort::Lung: organ = "lung"; break;
    case Cohort::Liver: organ = "liver"; break;
    case Cohort::Ovarian: organ = "ovary"; break;
  }
  return {SearchQuery{"tissue", organ}, SearchQuery{"tissue", "blood"}};
}

EvaluationReport evaluate_all(const CorpusGrid& corpora, const EvaluationOptions& options) {
  EvaluationReport report;
  report.averaging = options.averaging;

  std::set<std::pair<Source, Cohort>> groups;
  for (const auto& [key, corpus] : corpora) {
    groups.emplace(std::get<0>(key), std::get<1>(key));
  }
  for (const auto& [source, cohort] : groups) {
    for (Condition condition : kAllConditions) {
      if (!corpora.contains({source, cohort, condition})) {
        throw MissingCorpus(fmt::format("no {} corpus for {}/{}", to_string(condition),
                                        to_string(source), to_string(cohort)));
      }
    }
  }

  for (const auto& [source, cohort] : groups) {
    const Corpus& baseline = corpora.at({source, cohort, Condition::Baseline});
    const auto custom = options.queries.find(cohort);
    const std::vector<SearchQuery> queries =
        custom != options.queries.end() ? custom->second : cohort_queries(cohort);
    for (const SearchQuery& query : queries) {
      const std::vector<std::string> relevant = relevant_set(baseline, query);
      for (Condition condition : kAllConditions) {
        const Corpus& corpus = corpora.at({source, cohort, condition});
        const QueryResult result = execute(query, corpus, options.match_mode);
        EvaluationCell cell{source, cohort, condition, query, {}, {}};
        cell.counts = compute_confusion(result.retrieved_ids, relevant);
        cell.values = metrics(cell.counts);
        const std::string path = cell_path(source, cohort, condition, query);
        if (cell.counts.tp + cell.counts.fp == 0) {
          report.footnotes.push_back("precision zero denominator set to 0: " + path);
        }
        if (cell.counts.tp + cell.counts.fn == 0) {
          report.footnotes.push_back("recall zero denominator set to 0: " + path);
        }
        report.cells.push_back(std::move(cell));
      }
    }
  }

  std::set<Source> sources;
  for (const auto& group : groups) sources.insert(group.first);

  for (Source source : sources) {
    for (Condition condition : kAllConditions) {
      std::vector<const EvaluationCell*> selected;
      for (const auto& cell : report.cells) {
        if (cell.source == source && cell.condition == condition) selected.push_back(&cell);
      }
      const MetricValues values = options.averaging == Averaging::Macro
                                      ? macro_over_cohorts(selected)
                                      : micro_metrics(selected);
      report.by_source.push_back({source, condition, values});
    }
  }

  for (Condition condition : kAllConditions) {
    MetricValues values;
    if (options.averaging == Averaging::Macro) {
      std::vector<MetricValues> per_source;
      for (const auto& summary : report.by_source) {
        if (summary.condition == condition) per_source.push_back(summary.values);
      }
      if (!per_source.empty()) values = macro_average(per_source);
    } else {
      std::vector<const EvaluationCell*> selected;
      for (const auto& cell : report.cells) {
        if (cell.condition == condition) selected.push_back(&cell);
      }
      values = micro_metrics(selected);
    }
    report.overall.push_back({condition, values});
  }

  constexpr std::pair<Condition, Condition> kComparisons[] = {
      {Condition::Baseline, Condition::DD},
      {Condition::DD, Condition::CEDAR},
      {Condition::Baseline, Condition::CEDAR},
  };
  for (const auto& [first, second] : kComparisons) {
    std::vector<double> a;
    std::vector<double> b;
    for (const auto& cell : report.cells) {
      if (cell.condition == first) a.push_back(cell.values.recall);
      if (cell.condition == second) b.push_back(cell.values.recall);
    }
    StatComparison comparison;
    comparison.condition_a = first;
    comparison.condition_b = second;
    comparison.n_pairs = a.size();
    comparison.degrees_of_freedom = static_cast<int>(a.size()) - 1;
    try {
      const TTestResult test = paired_t_test(a, b);
      comparison.t_statistic = test.t_statistic;
      comparison.p_value = test.p_value;
      comparison.cohens_d = cohens_d_paired(a, b);
    } catch (const DegenerateVariance&) {
      comparison.note = "degenerate variance: every paired difference is identical";
    } catch (const TooFewPairs&) {
      comparison.note = "too few pairs";
    }
    report.comparisons.push_back(std::move(comparison));
  }
  return report;
}

std::string report_to_json(const EvaluationReport& report) {
  json root;
  root["averaging"] = to_string(report.averaging);

  json cells = json::array();
  for (const auto& cell : report.cells) {
    json object;
    object["source"] = to_string(cell.source);
    object["cohort"] = to_string(cell.cohort);
    object["condition"] = to_string(cell.condition);
    object["query"] = to_string(cell.query);
    object["tp"] = cell.counts.tp;
    object["fp"] = cell.counts.fp;
    object["fn"] = cell.counts.fn;
    cells.push_back(metric_fields(std::move(object), cell.values));
  }
  root["cells"] = std::move(cells);

  json by_source = json::array();
  for (const auto& summary : report.by_source) {
    json object;
    object["source"] = to_string(summary.source);
    object["condition"] = to_string(summary.condition);
    by_source.push_back(metric_fields(std::move(object), summary.values));
  }
  root["by_source"] = std::move(by_source);

  json overall = json::array();
  for (const auto& summary : report.overall) {
    json object;
    object["condition"] = to_string(summary.condition);
    overall.push_back(metric_fields(std::move(object), summary.values));
  }
  root["overall"] = std::move(overall);

  json comparisons = json::array();
  for (const auto& comparison : report.comparisons) {
    json object;
    object["condition_a"] = to_string(comparison.condition_a);
    object["condition_b"] = to_string(comparison.condition_b);
    object["metric"] = "recall";
    object["n_pairs"] = comparison.n_pairs;
    object["t_statistic"] = optional_real(comparison.t_statistic);
    object["p_value"] = optional_real(comparison.p_value);
    object["degrees_of_freedom"] = comparison.degrees_of_freedom;
    object["cohens_d"] = optional_real(comparison.cohens_d);
    object["note"] = comparison.note;
    comparisons.push_back(std::move(object));
  }
  root["comparisons"] = std::move(comparisons);
  root["footnotes"] = report.footnotes;
  return root.dump(2) + "\n";
}

std::string report_cells_csv(const EvaluationReport& report) {
  std::string out = "source,cohort,condition,query,tp,fp,fn,precision,recall,f1\n";
  for (const auto& cell : report.cells) {
    out += fmt::format("{},{},{},{},{},{},{},{},{},{}\n", to_string(cell.source),
                       to_string(cell.cohort), to_string(cell.condition), to_string(cell.query),
                       cell.counts.tp, cell.counts.fp, cell.counts.fn, csv_real(cell.values.precision),
                       csv_real(cell.values.recall), csv_real(cell.values.f1));
  }
  return out;
}

std::string report_plot_csv(const EvaluationReport& report) {
  std::string out = "condition,source,precision,recall,f1\n";
  for (const auto& summary : report.by_source) {
    out += fmt::format("{},{},{},{},{}\n", to_string(summary.condition), to_string(summary.source),
                       csv_real(summary.values.precision), csv_real(summary.values.recall),
                       csv_real(summary.values.f1));
  }
  for (const auto& summary : report.overall) {
    out += fmt::format("{},overall,{},{},{}\n", to_string(summary.condition),
                       csv_real(summary.values.precision), csv_real(summary.values.recall),
                       csv_real(summary.values.f1));
  }
  return out;
}

}  // namespace fairmeta
