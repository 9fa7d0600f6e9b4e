#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "fairmeta/backends.hpp"
#include "fairmeta/errors.hpp"
#include "fairmeta/evaluation.hpp"
#include "fairmeta/gold_labeler.hpp"
#include "fairmeta/record.hpp"
#include "fairmeta/schema.hpp"
#include "fairmeta/search.hpp"
#include "fairmeta/standardizer.hpp"
#include "fairmeta/stats.hpp"
#include "fairmeta/suite.hpp"
#include "fairmeta/text.hpp"

namespace py = pybind11;
using namespace fairmeta;

namespace {

py::dict record_to_dict(const MetadataRecord& record) {
  py::list fields;
  for (const auto& pair : record.fields) {
    fields.append(py::make_tuple(pair.name, pair.value ? py::cast(*pair.value) : py::none()));
  }
  py::dict out;
  out["id"] = record.id;
  out["source"] = std::string(to_string(record.source));
  out["fields"] = fields;
  out["flags"] = record.flags;
  return out;
}

}  // namespace

PYBIND11_MODULE(_fairmeta, m) {
  m.doc() = "Metadata standardization and retrieval evaluation core";

  auto error = py::register_exception<Error>(m, "FairmetaError");
  py::register_exception<InvalidQuery>(m, "InvalidQuery", error.ptr());
  py::register_exception<FormatError>(m, "FormatError", error.ptr());
  py::register_exception<MalformedRecord>(m, "MalformedRecord", error.ptr());
  py::register_exception<DegenerateVariance>(m, "DegenerateVariance", error.ptr());
  py::register_exception<TooFewPairs>(m, "TooFewPairs", error.ptr());
  py::register_exception<LengthMismatch>(m, "LengthMismatch", error.ptr());
  py::register_exception<MissingCorpus>(m, "MissingCorpus", error.ptr());

  m.def("canonicalize", [](const std::string& text) { return canonicalize(text); }, py::arg("text"));
  m.def("canonical_field_name", [](const std::string& name) { return canonical_field_name(name); }, py::arg("name"));
  m.def("tissue_label", [](const std::string& value) { return std::string(to_string(label_tissue_value(value))); },
        py::arg("tissue_value"), "Gold tissue label for a raw tissue value.");

  py::class_<ConfusionCounts>(m, "ConfusionCounts")
      .def(py::init([](std::size_t tp, std::size_t fp, std::size_t fn) { return ConfusionCounts{tp, fp, fn}; }),
           py::arg("tp"), py::arg("fp"), py::arg("fn"))
      .def_readwrite("tp", &ConfusionCounts::tp)
      .def_readwrite("fp", &ConfusionCounts::fp)
      .def_readwrite("fn", &ConfusionCounts::fn)
      .def("__eq__", [](const ConfusionCounts& a, const ConfusionCounts& b) { return a == b; })
      .def("__repr__", [](const ConfusionCounts& c) {
        return "ConfusionCounts(tp=" + std::to_string(c.tp) + ", fp=" + std::to_string(c.fp) +
               ", fn=" + std::to_string(c.fn) + ")";
      });

  m.def("confusion", [](const std::vector<std::string>& retrieved, const std::vector<std::string>& relevant) {
    return compute_confusion(retrieved, relevant);
  }, py::arg("retrieved"), py::arg("relevant"));
  m.def("metrics", [](const ConfusionCounts& counts) {
    const MetricValues v = metrics(counts);
    return py::dict(py::arg("precision") = v.precision, py::arg("recall") = v.recall, py::arg("f1") = v.f1);
  }, py::arg("counts"));

  m.def("paired_t_test", [](const std::vector<double>& a, const std::vector<double>& b) {
    const TTestResult r = paired_t_test(a, b);
    return py::dict(py::arg("t") = r.t_statistic, py::arg("p") = r.p_value, py::arg("dof") = r.degrees_of_freedom);
  }, py::arg("a"), py::arg("b"));
  m.def("cohens_d_paired", [](const std::vector<double>& a, const std::vector<double>& b) {
    return cohens_d_paired(a, b);
  }, py::arg("a"), py::arg("b"));

  py::class_<Corpus>(m, "Corpus")
      .def_static("read", &read_corpus_file, py::arg("path"))
      .def_static("loads", [](const std::string& text) { return deserialize_corpus(text); }, py::arg("text"))
      .def("dumps", [](const Corpus& c) { return serialize_corpus(c); })
      .def_readonly("name", &Corpus::name)
      .def_property_readonly("source", [](const Corpus& c) { return std::string(to_string(c.source)); })
      .def_property_readonly("cohort", [](const Corpus& c) { return std::string(to_string(c.cohort)); })
      .def_property_readonly("condition", [](const Corpus& c) { return std::string(to_string(c.condition)); })
      .def_readonly("seed", &Corpus::seed)
      .def("__len__", [](const Corpus& c) { return c.records.size(); })
      .def("records", [](const Corpus& c) {
        py::list out;
        for (const auto& record : c.records) out.append(record_to_dict(record));
        return out;
      })
      .def("search", [](const Corpus& c, const std::string& query, bool strict_case) {
        const MatchMode mode = strict_case ? MatchMode::StrictCase : MatchMode::Canonical;
        return execute(parse_query(query, mode), c, mode).retrieved_ids;
      }, py::arg("query"), py::arg("strict_case") = false)
      .def("relevant", [](const Corpus& c, const std::string& query) {
        return relevant_set(c, parse_query(query));
      }, py::arg("query"), "Ids whose gold label matches the query (baseline corpora).");

  m.def("standardize_rule", [](const Corpus& corpus, const std::string& condition,
                               const std::filesystem::path& template_path,
                               const std::filesystem::path& dictionary_path) {
    const MetadataTemplate tpl = load_template(template_path);
    const DataDictionary dictionary = load_data_dictionary(dictionary_path);
    RuleBackend backend(tpl, dictionary);
    py::gil_scoped_release release;
    return standardize_batch(corpus, parse_condition(condition), backend, {&dictionary, &tpl}).corpus;
  }, py::arg("corpus"), py::arg("condition"), py::arg("template_path"), py::arg("dictionary_path"),
     "Standardizes a corpus with the deterministic rule backend.");

  m.def("evaluate_suite", [](const std::filesystem::path& suite_path) {
    const EvaluationSuite suite = load_suite(suite_path);
    const CorpusGrid grid = load_suite_corpora(suite);
    return report_to_json(evaluate_all(grid, suite.options));
  }, py::arg("suite_path"), "Evaluates a suite file and returns the report as JSON text.");
}
