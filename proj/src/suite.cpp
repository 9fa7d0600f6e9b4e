#include "fairmeta/suite.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include <fstream>
#include <sstream>

#include "fairmeta/errors.hpp"
#include "fairmeta/text.hpp"

namespace fairmeta {

namespace {

std::string unquote(const std::string& raw, const std::string& where) {
  std::string value = trim(raw);
  if (value.size() >= 2 && value.front() == '"') {
    const auto close = value.find('"', 1);
    if (close == std::string::npos) throw FormatError("unterminated string at " + where);
    const std::string rest = trim(value.substr(close + 1));
    if (!rest.empty() && rest.front() != '#') {
      throw FormatError("unexpected text after string at " + where);
    }
    return value.substr(1, close - 1);
  }
  // Bare value: integers only, trailing comments allowed.
  const auto hash = value.find('#');
  if (hash != std::string::npos) value = trim(value.substr(0, hash));
  return value;
}

}  // namespace

EvaluationSuite parse_suite(std::string_view text, const std::filesystem::path& base_dir) {
  boost::property_tree::ptree tree;
  std::istringstream in{std::string(text)};
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw FormatError("suite file: " + e.message(), e.line());
  }

  EvaluationSuite suite;
  suite.base_dir = base_dir;
  std::map<Cohort, std::vector<std::string>> query_texts;
  for (const auto& [section, table] : tree) {
    if (table.empty()) {
      throw FormatError(fmt::format("suite file: key '{}' outside of a table", section));
    }
    const auto parts = split(section, ".");
    if (section == "suite") {
      for (const auto& [key, node] : table) {
        const std::string value = unquote(node.data(), section + "." + key);
        if (key == "name") {
          suite.name = value;
        } else if (key == "averaging") {
          if (value == "macro") suite.options.averaging = Averaging::Macro;
          else if (value == "micro") suite.options.averaging = Averaging::Micro;
          else throw FormatError("suite file: averaging must be macro or micro");
        } else if (key == "match_mode") {
          if (value == "canonical") suite.options.match_mode = MatchMode::Canonical;
          else if (value == "strict_case") suite.options.match_mode = MatchMode::StrictCase;
          else throw FormatError("suite file: match_mode must be canonical or strict_case");
        } else {
          throw FormatError("suite file: unknown key suite." + key);
        }
      }
    } else if (parts.size() == 3 && parts[0] == "corpora") {
      const Source source = parse_source(parts[1]);
      const Cohort cohort = parse_cohort(parts[2]);
      for (const auto& [key, node] : table) {
        const Condition condition = parse_condition(key);
        const std::string value = unquote(node.data(), section + "." + key);
        if (value.empty()) throw FormatError("suite file: empty path for " + section + "." + key);
        suite.corpora[{source, cohort, condition}] = base_dir / value;
      }
    } else if (section == "queries") {
      for (const auto& [key, node] : table) {
        const Cohort cohort = parse_cohort(key);
        std::vector<std::string> texts;
        for (const std::string& item : split(unquote(node.data(), "queries." + key), ",")) {
          if (!trim(item).empty()) texts.push_back(trim(item));
        }
        if (texts.empty()) throw FormatError("suite file: no queries for cohort " + key);
        query_texts[cohort] = std::move(texts);
      }
    } else {
      throw FormatError("suite file: unknown table [" + section + "]");
    }
  }
  for (const auto& [cohort, texts] : query_texts) {
    for (const std::string& item : texts) {
      suite.options.queries[cohort].push_back(parse_query(item, suite.options.match_mode));
    }
  }
  if (suite.corpora.empty()) throw FormatError("suite file lists no corpora");
  return suite;
}

EvaluationSuite load_suite(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open suite file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_suite(buffer.str(), path.parent_path());
}

CorpusGrid load_suite_corpora(const EvaluationSuite& suite) {
  CorpusGrid grid;
  for (const auto& [key, path] : suite.corpora) {
    Corpus corpus = read_corpus_file(path);
    const auto& [source, cohort, condition] = key;
    if (corpus.source != source || corpus.cohort != cohort || corpus.condition != condition) {
      throw FormatError(fmt::format("{} is a {}/{}/{} corpus but is listed as {}/{}/{}",
                                    path.string(), to_string(corpus.source),
                                    to_string(corpus.cohort), to_string(corpus.condition),
                                    to_string(source), to_string(cohort), to_string(condition)));
    }
    grid.emplace(key, std::move(corpus));
  }
  return grid;
}

}  // namespace fairmeta
