#include "fairmeta/parsers.hpp"

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include <sstream>

#include "fairmeta/errors.hpp"
#include "fairmeta/text.hpp"

namespace fairmeta {

namespace pt = boost::property_tree;

namespace {

constexpr const char* kAttrKey = "<xmlattr>";

std::optional<std::string> xml_attribute(const pt::ptree& node, const char* name) {
  if (auto attrs = node.get_child_optional(kAttrKey)) {
    if (auto value = attrs->get_optional<std::string>(name)) return *value;
  }
  return std::nullopt;
}

std::string digest_id(std::string_view prefix, std::string_view text) {
  return std::string(prefix) + sha256_hex(text).substr(0, 16);
}

class BioSampleWalker {
 public:
  explicit BioSampleWalker(std::vector<FieldValuePair>& out) : out_(out) {}

  void visit(const std::string& tag, const pt::ptree& node) {
    const std::string name = canonicalize(tag);
    if (name == kAttrKey || name == "<xmlcomment>") return;
    if (name == "organism") {
      std::optional<std::string> value = xml_attribute(node, "taxonomy_name");
      if (!value) {
        if (auto child = node.get_optional<std::string>("OrganismName")) value = *child;
      }
      if (!value) value = node.data();
      add("organism", *value);
      return;
    }
    if (name == "attribute") {
      std::optional<std::string> field = xml_attribute(node, "attribute_name");
      if (!field) field = xml_attribute(node, "harmonized_name");
      if (!field) field = xml_attribute(node, "name");
      if (!field) throw MalformedRecord("<Attribute> without a name");
      add(*field, node.data());
      return;
    }
    if (name == "tr") {
      std::vector<std::string> cells;
      bool header = false;
      for (const auto& [child_tag, child] : node) {
        const std::string cell = canonicalize(child_tag);
        if (cell == "td") cells.push_back(child.data());
        if (cell == "th") header = true;
      }
      if (header) return;
      if (cells.size() != 2) {
        throw MalformedRecord("attribute row must hold exactly two cells");
      }
      add(cells[0], cells[1]);
      return;
    }
    for (const auto& [child_tag, child] : node) visit(child_tag, child);
  }

 private:
  void add(std::string_view field, std::string_view value) {
    out_.push_back(FieldValuePair::make(field, value));
  }

  std::vector<FieldValuePair>& out_;
};

}  // namespace

MetadataRecord parse_biosample_record(std::string_view xml_text, std::string_view fallback_id) {
  pt::ptree tree;
  try {
    std::istringstream in{std::string(xml_text)};
    pt::read_xml(in, tree, pt::xml_parser::trim_whitespace);
  } catch (const pt::xml_parser_error& e) {
    throw MalformedRecord(std::string("XML error: ") + e.what());
  }

  MetadataRecord record;
  record.source = Source::BioSample;
  record.raw = std::string(xml_text);

  BioSampleWalker walker(record.fields);
  std::optional<std::string> document_id;
  for (const auto& [tag, node] : tree) {
    if (!document_id) {
      document_id = xml_attribute(node, "accession");
      if (!document_id) document_id = xml_attribute(node, "id");
    }
    walker.visit(tag, node);
  }
  if (record.fields.empty()) {
    throw MalformedRecord("no attribute pairs found");
  }
  if (document_id && !trim(*document_id).empty()) {
    record.id = trim(*document_id);
  } else if (!fallback_id.empty()) {
    record.id = std::string(fallback_id);
  } else {
    record.id = digest_id("biosample-", xml_text);
  }
  return record;
}

MetadataRecord parse_geo_record(std::string_view text, std::string_view fallback_id) {
  struct Pending {
    std::string name;
    std::string value;
  };
  std::vector<Pending> pending;
  bool can_continue = false;

  for (const std::string& raw_line : split(text, "\n")) {
    std::string_view line = raw_line;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim(line).empty()) {
      can_continue = false;
      continue;
    }
    const bool indented = line.front() == ' ' || line.front() == '\t';
    if (indented && can_continue) {
      std::string& value = pending.back().value;
      std::string piece = trim(line);
      if (!value.empty()) value.push_back(' ');
      value += piece;
      continue;
    }
    const std::size_t sep = line.find_first_of(":=");
    if (sep == std::string_view::npos || canonicalize(line.substr(0, sep)).empty()) {
      can_continue = false;
      continue;
    }
    pending.push_back({std::string(line.substr(0, sep)), trim(line.substr(sep + 1))});
    can_continue = true;
  }

  if (pending.empty()) {
    throw MalformedRecord("no key/value lines found");
  }

  MetadataRecord record;
  record.source = Source::GEO;
  record.raw = std::string(text);
  for (const auto& entry : pending) {
    record.fields.push_back(FieldValuePair::make(entry.name, entry.value));
  }

  std::optional<std::string> document_id;
  for (const char* key : {"accession", "geo_accession", "id"}) {
    if (const FieldValuePair* pair = find_field(record, key); pair && pair->value) {
      document_id = *pair->value;
      break;
    }
  }
  if (document_id && !document_id->empty()) {
    record.id = *document_id;
  } else if (!fallback_id.empty()) {
    record.id = std::string(fallback_id);
  } else {
    record.id = digest_id("geo-", text);
  }
  return record;
}

}  // namespace fairmeta
