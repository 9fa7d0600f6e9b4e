#include "fairmeta/gold_labeler.hpp"

#include <array>
#include <initializer_list>

#include "fairmeta/text.hpp"

namespace fairmeta {

namespace {

struct Rule {
  std::initializer_list<std::string_view> keywords;
  TissueLabel label;
};

// Keywords are lowercase; values are canonicalized before matching.
const std::array<Rule, 6> kRules{{
    {{"lung"}, TissueLabel::Lung},
    {{"liver", "hcc"}, TissueLabel::Liver},
    {{"ovary", "ovarian"}, TissueLabel::Ovary},
    {{"pbmc", "blood"}, TissueLabel::Blood},
    {{"plasma"}, TissueLabel::Plasma},
    {{"lymph"}, TissueLabel::Lymph},
}};

}  // namespace

std::string_view to_string(TissueLabel label) {
  switch (label) {
    case TissueLabel::Lung: return "lung";
    case TissueLabel::Liver: return "liver";
    case TissueLabel::Ovary: return "ovary";
    case TissueLabel::Blood: return "blood";
    case TissueLabel::Plasma: return "plasma";
    case TissueLabel::Lymph: return "lymph";
    case TissueLabel::Unknown: return "unknown";
  }
  return "unknown";
}

TissueLabel label_tissue_value(std::string_view tissue_value) {
  const std::string value = canonicalize(tissue_value);
  for (const auto& rule : kRules) {
    for (std::string_view keyword : rule.keywords) {
      if (value.find(keyword) != std::string::npos) return rule.label;
    }
  }
  return TissueLabel::Unknown;
}

TissueLabel assign_tissue_label(const MetadataRecord& record) {
  const FieldValuePair* tissue = find_field(record, "tissue");
  if (tissue == nullptr || tissue->missing()) return TissueLabel::Unknown;
  return label_tissue_value(*tissue->value);
}

std::optional<std::string> label_to_query_value(TissueLabel label) {
  switch (label) {
    case TissueLabel::Lung:
    case TissueLabel::Liver:
    case TissueLabel::Ovary:
    case TissueLabel::Blood:
      return std::string(to_string(label));
    default:
      return std::nullopt;
  }
}

std::optional<TissueLabel> query_value_to_label(std::string_view value) {
  const std::string canon = canonicalize(value);
  for (TissueLabel label : kAllTissueLabels) {
    if (auto query = label_to_query_value(label); query && *query == canon) return label;
  }
  return std::nullopt;
}

}  // namespace fairmeta
