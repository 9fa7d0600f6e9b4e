#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "fairmeta/record.hpp"

namespace fairmeta {

enum class TissueLabel { Lung, Liver, Ovary, Blood, Plasma, Lymph, Unknown };

inline constexpr TissueLabel kAllTissueLabels[] = {
    TissueLabel::Lung,   TissueLabel::Liver, TissueLabel::Ovary,  TissueLabel::Blood,
    TissueLabel::Plasma, TissueLabel::Lymph, TissueLabel::Unknown};

std::string_view to_string(TissueLabel label);

/// Ordered keyword rules over a tissue value; matching is case-insensitive
/// substring containment. The first rule that fires wins.
TissueLabel label_tissue_value(std::string_view tissue_value);

/// Labels a record from its canonical "tissue" field only. Records without a
/// tissue value (absent or missing marker) are Unknown.
TissueLabel assign_tissue_label(const MetadataRecord& record);

/// Query value for the four searchable labels; nullopt otherwise.
std::optional<std::string> label_to_query_value(TissueLabel label);

/// Inverse of label_to_query_value.
std::optional<TissueLabel> query_value_to_label(std::string_view value);

}  // namespace fairmeta
