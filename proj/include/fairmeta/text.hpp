#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace fairmeta {

/// Trim, lowercase (ASCII), collapse internal whitespace runs to one space.
std::string canonicalize(std::string_view text);

/// canonicalize() plus the field-name synonym map ("tissue type" -> "tissue").
std::string canonical_field_name(std::string_view name);

std::string trim(std::string_view text);

/// True for the literal "NA" in any case, surrounding whitespace ignored.
bool is_missing_marker(std::string_view value);

inline constexpr std::string_view kMissingMarker = "NA";

/// Splits on every occurrence of `separator`; empty pieces are kept.
std::vector<std::string> split(std::string_view text, std::string_view separator);

std::string sha256_hex(std::string_view bytes);

}  // namespace fairmeta
