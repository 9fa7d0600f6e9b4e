#pragma once

#include <string_view>

#include "fairmeta/record.hpp"

namespace fairmeta {

/// Parses a BioSample XML payload. Recognized pair sources, in document order:
///   - `<Organism taxonomy_name="...">` (or its text) -> organism
///   - `<Attribute attribute_name="n">v</Attribute>` -> n:v
///   - `<tr><td>n</td><td>v</td></tr>` rows of an attributes table -> n:v
/// The record id comes from an `accession` or `id` attribute on the root
/// element, else `fallback_id`.
/// Throws MalformedRecord on XML errors or when no pairs are found.
MetadataRecord parse_biosample_record(std::string_view xml_text, std::string_view fallback_id = {});

/// Parses line-oriented `key: value` / `key = value` text. Indented lines
/// continue the previous value. Lines without a separator are ignored.
/// Throws MalformedRecord when no pairs are found.
MetadataRecord parse_geo_record(std::string_view text, std::string_view fallback_id = {});

}  // namespace fairmeta
