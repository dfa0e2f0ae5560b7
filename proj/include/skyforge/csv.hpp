#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "skyforge/relation.hpp"

namespace skyforge {

/// Splits RFC-4180 text into records. Quoted fields may contain commas,
/// doubled quotes and line breaks; both LF and CRLF terminate records.
std::vector<std::vector<std::string>> parse_csv_records(std::string_view text);

/// First record is the header; empty fields are null. Each column is typed as
/// integer, then float, then string: the first type every non-null cell
/// parses as.
Relation parse_csv(std::string_view text, std::string name);
Relation read_csv(const std::filesystem::path& path, std::string name);

void write_csv(std::ostream& out, const Relation& rel);
void write_csv(const std::filesystem::path& path, const Relation& rel);

}  // namespace skyforge
