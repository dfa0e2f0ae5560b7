#include "skyforge/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "skyforge/errors.hpp"

namespace skyforge {

std::vector<std::vector<std::string>> parse_csv_records(std::string_view text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;  // distinguishes a trailing empty record from ",\n"

  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    records.push_back(std::move(record));
    record.clear();
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    char ch = text[i];
    if (in_quotes) {
      if (ch == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(ch);
      }
      continue;
    }
    switch (ch) {
      case '"':
        if (!field.empty()) throw ParseError("csv: stray quote inside unquoted field");
        in_quotes = true;
        field_started = true;
        break;
      case ',':
        end_field();
        field_started = true;
        break;
      case '\r':
        if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
        end_record();
        break;
      case '\n':
        end_record();
        break;
      default:
        field.push_back(ch);
        field_started = true;
    }
  }
  if (in_quotes) throw ParseError("csv: unterminated quoted field");
  if (field_started || !field.empty() || !record.empty()) end_record();
  return records;
}

namespace {

bool parse_int(const std::string& s, std::int64_t& out) {
  auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc{} && res.ptr == s.data() + s.size();
}

bool parse_float(const std::string& s, double& out) {
  auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc{} && res.ptr == s.data() + s.size() && std::isfinite(out);
}

}  // namespace

Relation parse_csv(std::string_view text, std::string name) {
  auto records = parse_csv_records(text);
  if (records.empty()) throw ParseError("csv '" + name + "': missing header");
  std::vector<std::string> header = std::move(records.front());
  const std::size_t ncols = header.size();
  for (std::size_t r = 1; r < records.size(); ++r)
    if (records[r].size() != ncols)
      throw ParseError("csv '" + name + "': record " + std::to_string(r) + " has " +
                       std::to_string(records[r].size()) + " fields, expected " +
                       std::to_string(ncols));

  std::vector<ColumnType> types(ncols, ColumnType::String);
  for (std::size_t c = 0; c < ncols; ++c) {
    bool all_int = true, all_float = true, any = false;
    for (std::size_t r = 1; r < records.size(); ++r) {
      const auto& f = records[r][c];
      if (f.empty()) continue;
      any = true;
      std::int64_t i;
      double d;
      if (all_int && !parse_int(f, i)) all_int = false;
      if (all_float && !parse_float(f, d)) all_float = false;
      if (!all_int && !all_float) break;
    }
    if (any && all_int)
      types[c] = ColumnType::Integer;
    else if (any && all_float)
      types[c] = ColumnType::Float;
  }

  std::vector<std::vector<Cell>> rows;
  rows.reserve(records.size() - 1);
  for (std::size_t r = 1; r < records.size(); ++r) {
    std::vector<Cell> row(ncols);
    for (std::size_t c = 0; c < ncols; ++c) {
      auto& f = records[r][c];
      if (f.empty()) continue;
      switch (types[c]) {
        case ColumnType::Integer: {
          std::int64_t v = 0;
          parse_int(f, v);
          row[c] = v;
          break;
        }
        case ColumnType::Float: {
          double v = 0;
          parse_float(f, v);
          row[c] = v;
          break;
        }
        case ColumnType::String:
          row[c] = std::move(f);
      }
    }
    rows.push_back(std::move(row));
  }
  return Relation(std::move(name), std::move(header), std::move(types), std::move(rows));
}

Relation read_csv(const std::filesystem::path& path, std::string name) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArgumentError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str(), std::move(name));
}

namespace {

void write_field(std::ostream& out, const std::string& f) {
  if (f.find_first_of(",\"\r\n") == std::string::npos) {
    out << f;
    return;
  }
  out << '"';
  for (char ch : f) {
    if (ch == '"') out << '"';
    out << ch;
  }
  out << '"';
}

}  // namespace

void write_csv(std::ostream& out, const Relation& rel) {
  for (std::size_t c = 0; c < rel.num_cols(); ++c) {
    if (c) out << ',';
    write_field(out, rel.schema()[c]);
  }
  out << '\n';
  for (const auto& row : rel.rows()) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out << ',';
      write_field(out, cell_text(row[c]));
    }
    out << '\n';
  }
}

void write_csv(const std::filesystem::path& path, const Relation& rel) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArgumentError("cannot write '" + path.string() + "'");
  write_csv(out, rel);
}

}  // namespace skyforge
