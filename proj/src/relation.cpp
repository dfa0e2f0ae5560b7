#include "skyforge/relation.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>
#include <set>
#include <unordered_set>

#include "skyforge/errors.hpp"

namespace skyforge {

bool is_numeric(const Cell& c) {
  return std::holds_alternative<std::int64_t>(c) || std::holds_alternative<double>(c);
}

double as_double(const Cell& c) {
  if (auto* i = std::get_if<std::int64_t>(&c)) return static_cast<double>(*i);
  if (auto* d = std::get_if<double>(&c)) return *d;
  throw ArgumentError("cell is not numeric");
}

std::string cell_text(const Cell& c) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::monostate>) {
          return {};
        } else if constexpr (std::is_same_v<T, std::string>) {
          return v;
        } else {
          char buf[64];
          auto res = std::to_chars(buf, buf + sizeof buf, v);
          return std::string(buf, res.ptr);
        }
      },
      c);
}

namespace {

int rank(const Cell& c) {
  if (is_null(c)) return 0;
  if (is_numeric(c)) return 1;
  return 2;
}

}  // namespace

bool cell_less(const Cell& a, const Cell& b) {
  int ra = rank(a), rb = rank(b);
  if (ra != rb) return ra < rb;
  if (ra == 1) return as_double(a) < as_double(b);
  if (ra == 2) return std::get<std::string>(a) < std::get<std::string>(b);
  return false;
}

bool cell_equal(const Cell& a, const Cell& b) {
  int ra = rank(a), rb = rank(b);
  if (ra != rb) return false;
  if (ra == 1) return as_double(a) == as_double(b);
  if (ra == 2) return std::get<std::string>(a) == std::get<std::string>(b);
  return true;
}

Relation::Relation(std::string name, std::vector<std::string> schema, std::vector<ColumnType> types,
                   std::vector<std::vector<Cell>> rows, std::vector<std::uint64_t> weights)
    : name_(std::move(name)),
      schema_(std::move(schema)),
      types_(std::move(types)),
      rows_(std::move(rows)),
      weights_(std::move(weights)) {
  if (types_.size() != schema_.size())
    throw ArgumentError("relation '" + name_ + "': type list does not match schema");
  std::unordered_set<std::string> seen;
  for (const auto& a : schema_)
    if (!seen.insert(a).second)
      throw SchemaConflictError("relation '" + name_ + "': duplicate attribute '" + a + "'");
  if (!weights_.empty() && weights_.size() != rows_.size())
    throw ArgumentError("relation '" + name_ + "': weight column length mismatch");
  for (const auto& row : rows_)
    if (row.size() != schema_.size())
      throw ArgumentError("relation '" + name_ + "': row arity does not match schema");

  adoms_.resize(schema_.size());
  for (std::size_t c = 0; c < schema_.size(); ++c) {
    std::vector<Cell> vals;
    for (const auto& row : rows_)
      if (!is_null(row[c])) vals.push_back(row[c]);
    std::sort(vals.begin(), vals.end(), cell_less);
    vals.erase(std::unique(vals.begin(), vals.end(), cell_equal), vals.end());
    adoms_[c] = std::move(vals);
  }
}

std::uint64_t Relation::total_weight() const {
  if (weights_.empty()) return rows_.size();
  return std::accumulate(weights_.begin(), weights_.end(), std::uint64_t{0});
}

std::optional<std::size_t> Relation::column_index(const std::string& attr) const {
  auto it = std::find(schema_.begin(), schema_.end(), attr);
  if (it == schema_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - schema_.begin());
}

const std::vector<Cell>& Relation::adom(const std::string& attr) const {
  auto idx = column_index(attr);
  if (!idx) throw ArgumentError("unknown attribute '" + attr + "' in relation '" + name_ + "'");
  return adoms_[*idx];
}

Relation expand_weights(const Relation& r) {
  if (r.weights().empty()) return r;
  std::vector<std::vector<Cell>> rows;
  rows.reserve(r.total_weight());
  for (std::size_t i = 0; i < r.num_rows(); ++i)
    for (std::uint64_t k = 0; k < r.weight(i); ++k) rows.push_back(r.rows()[i]);
  return Relation(r.name(), r.schema(), r.types(), std::move(rows));
}

}  // namespace skyforge
