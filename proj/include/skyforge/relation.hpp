#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace skyforge {

/// A table cell. `std::monostate` is null.
using Cell = std::variant<std::monostate, std::int64_t, double, std::string>;

inline bool is_null(const Cell& c) { return std::holds_alternative<std::monostate>(c); }
bool is_numeric(const Cell& c);
double as_double(const Cell& c);

/// Canonical text of a cell; numbers print in shortest round-trip form so
/// that 1 and 1.0 share a key. Null prints as the empty string.
std::string cell_text(const Cell& c);

/// Total order used for active domains: null < numbers (by value) < strings.
bool cell_less(const Cell& a, const Cell& b);
bool cell_equal(const Cell& a, const Cell& b);

enum class ColumnType { Integer, Float, String };

/// A named table with per-attribute active domains.
///
/// Rows may carry a multiplicity (`weights`); an empty weight vector means
/// every row counts once. Active domains are recomputed on construction and
/// exclude nulls.
class Relation {
 public:
  Relation() = default;
  Relation(std::string name, std::vector<std::string> schema, std::vector<ColumnType> types,
           std::vector<std::vector<Cell>> rows, std::vector<std::uint64_t> weights = {});

  const std::string& name() const { return name_; }
  const std::vector<std::string>& schema() const { return schema_; }
  const std::vector<ColumnType>& types() const { return types_; }
  const std::vector<std::vector<Cell>>& rows() const { return rows_; }
  const std::vector<std::uint64_t>& weights() const { return weights_; }
  std::uint64_t weight(std::size_t row) const { return weights_.empty() ? 1 : weights_[row]; }
  std::uint64_t total_weight() const;

  std::size_t num_rows() const { return rows_.size(); }
  std::size_t num_cols() const { return schema_.size(); }
  std::optional<std::size_t> column_index(const std::string& attr) const;

  /// Sorted distinct non-null values of `attr`.
  const std::vector<Cell>& adom(const std::string& attr) const;
  const std::vector<Cell>& adom(std::size_t col) const { return adoms_[col]; }

  bool empty() const { return rows_.empty() || schema_.empty(); }

 private:
  std::string name_;
  std::vector<std::string> schema_;
  std::vector<ColumnType> types_;
  std::vector<std::vector<Cell>> rows_;
  std::vector<std::uint64_t> weights_;
  std::vector<std::vector<Cell>> adoms_;
};

/// Same rows as `r` with each row repeated by its weight, weights dropped.
Relation expand_weights(const Relation& r);

}  // namespace skyforge
