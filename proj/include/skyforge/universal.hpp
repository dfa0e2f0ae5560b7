#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "skyforge/relation.hpp"

namespace skyforge {

/// Equality condition `attribute = value`.
struct Literal {
  std::string attribute;
  Cell value;

  friend bool operator==(const Literal& a, const Literal& b) {
    return a.attribute == b.attribute && cell_equal(a.value, b.value);
  }
};

/// Join condition between two named sources: pairs of (left attr, right attr).
struct JoinKey {
  std::string left;
  std::string right;
  std::vector<std::pair<std::string, std::string>> on;
};

/// Value clusters of one attribute: one literal per cluster plus the rule
/// mapping any non-null cell to its cluster.
struct AttributeClusters {
  std::vector<Literal> literals;
  bool numeric = false;
  /// Numeric: ascending cluster centroids, parallel to `literals`.
  std::vector<double> centroids;
  /// Categorical: canonical cell text -> literal index.
  std::map<std::string, int> categories;

  /// Literal index for `c`, or -1 for null / unmapped cells.
  int cluster_of(const Cell& c) const;
};

inline constexpr std::size_t kDefaultMaxClusters = 30;

/// The universal relation D_U together with where each attribute came from
/// and, once derived, its literal index.
class UniversalTable {
 public:
  UniversalTable() = default;
  UniversalTable(Relation rel, std::map<std::string, std::string> provenance);

  const Relation& relation() const { return relation_; }
  const std::map<std::string, std::string>& provenance() const { return provenance_; }
  std::size_t num_attributes() const { return relation_.num_cols(); }

  bool has_literals() const { return !clusters_.empty(); }
  const AttributeClusters& clusters(std::size_t col) const { return clusters_.at(col); }
  const std::vector<Literal>& literals(std::size_t col) const { return clusters_.at(col).literals; }
  const std::vector<Literal>& literals(const std::string& attr) const;

  /// Cluster code of cell (row, col); -1 for null.
  int code(std::size_t row, std::size_t col) const { return codes_[row * relation_.num_cols() + col]; }

  /// Returns a copy carrying the given per-column clusters (one entry per
  /// schema attribute, in schema order).
  UniversalTable with_clusters(std::vector<AttributeClusters> clusters) const;

 private:
  Relation relation_;
  std::map<std::string, std::string> provenance_;
  std::vector<AttributeClusters> clusters_;
  std::vector<int> codes_;
};

/// Left-to-right multi-way full outer join of `sources`. Join key columns
/// are coalesced into the column of the earlier source.
UniversalTable build_universal(const std::vector<Relation>& sources,
                               const std::vector<JoinKey>& join_keys);

/// Clusters one attribute. Numeric attributes use 1-D k-means seeded at
/// quantiles of the sorted active domain; categorical attributes keep the
/// most frequent values.
AttributeClusters cluster_attribute(const UniversalTable& u, const std::string& attr,
                                    std::size_t max_clusters = kDefaultMaxClusters);

std::vector<Literal> derive_literals(const UniversalTable& u, const std::string& attr,
                                     std::size_t max_clusters = kDefaultMaxClusters);

/// Clusters every attribute.
UniversalTable derive_all_literals(const UniversalTable& u,
                                   std::size_t max_clusters = kDefaultMaxClusters);

/// Replaces every cell by its cluster representative and merges duplicate
/// rows, accumulating multiplicities in the relation's weights.
UniversalTable compress_rows(const UniversalTable& u);

}  // namespace skyforge
