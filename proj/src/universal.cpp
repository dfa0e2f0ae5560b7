#include "skyforge/universal.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>

#include "skyforge/errors.hpp"

namespace skyforge {

int AttributeClusters::cluster_of(const Cell& c) const {
  if (is_null(c) || literals.empty()) return -1;
  if (numeric) {
    if (!is_numeric(c)) return -1;
    double v = as_double(c);
    // Nearest centroid; boundaries are midpoints, ties go to the lower one.
    int k = static_cast<int>(centroids.size());
    int lo = 0;
    while (lo + 1 < k && v > 0.5 * (centroids[lo] + centroids[lo + 1])) ++lo;
    return lo;
  }
  auto it = categories.find(cell_text(c));
  return it == categories.end() ? -1 : it->second;
}

UniversalTable::UniversalTable(Relation rel, std::map<std::string, std::string> provenance)
    : relation_(std::move(rel)), provenance_(std::move(provenance)) {}

const std::vector<Literal>& UniversalTable::literals(const std::string& attr) const {
  auto idx = relation_.column_index(attr);
  if (!idx) throw ArgumentError("unknown attribute '" + attr + "'");
  return literals(*idx);
}

UniversalTable UniversalTable::with_clusters(std::vector<AttributeClusters> clusters) const {
  if (clusters.size() != relation_.num_cols())
    throw ArgumentError("cluster list does not cover the universal schema");
  UniversalTable out(relation_, provenance_);
  out.clusters_ = std::move(clusters);
  const std::size_t ncols = relation_.num_cols();
  out.codes_.resize(relation_.num_rows() * ncols);
  for (std::size_t r = 0; r < relation_.num_rows(); ++r)
    for (std::size_t c = 0; c < ncols; ++c)
      out.codes_[r * ncols + c] = out.clusters_[c].cluster_of(relation_.rows()[r][c]);
  return out;
}

// ---------------------------------------------------------------------------
// buildUniversal

namespace {

std::string key_of(const std::vector<Cell>& row, const std::vector<std::size_t>& cols, bool& has_null) {
  std::string key;
  has_null = false;
  for (auto c : cols) {
    if (is_null(row[c])) {
      has_null = true;
      return {};
    }
    key += cell_text(row[c]);
    key.push_back('\x1f');
  }
  return key;
}

ColumnType merge_type(ColumnType a, ColumnType b) {
  if (a == b) return a;
  if (a == ColumnType::String || b == ColumnType::String) return ColumnType::String;
  return ColumnType::Float;
}

}  // namespace

UniversalTable build_universal(const std::vector<Relation>& sources,
                               const std::vector<JoinKey>& join_keys) {
  if (sources.empty()) throw ArgumentError("buildUniversal: no sources");

  std::map<std::string, std::size_t> source_pos;
  for (std::size_t i = 0; i < sources.size(); ++i)
    if (!source_pos.emplace(sources[i].name(), i).second)
      throw ArgumentError("duplicate source name '" + sources[i].name() + "'");
  for (const auto& jk : join_keys) {
    auto l = source_pos.find(jk.left), r = source_pos.find(jk.right);
    if (l == source_pos.end() || r == source_pos.end())
      throw ArgumentError("join key references unknown source '" +
                          (l == source_pos.end() ? jk.left : jk.right) + "'");
    if (jk.on.empty()) throw ArgumentError("join key " + jk.left + "/" + jk.right + " has no attributes");
    for (const auto& [la, ra] : jk.on) {
      if (!sources[l->second].column_index(la))
        throw ArgumentError("join key attribute '" + la + "' not in '" + jk.left + "'");
      if (!sources[r->second].column_index(ra))
        throw ArgumentError("join key attribute '" + ra + "' not in '" + jk.right + "'");
    }
  }

  const Relation& first = sources.front();
  std::vector<std::string> schema = first.schema();
  std::vector<ColumnType> types = first.types();
  std::vector<std::vector<Cell>> rows = first.rows();
  std::map<std::string, std::string> provenance;
  // (source, attribute) -> accumulated column
  std::map<std::pair<std::string, std::string>, std::size_t> colmap;
  for (std::size_t c = 0; c < schema.size(); ++c) {
    provenance[schema[c]] = first.name();
    colmap[{first.name(), schema[c]}] = c;
  }

  for (std::size_t i = 1; i < sources.size(); ++i) {
    const Relation& src = sources[i];
    std::vector<std::size_t> acc_keys, src_keys;
    for (const auto& jk : join_keys) {
      bool forward = jk.right == src.name() && source_pos[jk.left] < i;
      bool backward = jk.left == src.name() && source_pos[jk.right] < i;
      if (!forward && !backward) continue;
      for (const auto& [la, ra] : jk.on) {
        const std::string& earlier = forward ? jk.left : jk.right;
        const std::string& earlier_attr = forward ? la : ra;
        const std::string& this_attr = forward ? ra : la;
        acc_keys.push_back(colmap.at({earlier, earlier_attr}));
        src_keys.push_back(*src.column_index(this_attr));
      }
    }
    if (acc_keys.empty()) {
      for (const auto& a : src.schema())
        if (provenance.count(a))
          throw SchemaConflictError("attribute '" + a + "' of '" + src.name() +
                                    "' duplicates an earlier attribute and no join key is declared");
      throw ArgumentError("no join key connects source '" + src.name() + "' to earlier sources");
    }

    // Non-key columns of the new source become new accumulated columns.
    std::vector<std::size_t> new_cols;
    std::vector<int> key_slot(src.num_cols(), -1);
    for (std::size_t k = 0; k < src_keys.size(); ++k) key_slot[src_keys[k]] = static_cast<int>(k);
    for (std::size_t c = 0; c < src.num_cols(); ++c) {
      if (key_slot[c] >= 0) {
        auto acc_c = acc_keys[key_slot[c]];
        colmap[{src.name(), src.schema()[c]}] = acc_c;
        types[acc_c] = merge_type(types[acc_c], src.types()[c]);
        continue;
      }
      const auto& a = src.schema()[c];
      if (provenance.count(a))
        throw SchemaConflictError("attribute '" + a + "' of '" + src.name() +
                                  "' duplicates an attribute of '" + provenance[a] + "'");
      provenance[a] = src.name();
      colmap[{src.name(), a}] = schema.size();
      schema.push_back(a);
      types.push_back(src.types()[c]);
      new_cols.push_back(c);
    }

    std::unordered_map<std::string, std::vector<std::size_t>> index;
    for (std::size_t r = 0; r < src.num_rows(); ++r) {
      bool has_null;
      auto key = key_of(src.rows()[r], src_keys, has_null);
      if (!has_null) index[key].push_back(r);
    }

    const std::size_t width = schema.size();
    std::vector<bool> matched(src.num_rows(), false);
    std::vector<std::vector<Cell>> joined;
    joined.reserve(rows.size());
    for (auto& row : rows) {
      bool has_null;
      auto key = key_of(row, acc_keys, has_null);
      const std::vector<std::size_t>* hits = nullptr;
      if (!has_null) {
        auto it = index.find(key);
        if (it != index.end()) hits = &it->second;
      }
      if (!hits) {
        row.resize(width);
        joined.push_back(std::move(row));
        continue;
      }
      for (auto r : *hits) {
        matched[r] = true;
        std::vector<Cell> out = row;
        out.reserve(width);
        for (auto c : new_cols) out.push_back(src.rows()[r][c]);
        joined.push_back(std::move(out));
      }
    }
    for (std::size_t r = 0; r < src.num_rows(); ++r) {
      if (matched[r]) continue;
      std::vector<Cell> out(width);
      for (std::size_t k = 0; k < src_keys.size(); ++k) out[acc_keys[k]] = src.rows()[r][src_keys[k]];
      std::size_t pos = width - new_cols.size();
      for (auto c : new_cols) out[pos++] = src.rows()[r][c];
      joined.push_back(std::move(out));
    }
    rows = std::move(joined);
  }

  std::string name = "universal";
  return UniversalTable(Relation(name, std::move(schema), std::move(types), std::move(rows)),
                        std::move(provenance));
}

// ---------------------------------------------------------------------------
// deriveLiterals

namespace {

AttributeClusters cluster_numeric(const std::string& attr, const std::vector<Cell>& adom,
                                  std::size_t max_clusters) {
  std::vector<double> xs;
  xs.reserve(adom.size());
  for (const auto& c : adom) xs.push_back(as_double(c));  // adom is sorted ascending
  const std::size_t n = xs.size();
  const std::size_t k = std::min(max_clusters, n);

  std::vector<double> centroids(k);
  for (std::size_t i = 0; i < k; ++i) centroids[i] = xs[(2 * i + 1) * n / (2 * k)];

  std::vector<std::size_t> assign(n);
  for (int iter = 0; iter < 10000; ++iter) {
    // Sorted data and sorted centroids: sweep assignment.
    std::size_t j = 0;
    for (std::size_t i = 0; i < n; ++i) {
      while (j + 1 < centroids.size() && std::abs(xs[i] - centroids[j + 1]) < std::abs(xs[i] - centroids[j]))
        ++j;
      assign[i] = j;
    }
    std::vector<double> sum(centroids.size(), 0.0);
    std::vector<std::size_t> cnt(centroids.size(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      sum[assign[i]] += xs[i];
      ++cnt[assign[i]];
    }
    std::vector<double> next;
    double shift = 0.0;
    bool dropped = false;
    for (std::size_t c = 0; c < centroids.size(); ++c) {
      if (cnt[c] == 0) {
        dropped = true;
        continue;
      }
      double m = sum[c] / static_cast<double>(cnt[c]);
      shift = std::max(shift, std::abs(m - centroids[c]));
      next.push_back(m);
    }
    centroids = std::move(next);
    if (!dropped && shift < 1e-9) break;
  }

  AttributeClusters out;
  out.numeric = true;
  out.centroids = centroids;
  for (double m : centroids) {
    // Representative: adom member nearest to the centroid, lower on ties.
    auto it = std::lower_bound(xs.begin(), xs.end(), m);
    std::size_t best = it == xs.end() ? n - 1 : static_cast<std::size_t>(it - xs.begin());
    if (best > 0 && std::abs(xs[best - 1] - m) <= std::abs(xs[best] - m)) --best;
    out.literals.push_back({attr, adom[best]});
  }
  return out;
}

AttributeClusters cluster_categorical(const UniversalTable& u, std::size_t col,
                                      std::size_t max_clusters) {
  const Relation& rel = u.relation();
  const std::string& attr = rel.schema()[col];
  std::map<std::string, std::uint64_t> freq;
  std::map<std::string, Cell> cell_for;
  for (std::size_t r = 0; r < rel.num_rows(); ++r) {
    const Cell& c = rel.rows()[r][col];
    if (is_null(c)) continue;
    auto key = cell_text(c);
    freq[key] += rel.weight(r);
    cell_for.emplace(key, c);
  }
  std::vector<std::pair<std::string, std::uint64_t>> order(freq.begin(), freq.end());
  std::stable_sort(order.begin(), order.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });

  AttributeClusters out;
  const std::size_t k = std::min(max_clusters, order.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    // Values beyond the k most frequent share the last cluster.
    std::size_t slot = std::min(i, k - 1);
    if (i < k) out.literals.push_back({attr, cell_for[order[i].first]});
    out.categories[order[i].first] = static_cast<int>(slot);
  }
  return out;
}

}  // namespace

AttributeClusters cluster_attribute(const UniversalTable& u, const std::string& attr,
                                    std::size_t max_clusters) {
  if (max_clusters < 1) throw ArgumentError("maxClusters must be at least 1");
  auto col = u.relation().column_index(attr);
  if (!col) throw ArgumentError("deriveLiterals: unknown attribute '" + attr + "'");
  const auto& adom = u.relation().adom(*col);
  if (adom.empty()) return {};
  bool numeric = std::all_of(adom.begin(), adom.end(), [](const Cell& c) { return is_numeric(c); });
  if (numeric) return cluster_numeric(attr, adom, max_clusters);
  return cluster_categorical(u, *col, max_clusters);
}

std::vector<Literal> derive_literals(const UniversalTable& u, const std::string& attr,
                                     std::size_t max_clusters) {
  return cluster_attribute(u, attr, max_clusters).literals;
}

UniversalTable derive_all_literals(const UniversalTable& u, std::size_t max_clusters) {
  std::vector<AttributeClusters> all;
  for (const auto& attr : u.relation().schema()) all.push_back(cluster_attribute(u, attr, max_clusters));
  return u.with_clusters(std::move(all));
}

// ---------------------------------------------------------------------------
// compressRows

UniversalTable compress_rows(const UniversalTable& u) {
  if (!u.has_literals()) throw ArgumentError("compressRows: literals not derived");
  const Relation& rel = u.relation();
  const std::size_t ncols = rel.num_cols();

  std::vector<std::vector<Cell>> rows;
  std::vector<std::uint64_t> weights;
  std::unordered_map<std::string, std::size_t> seen;
  for (std::size_t r = 0; r < rel.num_rows(); ++r) {
    std::vector<Cell> row(ncols);
    std::string key;
    for (std::size_t c = 0; c < ncols; ++c) {
      int code = u.code(r, c);
      row[c] = code >= 0 ? u.literals(c)[code].value : rel.rows()[r][c];
      key += is_null(row[c]) ? std::string("\x1e") : cell_text(row[c]);
      key.push_back('\x1f');
    }
    auto [it, fresh] = seen.emplace(std::move(key), rows.size());
    if (fresh) {
      rows.push_back(std::move(row));
      weights.push_back(rel.weight(r));
    } else {
      weights[it->second] += rel.weight(r);
    }
  }

  std::vector<AttributeClusters> clusters;
  for (std::size_t c = 0; c < ncols; ++c) clusters.push_back(u.clusters(c));
  UniversalTable out(Relation(rel.name(), rel.schema(), rel.types(), std::move(rows), std::move(weights)),
                     u.provenance());
  return out.with_clusters(std::move(clusters));
}

}  // namespace skyforge
