#pragma once

#include <list>
#include <memory>
#include <mutex>
#include <optional>
#include <unordered_map>
#include <vector>

#include "skyforge/bitmap.hpp"
#include "skyforge/measures.hpp"
#include "skyforge/relation.hpp"
#include "skyforge/universal.hpp"

namespace skyforge {

enum class OpKind { Reduct, Augment };

/// ⊖ / ⊕ under the literal `literal` of attribute `attribute` (indices into
/// the universal schema and its literal index).
struct Operator {
  OpKind kind = OpKind::Reduct;
  std::size_t attribute = 0;
  std::size_t literal = 0;

  friend bool operator==(const Operator&, const Operator&) = default;
};

struct Transition {
  StateBitmap from;
  Operator op;
  StateBitmap to;
};

/// A node of the running graph. The dataset is not stored here; it is
/// materialized from the bitmap on demand through StateSpace.
struct SearchState {
  StateBitmap bitmap;
  std::size_t level = 0;
  std::optional<PerfVector> perf;
};

enum class SearchDirection { Forward, Backward };

/// The universal table, its bit layout and a bounded LRU cache of
/// materialized datasets. Safe for concurrent readers.
class StateSpace {
 public:
  static constexpr std::size_t kDefaultCacheSize = 256;

  explicit StateSpace(std::shared_ptr<const UniversalTable> u,
                      std::size_t cache_size = kDefaultCacheSize);
  explicit StateSpace(UniversalTable u, std::size_t cache_size = kDefaultCacheSize)
      : StateSpace(std::make_shared<const UniversalTable>(std::move(u)), cache_size) {}

  const UniversalTable& universal() const { return *universal_; }
  const BitLayout& layout() const { return layout_; }
  std::size_t num_bits() const { return layout_.num_bits(); }

  StateBitmap full() const { return StateBitmap::full(layout_.num_bits()); }
  SearchState root() const { return {full(), 0, std::nullopt}; }

  /// Rows of D_U kept by `b`: a row survives iff every present attribute
  /// holds a null or a retained cluster in it.
  bool row_kept(const StateBitmap& b, std::size_t row) const;
  std::size_t kept_row_count(const StateBitmap& b) const;
  /// No present attribute, or no surviving row.
  bool is_degenerate(const StateBitmap& b) const;

  std::shared_ptr<const Relation> materialize(const StateBitmap& b) const;

  /// Locates the literal `lit` in the literal index.
  std::pair<std::size_t, std::size_t> locate(const Literal& lit) const;

  std::size_t cache_hits() const;
  std::size_t cache_misses() const;

 private:
  Relation build(const StateBitmap& b) const;

  std::shared_ptr<const UniversalTable> universal_;
  BitLayout layout_;
  std::size_t cache_size_;

  mutable std::mutex mu_;
  mutable std::list<std::pair<StateBitmap, std::shared_ptr<const Relation>>> lru_;
  mutable std::unordered_map<StateBitmap, decltype(lru_)::iterator, BitmapHash> index_;
  mutable std::size_t hits_ = 0;
  mutable std::size_t misses_ = 0;
};

/// Clears the bit of (attribute, literal); throws InapplicableOperatorError
/// if it is already clear and DegenerateStateError if nothing would remain.
SearchState apply_reduct(const SearchState& s, std::size_t attribute, std::size_t literal,
                         const StateSpace& space);
SearchState apply_reduct(const SearchState& s, const Literal& lit, const StateSpace& space);

/// Sets the bit of (attribute, literal); throws InapplicableOperatorError
/// if it is already set and DegenerateStateError if no row survives.
SearchState apply_augment(const SearchState& s, std::size_t attribute, std::size_t literal,
                          const StateSpace& space);
SearchState apply_augment(const SearchState& s, const Literal& lit, const StateSpace& space);

SearchState apply(const SearchState& s, const Operator& op, const StateSpace& space);

struct Child {
  Operator op;
  SearchState state;
};

/// All one-flip children: reducts going forward, augments going backward.
/// Schema order, then literal order; degenerate children are skipped.
std::vector<Child> op_gen(const SearchState& s, SearchDirection dir, const StateSpace& space);

}  // namespace skyforge
