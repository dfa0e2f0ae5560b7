#include "skyforge/operators.hpp"

#include "skyforge/errors.hpp"

namespace skyforge {

StateSpace::StateSpace(std::shared_ptr<const UniversalTable> u, std::size_t cache_size)
    : universal_(std::move(u)), layout_(*universal_), cache_size_(cache_size) {}

namespace {

bool kept(const UniversalTable& u, const BitLayout& layout, const StateBitmap& b,
          const std::vector<std::size_t>& present, std::size_t row) {
  for (auto a : present) {
    int code = u.code(row, a);
    if (code < 0) continue;  // nulls never remove a row
    if (!b.test(layout.bit(a, static_cast<std::size_t>(code)))) return false;
  }
  return true;
}

std::vector<std::size_t> present_attributes(const BitLayout& layout, const StateBitmap& b) {
  std::vector<std::size_t> out;
  for (std::size_t a = 0; a < layout.num_attributes(); ++a)
    if (layout.attr_present(b, a)) out.push_back(a);
  return out;
}

}  // namespace

bool StateSpace::row_kept(const StateBitmap& b, std::size_t row) const {
  return kept(*universal_, layout_, b, present_attributes(layout_, b), row);
}

std::size_t StateSpace::kept_row_count(const StateBitmap& b) const {
  auto present = present_attributes(layout_, b);
  std::size_t n = 0;
  for (std::size_t r = 0; r < universal_->relation().num_rows(); ++r)
    n += kept(*universal_, layout_, b, present, r);
  return n;
}

bool StateSpace::is_degenerate(const StateBitmap& b) const {
  auto present = present_attributes(layout_, b);
  if (present.empty()) return true;
  for (std::size_t r = 0; r < universal_->relation().num_rows(); ++r)
    if (kept(*universal_, layout_, b, present, r)) return false;
  return true;
}

Relation StateSpace::build(const StateBitmap& b) const {
  const Relation& rel = universal_->relation();
  const std::vector<std::size_t> cols = present_attributes(layout_, b);

  std::vector<std::string> schema;
  std::vector<ColumnType> types;
  for (auto c : cols) {
    schema.push_back(rel.schema()[c]);
    types.push_back(rel.types()[c]);
  }
  std::vector<std::vector<Cell>> rows;
  std::vector<std::uint64_t> weights;
  for (std::size_t r = 0; r < rel.num_rows(); ++r) {
    if (!kept(*universal_, layout_, b, cols, r)) continue;
    std::vector<Cell> row;
    row.reserve(cols.size());
    for (auto c : cols) row.push_back(rel.rows()[r][c]);
    rows.push_back(std::move(row));
    weights.push_back(rel.weight(r));
  }
  if (rel.weights().empty()) weights.clear();
  return Relation(b.hex(), std::move(schema), std::move(types), std::move(rows), std::move(weights));
}

std::shared_ptr<const Relation> StateSpace::materialize(const StateBitmap& b) const {
  {
    std::lock_guard lock(mu_);
    auto it = index_.find(b);
    if (it != index_.end()) {
      ++hits_;
      lru_.splice(lru_.begin(), lru_, it->second);
      return it->second->second;
    }
    ++misses_;
  }
  auto rel = std::make_shared<const Relation>(build(b));
  if (cache_size_ == 0) return rel;
  std::lock_guard lock(mu_);
  if (index_.count(b)) return rel;
  lru_.emplace_front(b, rel);
  index_[b] = lru_.begin();
  while (lru_.size() > cache_size_) {
    index_.erase(lru_.back().first);
    lru_.pop_back();
  }
  return rel;
}

std::pair<std::size_t, std::size_t> StateSpace::locate(const Literal& lit) const {
  auto col = universal_->relation().column_index(lit.attribute);
  if (!col) throw ArgumentError("literal on unknown attribute '" + lit.attribute + "'");
  const auto& lits = universal_->literals(*col);
  for (std::size_t i = 0; i < lits.size(); ++i)
    if (cell_equal(lits[i].value, lit.value)) return {*col, i};
  throw ArgumentError("no literal " + lit.attribute + " = " + cell_text(lit.value));
}

std::size_t StateSpace::cache_hits() const {
  std::lock_guard lock(mu_);
  return hits_;
}

std::size_t StateSpace::cache_misses() const {
  std::lock_guard lock(mu_);
  return misses_;
}

namespace {

void check_literal(const StateSpace& space, std::size_t attribute, std::size_t literal) {
  if (attribute >= space.layout().num_attributes() || literal >= space.layout().width(attribute))
    throw ArgumentError("operator literal out of range");
}

}  // namespace

SearchState apply_reduct(const SearchState& s, std::size_t attribute, std::size_t literal,
                         const StateSpace& space) {
  check_literal(space, attribute, literal);
  std::size_t bit = space.layout().bit(attribute, literal);
  if (!s.bitmap.test(bit))
    throw InapplicableOperatorError("reduct on a cleared literal of '" +
                                    space.universal().relation().schema()[attribute] + "'");
  SearchState out{s.bitmap, s.level + 1, std::nullopt};
  out.bitmap.reset(bit);
  if (space.is_degenerate(out.bitmap)) throw DegenerateStateError("reduct leaves an empty dataset");
  return out;
}

SearchState apply_reduct(const SearchState& s, const Literal& lit, const StateSpace& space) {
  auto [a, l] = space.locate(lit);
  return apply_reduct(s, a, l, space);
}

SearchState apply_augment(const SearchState& s, std::size_t attribute, std::size_t literal,
                          const StateSpace& space) {
  check_literal(space, attribute, literal);
  std::size_t bit = space.layout().bit(attribute, literal);
  if (s.bitmap.test(bit))
    throw InapplicableOperatorError("augment on a retained literal of '" +
                                    space.universal().relation().schema()[attribute] + "'");
  SearchState out{s.bitmap, s.level + 1, std::nullopt};
  out.bitmap.set(bit);
  if (space.is_degenerate(out.bitmap)) throw DegenerateStateError("augment leaves an empty dataset");
  return out;
}

SearchState apply_augment(const SearchState& s, const Literal& lit, const StateSpace& space) {
  auto [a, l] = space.locate(lit);
  return apply_augment(s, a, l, space);
}

SearchState apply(const SearchState& s, const Operator& op, const StateSpace& space) {
  return op.kind == OpKind::Reduct ? apply_reduct(s, op.attribute, op.literal, space)
                                   : apply_augment(s, op.attribute, op.literal, space);
}

std::vector<Child> op_gen(const SearchState& s, SearchDirection dir, const StateSpace& space) {
  std::vector<Child> out;
  const auto& layout = space.layout();
  const bool forward = dir == SearchDirection::Forward;
  for (std::size_t a = 0; a < layout.num_attributes(); ++a) {
    for (std::size_t l = 0; l < layout.width(a); ++l) {
      std::size_t bit = layout.bit(a, l);
      if (s.bitmap.test(bit) != forward) continue;
      SearchState child{s.bitmap, s.level + 1, std::nullopt};
      if (forward)
        child.bitmap.reset(bit);
      else
        child.bitmap.set(bit);
      if (space.is_degenerate(child.bitmap)) continue;
      out.push_back({{forward ? OpKind::Reduct : OpKind::Augment, a, l}, std::move(child)});
    }
  }
  return out;
}

}  // namespace skyforge
