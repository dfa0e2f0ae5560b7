#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace skyforge {

class UniversalTable;

/// Fixed-length bit vector over the (attribute, literal) pairs of a
/// universal table. Bit order follows schema order, then literal order.
///
/// Only value bits are stored. An attribute is present iff at least one of
/// its value bits is set (see BitLayout::attr_present), which keeps the
/// "attribute bit 0 implies all its value bits 0" invariant structural.
class StateBitmap {
 public:
  StateBitmap() = default;
  explicit StateBitmap(std::size_t nbits) : nbits_(nbits), words_((nbits + 63) / 64, 0) {}

  static StateBitmap full(std::size_t nbits);
  /// Parses the format produced by hex(); throws ParseError.
  static StateBitmap from_hex(std::string_view hex, std::size_t nbits);
  /// Parses a string of '0'/'1' characters, bit 0 first.
  static StateBitmap from_bits(std::string_view bits);

  std::size_t size() const { return nbits_; }
  bool test(std::size_t i) const { return (words_[i >> 6] >> (i & 63)) & 1u; }
  void set(std::size_t i) { words_[i >> 6] |= std::uint64_t{1} << (i & 63); }
  void reset(std::size_t i) { words_[i >> 6] &= ~(std::uint64_t{1} << (i & 63)); }
  std::size_t count() const;
  bool none() const { return count() == 0; }

  /// Every set bit of *this is set in `other`.
  bool is_subset_of(const StateBitmap& other) const;
  std::size_t hamming(const StateBitmap& other) const;

  /// Nibble j holds bits 4j..4j+3 with bit 4j as its most significant bit,
  /// so the hex string read as binary lists bits in order.
  std::string hex() const;
  std::string bits() const;

  friend bool operator==(const StateBitmap& a, const StateBitmap& b) {
    return a.nbits_ == b.nbits_ && a.words_ == b.words_;
  }
  /// Lexicographic over bit sequence, bit 0 most significant.
  friend std::strong_ordering operator<=>(const StateBitmap& a, const StateBitmap& b);

  std::size_t hash() const;

 private:
  std::size_t nbits_ = 0;
  std::vector<std::uint64_t> words_;
};

struct BitmapHash {
  std::size_t operator()(const StateBitmap& b) const { return b.hash(); }
};

/// Maps attributes to their contiguous ranges of value bits.
class BitLayout {
 public:
  BitLayout() = default;
  explicit BitLayout(const UniversalTable& u);

  std::size_t num_bits() const { return num_bits_; }
  std::size_t num_attributes() const { return offsets_.size(); }
  std::size_t offset(std::size_t attr) const { return offsets_[attr]; }
  std::size_t width(std::size_t attr) const { return widths_[attr]; }
  std::size_t bit(std::size_t attr, std::size_t literal) const { return offsets_[attr] + literal; }
  std::size_t attribute_of(std::size_t bit) const { return bit_attr_[bit]; }
  std::size_t literal_of(std::size_t bit) const { return bit - offsets_[bit_attr_[bit]]; }

  bool attr_present(const StateBitmap& b, std::size_t attr) const;
  std::vector<bool> attr_bits(const StateBitmap& b) const;
  std::size_t value_count(const StateBitmap& b, std::size_t attr) const;

 private:
  std::size_t num_bits_ = 0;
  std::vector<std::size_t> offsets_;
  std::vector<std::size_t> widths_;
  std::vector<std::size_t> bit_attr_;
};

}  // namespace skyforge
