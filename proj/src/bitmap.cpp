#include "skyforge/bitmap.hpp"

#include <bit>

#include "skyforge/errors.hpp"
#include "skyforge/universal.hpp"

namespace skyforge {

StateBitmap StateBitmap::full(std::size_t nbits) {
  StateBitmap b(nbits);
  for (std::size_t i = 0; i < nbits; ++i) b.set(i);
  return b;
}

StateBitmap StateBitmap::from_hex(std::string_view hex, std::size_t nbits) {
  if (hex.size() != (nbits + 3) / 4)
    throw ParseError("bitmap hex '" + std::string(hex) + "' has wrong length for " +
                     std::to_string(nbits) + " bits");
  StateBitmap b(nbits);
  for (std::size_t j = 0; j < hex.size(); ++j) {
    char ch = hex[j];
    int v;
    if (ch >= '0' && ch <= '9')
      v = ch - '0';
    else if (ch >= 'a' && ch <= 'f')
      v = ch - 'a' + 10;
    else if (ch >= 'A' && ch <= 'F')
      v = ch - 'A' + 10;
    else
      throw ParseError("bitmap hex contains '" + std::string(1, ch) + "'");
    for (int k = 0; k < 4; ++k) {
      std::size_t i = 4 * j + k;
      bool on = (v >> (3 - k)) & 1;
      if (i >= nbits) {
        if (on) throw ParseError("bitmap hex sets padding bits");
        continue;
      }
      if (on) b.set(i);
    }
  }
  return b;
}

StateBitmap StateBitmap::from_bits(std::string_view bits) {
  StateBitmap b(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] == '1')
      b.set(i);
    else if (bits[i] != '0')
      throw ParseError("bit string contains '" + std::string(1, bits[i]) + "'");
  }
  return b;
}

std::size_t StateBitmap::count() const {
  std::size_t n = 0;
  for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
  return n;
}

bool StateBitmap::is_subset_of(const StateBitmap& other) const {
  if (other.nbits_ != nbits_) return false;
  for (std::size_t i = 0; i < words_.size(); ++i)
    if (words_[i] & ~other.words_[i]) return false;
  return true;
}

std::size_t StateBitmap::hamming(const StateBitmap& other) const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < words_.size(); ++i)
    n += static_cast<std::size_t>(std::popcount(words_[i] ^ other.words_[i]));
  return n;
}

std::string StateBitmap::hex() const {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve((nbits_ + 3) / 4);
  for (std::size_t j = 0; 4 * j < nbits_; ++j) {
    int v = 0;
    for (int k = 0; k < 4; ++k) {
      std::size_t i = 4 * j + k;
      v = (v << 1) | (i < nbits_ && test(i) ? 1 : 0);
    }
    out.push_back(kDigits[v]);
  }
  return out;
}

std::string StateBitmap::bits() const {
  std::string out(nbits_, '0');
  for (std::size_t i = 0; i < nbits_; ++i)
    if (test(i)) out[i] = '1';
  return out;
}

std::strong_ordering operator<=>(const StateBitmap& a, const StateBitmap& b) {
  if (auto c = a.nbits_ <=> b.nbits_; c != 0) return c;
  for (std::size_t w = 0; w < a.words_.size(); ++w) {
    std::uint64_t diff = a.words_[w] ^ b.words_[w];
    if (!diff) continue;
    // Lowest differing bit index decides; a set bit sorts after a clear one.
    int bit = std::countr_zero(diff);
    return ((a.words_[w] >> bit) & 1u) ? std::strong_ordering::greater : std::strong_ordering::less;
  }
  return std::strong_ordering::equal;
}

std::size_t StateBitmap::hash() const {
  std::uint64_t h = 1469598103934665603ull ^ nbits_;
  for (auto w : words_) {
    h ^= w;
    h *= 1099511628211ull;
    h ^= h >> 29;
  }
  return static_cast<std::size_t>(h);
}

BitLayout::BitLayout(const UniversalTable& u) {
  if (!u.has_literals()) throw ArgumentError("bit layout needs derived literals");
  for (std::size_t a = 0; a < u.num_attributes(); ++a) {
    offsets_.push_back(num_bits_);
    widths_.push_back(u.literals(a).size());
    for (std::size_t l = 0; l < widths_.back(); ++l) bit_attr_.push_back(a);
    num_bits_ += widths_.back();
  }
}

bool BitLayout::attr_present(const StateBitmap& b, std::size_t attr) const {
  for (std::size_t i = offsets_[attr]; i < offsets_[attr] + widths_[attr]; ++i)
    if (b.test(i)) return true;
  return false;
}

std::vector<bool> BitLayout::attr_bits(const StateBitmap& b) const {
  std::vector<bool> out(offsets_.size());
  for (std::size_t a = 0; a < offsets_.size(); ++a) out[a] = attr_present(b, a);
  return out;
}

std::size_t BitLayout::value_count(const StateBitmap& b, std::size_t attr) const {
  std::size_t n = 0;
  for (std::size_t i = offsets_[attr]; i < offsets_[attr] + widths_[attr]; ++i) n += b.test(i);
  return n;
}

}  // namespace skyforge
