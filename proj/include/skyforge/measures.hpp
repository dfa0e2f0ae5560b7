#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace skyforge {

enum class Direction { Minimize, Maximize };

/// Normalized values never drop below this, keeping the range open at 0.
inline constexpr double kNormFloor = 1e-6;

/// Declaration of one performance measure. Raw values are mapped onto
/// (0,1] with "smaller is better"; maximize measures are inverted.
struct MeasureSpec {
  std::string name;
  Direction direction = Direction::Minimize;
  double raw_low = 0.0;
  double raw_high = 1.0;
  double pl = kNormFloor;  // 0 < pl <= pu <= 1
  double pu = 1.0;
  bool decisive = false;
};

/// Ordered measure set P with exactly one decisive measure.
class MeasureSet {
 public:
  MeasureSet() = default;
  /// Validates bounds; when no measure is flagged decisive the last one is.
  explicit MeasureSet(std::vector<MeasureSpec> specs);

  std::size_t size() const { return specs_.size(); }
  const MeasureSpec& operator[](std::size_t i) const { return specs_[i]; }
  const std::vector<MeasureSpec>& specs() const { return specs_; }
  std::size_t decisive() const { return decisive_; }
  std::optional<std::size_t> index_of(const std::string& name) const;

  /// Returns a copy with `name` as the decisive measure.
  MeasureSet with_decisive(const std::string& name) const;

 private:
  std::vector<MeasureSpec> specs_;
  std::size_t decisive_ = 0;
};

double normalize(const MeasureSpec& spec, double raw);

/// One slot of a performance vector.
struct PerfEntry {
  enum class Kind { Unvaluated, Valuated, Bounded };
  Kind kind = Kind::Unvaluated;
  double value = 0.0;  // Valuated
  double lo = 0.0;     // Bounded
  double hi = 0.0;

  static PerfEntry valuated(double v) { return {Kind::Valuated, v, v, v}; }
  static PerfEntry bounded(double lo, double hi) { return {Kind::Bounded, 0.0, lo, hi}; }

  bool is_valuated() const { return kind == Kind::Valuated; }
  bool is_known() const { return kind != Kind::Unvaluated; }
  /// Lower / upper end of what is known: the value itself when valuated.
  double lower() const { return kind == Kind::Valuated ? value : lo; }
  double upper() const { return kind == Kind::Valuated ? value : hi; }

  friend bool operator==(const PerfEntry&, const PerfEntry&) = default;
};

/// Normalized performance vector, positionally aligned with a MeasureSet.
struct PerfVector {
  std::vector<PerfEntry> entries;

  PerfVector() = default;
  explicit PerfVector(std::size_t n) : entries(n) {}
  static PerfVector of(std::initializer_list<double> values);
  static PerfVector of(const std::vector<double>& values);

  std::size_t size() const { return entries.size(); }
  bool fully_valuated() const;
  /// Values of a fully valuated vector; throws ArgumentError otherwise.
  std::vector<double> values() const;
  double operator[](std::size_t i) const { return entries[i].value; }

  friend bool operator==(const PerfVector&, const PerfVector&) = default;
};

}  // namespace skyforge
