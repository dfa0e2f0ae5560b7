#pragma once

#include <cstddef>
#include <deque>
#include <filesystem>
#include <mutex>
#include <optional>
#include <unordered_map>
#include <vector>

#include "json.hpp"

#include "skyforge/bitmap.hpp"
#include "skyforge/estimator.hpp"
#include "skyforge/measures.hpp"
#include "skyforge/operators.hpp"

namespace skyforge {

/// One valuated test: a state, its raw measures and the normalized vector.
struct TestRecord {
  StateBitmap bitmap;
  std::vector<double> raw;
  std::vector<double> perf;  // normalized, aligned with the MeasureSet
  double size_proxy = 0.0;   // retained value bits, a stand-in for |D|
};

/// Append-only set of valuated tests with a bitmap index.
///
/// Appends are serialized. `records()` hands out the underlying deque, which
/// never invalidates references on append; callers iterating it must not
/// race with writers (the search reads it only between level barriers).
class TestLog {
 public:
  TestLog() = default;
  TestLog(const TestLog&) = delete;
  TestLog& operator=(const TestLog&) = delete;

  /// Appends unless the bitmap is already present; returns the stored record.
  const TestRecord& append(TestRecord rec);
  std::optional<TestRecord> find(const StateBitmap& b) const;
  bool contains(const StateBitmap& b) const;
  std::size_t size() const;
  const std::deque<TestRecord>& records() const { return records_; }

  /// Largest pairwise Euclidean distance between logged performance vectors.
  /// Computed on demand; only records added since the last call are compared.
  double max_pairwise_distance() const;

  /// Number of estimator invocations made through valuate().
  std::size_t estimator_calls() const;
  void count_estimator_call();

  nlohmann::json to_json() const;
  /// Restores a log written by to_json(); bitmaps must have `nbits` bits.
  static void load_json(TestLog& log, const nlohmann::json& j, std::size_t nbits);

 private:
  mutable std::mutex mu_;
  std::deque<TestRecord> records_;
  std::unordered_map<StateBitmap, std::size_t, BitmapHash> index_;
  mutable double max_dist_ = 0.0;
  mutable std::size_t dist_upto_ = 0;  // records already folded into max_dist_
  std::size_t calls_ = 0;
};

double euclidean(const std::vector<double>& a, const std::vector<double>& b);

/// One estimator call for `bitmap`, counted in `log` but not appended to it.
/// Failures surface as EstimatorFailure carrying the bitmap.
TestRecord evaluate(const StateBitmap& bitmap, Estimator& estimator, TestLog& log, const StateSpace& space,
                    const MeasureSet& measures);

/// Returns the normalized vector of `bitmap`, from the log when present,
/// else from a single estimator call whose result is then logged.
/// Failures surface as EstimatorFailure carrying the bitmap.
std::vector<double> valuate(const StateBitmap& bitmap, Estimator& estimator, TestLog& log,
                            const StateSpace& space, const MeasureSet& measures);

}  // namespace skyforge
