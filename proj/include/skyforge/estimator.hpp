#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "skyforge/bitmap.hpp"
#include "skyforge/measures.hpp"
#include "skyforge/relation.hpp"

namespace skyforge {

/// Raw (unnormalized) measure values keyed by measure name.
using RawMeasures = std::map<std::string, double>;

/// Valuates every measure of a state in a single call. Implementations
/// must be deterministic: the same bitmap and dataset give the same values.
class Estimator {
 public:
  virtual ~Estimator() = default;

  virtual RawMeasures estimate(const StateBitmap& bitmap, const Relation& dataset) = 0;

  /// False when the estimator never looks at the dataset, letting callers
  /// skip materialization.
  virtual bool needs_dataset() const { return true; }
  /// True when a dataset with only the target column cannot be valuated.
  virtual bool requires_feature_column() const { return false; }
  /// False when calls must be serialized by the caller.
  virtual bool thread_safe() const { return true; }
};

/// Fixed table of raw vectors keyed by bitmap hex. Unknown bitmaps fail.
class LookupEstimator : public Estimator {
 public:
  LookupEstimator() = default;
  explicit LookupEstimator(std::unordered_map<std::string, RawMeasures> table) : table_(std::move(table)) {}

  void set(const StateBitmap& b, RawMeasures values) { table_[b.hex()] = std::move(values); }
  void set(const std::string& hex, RawMeasures values) { table_[hex] = std::move(values); }
  bool contains(const StateBitmap& b) const { return table_.count(b.hex()) != 0; }
  std::size_t size() const { return table_.size(); }

  RawMeasures estimate(const StateBitmap& bitmap, const Relation& dataset) override;
  bool needs_dataset() const override { return false; }

 private:
  std::unordered_map<std::string, RawMeasures> table_;
};

/// Quantities the ridge estimator can report.
enum class RidgeQuantity {
  TrainingError,  // RMSE over training rows
  HeldOutError,   // RMSE over held-out rows (row index % 5 == 4)
  TrainingCost,   // total row weight
  ModelSize,      // number of dataset columns
};

/// Closed-form weighted ridge regression of `target` on the remaining
/// columns. Numeric columns enter as-is (nulls imputed by the column mean),
/// categorical columns are one-hot encoded. No randomness.
class RidgeEstimator : public Estimator {
 public:
  RidgeEstimator(std::string target, std::map<std::string, RidgeQuantity> bindings,
                 double lambda = 1e-8);

  RawMeasures estimate(const StateBitmap& bitmap, const Relation& dataset) override;
  bool requires_feature_column() const override { return true; }

  /// Raw value reported for error measures when the target column is absent
  /// or has no usable rows.
  void set_missing_target_error(double v) { missing_error_ = v; }

 private:
  std::string target_;
  std::map<std::string, RidgeQuantity> bindings_;
  double lambda_;
  double missing_error_ = 1e9;
};

/// Talks line-delimited JSON to a long-lived child process. Each request
/// writes the materialized dataset to a temporary CSV:
///   -> {"id":n,"bitmap":hex,"rows":r,"cols":c,"columns":[...],"csv_path":p}
///   <- {"id":n,"measures":{"name":raw,...}}
class SubprocessEstimator : public Estimator {
 public:
  SubprocessEstimator(std::vector<std::string> command,
                      std::chrono::milliseconds timeout = std::chrono::seconds(60),
                      std::filesystem::path tmpdir = {});
  ~SubprocessEstimator() override;
  SubprocessEstimator(const SubprocessEstimator&) = delete;
  SubprocessEstimator& operator=(const SubprocessEstimator&) = delete;

  RawMeasures estimate(const StateBitmap& bitmap, const Relation& dataset) override;
  bool thread_safe() const override { return true; }  // serialized internally

  /// Directory from SKYFORGE_TMPDIR, else the system temp directory.
  static std::filesystem::path default_tmpdir();

 private:
  void start();
  void stop();
  std::string read_line(std::chrono::steady_clock::time_point deadline, const std::string& hex);

  std::vector<std::string> command_;
  std::chrono::milliseconds timeout_;
  std::filesystem::path tmpdir_;
  std::mutex mu_;
  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
  long next_id_ = 0;
};

}  // namespace skyforge
