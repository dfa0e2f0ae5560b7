#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "skyforge/config.hpp"
#include "skyforge/estimator.hpp"
#include "skyforge/measures.hpp"
#include "skyforge/operators.hpp"
#include "skyforge/universal.hpp"

namespace fixtures {

using namespace skyforge;

/// Categorical attributes named `names`, attribute i holding widths[i]
/// values "v0", "v1", ... One row per (attribute, value) with every other
/// cell null, so the only degenerate state is the empty bitmap.
inline std::shared_ptr<const UniversalTable> sparse_table(const std::vector<std::size_t>& widths,
                                                         std::vector<std::string> names = {}) {
  if (names.empty())
    for (std::size_t i = 0; i < widths.size(); ++i) names.push_back(std::string(1, static_cast<char>('A' + i)));
  std::vector<std::vector<Cell>> rows;
  for (std::size_t a = 0; a < widths.size(); ++a)
    for (std::size_t v = 0; v < widths[a]; ++v) {
      std::vector<Cell> row(widths.size(), std::monostate{});
      row[a] = "v" + std::to_string(v);
      rows.push_back(std::move(row));
    }
  Relation rel("u", names, std::vector<ColumnType>(widths.size(), ColumnType::String), std::move(rows));
  return std::make_shared<const UniversalTable>(derive_all_literals(UniversalTable(std::move(rel), {})));
}

inline std::vector<MeasureSpec> unit_specs(std::size_t m, double pl = 0.05, double pu = 1.0) {
  std::vector<MeasureSpec> out;
  for (std::size_t i = 0; i < m; ++i) {
    MeasureSpec s;
    s.name = "p" + std::to_string(i + 1);
    s.pl = pl;
    s.pu = pu;
    out.push_back(s);
  }
  return out;
}

inline MeasureSet unit_measures(std::size_t m, double pl = 0.05, double pu = 1.0) {
  return MeasureSet(unit_specs(m, pl, pu));
}

/// Deterministic pseudo-random raw values in [0, 1) per bitmap, optionally
/// blended with a term that grows as bits are removed so that measures
/// correlate with dataset size.
class HashEstimator : public Estimator {
 public:
  /// With `grow`, values rise with the number of kept bits instead of falling.
  HashEstimator(std::uint64_t seed, std::size_t m, double size_weight = 0.0, bool grow = false)
      : seed_(seed), m_(m), size_weight_(size_weight), grow_(grow) {}

  RawMeasures estimate(const StateBitmap& b, const Relation&) override {
    ++calls;
    std::mt19937_64 rng(fnv1a64(b.hex() + "/" + std::to_string(b.size())) ^ seed_);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double kept = static_cast<double>(b.count()) / static_cast<double>(b.size());
    const double shrink = grow_ ? kept : 1.0 - kept;
    RawMeasures out;
    for (std::size_t i = 0; i < m_; ++i)
      out["p" + std::to_string(i + 1)] = (1.0 - size_weight_) * u(rng) + size_weight_ * shrink;
    return out;
  }
  bool needs_dataset() const override { return false; }

  std::size_t calls = 0;

 private:
  std::uint64_t seed_;
  std::size_t m_;
  double size_weight_;
  bool grow_;
};

/// Values chosen by a callback on the bitmap; counts invocations.
class FnEstimator : public Estimator {
 public:
  explicit FnEstimator(std::function<RawMeasures(const StateBitmap&)> fn) : fn_(std::move(fn)) {}
  RawMeasures estimate(const StateBitmap& b, const Relation&) override {
    ++calls;
    order.push_back(b.bits());
    return fn_(b);
  }
  bool needs_dataset() const override { return false; }

  std::size_t calls = 0;
  std::vector<std::string> order;

 private:
  std::function<RawMeasures(const StateBitmap&)> fn_;
};

inline RawMeasures raw(std::initializer_list<double> v) {
  RawMeasures out;
  std::size_t i = 0;
  for (double x : v) out["p" + std::to_string(++i)] = x;
  return out;
}

inline StateBitmap bits(const std::string& s) { return StateBitmap::from_bits(s); }

/// The five tests of the running example, t1..t5.
inline const std::vector<std::vector<double>>& running_example() {
  static const std::vector<std::vector<double>> t = {
      {0.48, 0.33, 0.37}, {0.41, 0.24, 0.37}, {0.26, 0.15, 0.37}, {0.37, 0.22, 0.39}, {0.25, 0.18, 0.35}};
  return t;
}

}  // namespace fixtures
