#include "skyforge/skyline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "skyforge/errors.hpp"

namespace skyforge {

namespace {

void check_sizes(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw ArgumentError("performance vectors over different measure sets");
}

// floor(log_{1+eps}(v / pl)), corrected so that pl(1+eps)^k <= v < pl(1+eps)^(k+1)
// despite rounding in the logarithms.
long floor_log(double v, double pl, double eps) {
  if (!(v > 0) || !std::isfinite(v)) throw ArgumentError("grid values must be positive and finite");
  const double base = 1.0 + eps;
  long k = static_cast<long>(std::floor(std::log(v / pl) / std::log(base)));
  while (pl * std::pow(base, static_cast<double>(k + 1)) <= v) ++k;
  while (pl * std::pow(base, static_cast<double>(k)) > v) --k;
  return k;
}

}  // namespace

bool dominates(const std::vector<double>& a, const std::vector<double>& b) {
  check_sizes(a, b);
  bool strict = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] > b[i]) return false;
    if (a[i] < b[i]) strict = true;
  }
  return strict;
}

bool dominates(const PerfVector& a, const PerfVector& b) { return dominates(a.values(), b.values()); }

bool eps_dominates(const std::vector<double>& a, const std::vector<double>& b, double eps) {
  check_sizes(a, b);
  if (eps < 0) throw ArgumentError("epsilon must be non-negative");
  bool some = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] > (1.0 + eps) * b[i]) return false;
    if (a[i] <= b[i]) some = true;
  }
  return some;
}

bool eps_dominates(const PerfVector& a, const PerfVector& b, double eps) {
  return eps_dominates(a.values(), b.values(), eps);
}

GridPosition grid_pos(const std::vector<double>& v, const MeasureSet& measures, double eps) {
  if (v.size() != measures.size()) throw ArgumentError("vector does not match the measure set");
  if (!(eps > 0)) throw ArgumentError("epsilon must be positive");
  GridPosition pos;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i == measures.decisive()) continue;
    if (v[i] < measures[i].pl)
      throw BoundViolationError("measure '" + measures[i].name + "' below its lower bound");
    pos.push_back(floor_log(v[i], measures[i].pl, eps));
  }
  return pos;
}

long max_coordinate(const MeasureSpec& spec, double eps) { return floor_log(spec.pu, spec.pl, eps); }

SkylineGrid::SkylineGrid(MeasureSet measures, double eps) : measures_(std::move(measures)), eps_(eps) {
  if (!(eps_ > 0)) throw ArgumentError("epsilon must be positive");
}

SubmitResult SkylineGrid::submit(const StateBitmap& b, const std::vector<double>& perf) {
  if (perf.size() != measures_.size()) throw ArgumentError("vector does not match the measure set");
  for (std::size_t i = 0; i < perf.size(); ++i)
    if (perf[i] > measures_[i].pu) return SubmitResult::Rejected;

  GridEntry e{b, perf, {}, false};
  for (std::size_t i = 0; i < perf.size(); ++i) {
    if (i == measures_.decisive()) continue;
    if (perf[i] < measures_[i].pl) e.below_pl = true;
    e.pos.push_back(floor_log(perf[i], measures_[i].pl, eps_));
  }
  const std::size_t d = measures_.decisive();
  auto it = cells_.find(e.pos);
  if (it == cells_.end()) {
    auto pos = e.pos;
    cells_.emplace(std::move(pos), std::move(e));
    return SubmitResult::Inserted;
  }
  if (perf[d] < it->second.perf[d]) {
    it->second = std::move(e);
    return SubmitResult::Replaced;
  }
  return SubmitResult::Rejected;
}

bool SkylineGrid::contains(const StateBitmap& b) const {
  return std::any_of(cells_.begin(), cells_.end(), [&](const auto& c) { return c.second.bitmap == b; });
}

std::vector<GridEntry> SkylineGrid::occupants() const {
  std::vector<GridEntry> out;
  for (const auto& [pos, e] : cells_) out.push_back(e);
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.bitmap < b.bitmap; });
  return out;
}

double SkylineGrid::cell_bound() const {
  double prod = 1.0;
  for (std::size_t i = 0; i < measures_.size(); ++i)
    if (i != measures_.decisive()) prod *= static_cast<double>(max_coordinate(measures_[i], eps_) + 1);
  return prod;
}

bool SkylineGrid::erase(const StateBitmap& b) {
  for (auto it = cells_.begin(); it != cells_.end(); ++it) {
    if (it->second.bitmap == b) {
      cells_.erase(it);
      return true;
    }
  }
  return false;
}

std::vector<std::size_t> exact_pareto(const std::vector<std::vector<double>>& vectors) {
  std::vector<std::size_t> order(vectors.size());
  std::iota(order.begin(), order.end(), 0);
  // Any dominator sorts lexicographically before what it dominates, so one
  // pass against the maxima found so far suffices.
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return vectors[a] < vectors[b]; });
  std::vector<std::size_t> front;
  for (auto i : order) {
    bool out = false;
    for (auto j : front) {
      if (vectors[j] == vectors[i] || dominates(vectors[j], vectors[i])) {
        out = true;
        break;
      }
    }
    if (!out) front.push_back(i);
  }
  std::sort(front.begin(), front.end());
  return front;
}

std::vector<SearchState> exact_pareto(const std::vector<SearchState>& states) {
  std::vector<std::vector<double>> vs;
  for (const auto& s : states) {
    if (!s.perf) throw ArgumentError("exact_pareto needs valuated states");
    vs.push_back(s.perf->values());
  }
  std::vector<SearchState> out;
  for (auto i : exact_pareto(vs)) out.push_back(states[i]);
  return out;
}

}  // namespace skyforge
