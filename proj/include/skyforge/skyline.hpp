#pragma once

#include <cstddef>
#include <map>
#include <vector>

#include "skyforge/bitmap.hpp"
#include "skyforge/measures.hpp"
#include "skyforge/operators.hpp"

namespace skyforge {

/// a dominates b: no worse everywhere, strictly better somewhere.
bool dominates(const std::vector<double>& a, const std::vector<double>& b);
bool dominates(const PerfVector& a, const PerfVector& b);

/// a.p <= (1+eps) b.p for every p, and a.p <= b.p for at least one p.
bool eps_dominates(const std::vector<double>& a, const std::vector<double>& b, double eps);
bool eps_dominates(const PerfVector& a, const PerfVector& b, double eps);

using GridPosition = std::vector<long>;

/// floor(log_{1+eps}(v.p / pl)) over the non-decisive measures, in
/// declaration order. Throws BoundViolationError when some v.p < pl.
GridPosition grid_pos(const std::vector<double>& v, const MeasureSet& measures, double eps);

/// Largest coordinate a measure can take: floor(log_{1+eps}(pu / pl)).
long max_coordinate(const MeasureSpec& spec, double eps);

enum class SubmitResult { Inserted, Replaced, Rejected };

struct GridEntry {
  StateBitmap bitmap;
  std::vector<double> perf;
  GridPosition pos;
  bool below_pl = false;  // some measure sits under its pl
};

/// The eps-discretized archive: at most one state per grid position.
class SkylineGrid {
 public:
  SkylineGrid() = default;
  SkylineGrid(MeasureSet measures, double eps);

  /// Rejects vectors above pu on any measure; otherwise inserts into an empty
  /// cell or replaces the occupant iff the decisive value is strictly lower.
  /// Values under pl get negative coordinates and are flagged, not rejected.
  SubmitResult submit(const StateBitmap& b, const std::vector<double>& perf);

  const std::map<GridPosition, GridEntry>& cells() const { return cells_; }
  std::size_t size() const { return cells_.size(); }
  bool empty() const { return cells_.empty(); }
  bool contains(const StateBitmap& b) const;
  /// Occupants in bitmap order.
  std::vector<GridEntry> occupants() const;

  /// prod over non-decisive measures of (max_coordinate + 1).
  double cell_bound() const;

  const MeasureSet& measures() const { return measures_; }
  double epsilon() const { return eps_; }

  /// Drops an occupant; used to fabricate broken grids in verification tests.
  bool erase(const StateBitmap& b);

 private:
  MeasureSet measures_;
  double eps_ = 0.0;
  std::map<GridPosition, GridEntry> cells_;
};

/// Indices (in input order) of the Pareto-optimal vectors. Of several
/// identical vectors only the first is kept.
std::vector<std::size_t> exact_pareto(const std::vector<std::vector<double>>& vectors);
/// Same over valuated states; throws ArgumentError on an unvaluated state.
std::vector<SearchState> exact_pareto(const std::vector<SearchState>& states);

}  // namespace skyforge
