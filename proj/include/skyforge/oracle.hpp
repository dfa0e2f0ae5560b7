#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "skyforge/estimator.hpp"
#include "skyforge/operators.hpp"
#include "skyforge/search.hpp"
#include "skyforge/skyline.hpp"
#include "skyforge/test_log.hpp"

namespace skyforge {

inline constexpr std::size_t kDefaultMaxBits = 20;
inline constexpr std::size_t kMaxDivGround = 14;

/// Deliberately separate copies of the dominance predicates, so the oracle
/// does not trust the code it checks.
bool naive_dominates(const std::vector<double>& a, const std::vector<double>& b);
bool naive_eps_dominates(const std::vector<double>& a, const std::vector<double>& b, double eps);
/// O(n^2) Pareto filter; indices in input order, first of identical vectors kept.
std::vector<std::size_t> naive_pareto(const std::vector<std::vector<double>>& vectors);

struct Enumeration {
  std::vector<SearchState> states;  // non-degenerate, valuated, in bitmap order
  std::size_t total = 0;            // 2^bits
  std::size_t degenerate = 0;
};

/// Valuates every non-degenerate bitmap. Throws EnumerationLimitError when
/// the layout has more than `max_bits` bits.
Enumeration enumerate_all(const StateSpace& space, Estimator& est, TestLog& log,
                          const MeasureSet& measures, std::size_t max_bits = kDefaultMaxBits);

struct Violation {
  StateBitmap bitmap;
  std::string reason;
};

struct EnumerationReport {
  std::size_t total_states = 0;
  std::size_t degenerate = 0;
  std::vector<StateBitmap> exact_front;
  std::vector<Violation> eps_cover_violations;
  /// Exact-front members no grid occupant eps-dominates. Only checked for
  /// an unbounded forward search (front_checked).
  bool front_checked = false;
  std::vector<Violation> front_uncovered;
  std::size_t pruned_validated = 0;
  std::vector<Violation> pruning_violations;
  std::optional<double> div_ratio;
  std::size_t occupied_cells = 0;
  double cell_bound = 0.0;

  nlohmann::json to_json() const;
};

/// Every state within pu on all measures must be eps-dominated by an occupant.
EnumerationReport check_eps_cover(const SkylineGrid& grid, const std::vector<SearchState>& all, double eps);

/// Marks exact-front members not eps-dominated by any occupant.
std::vector<Violation> check_front_coverage(const SkylineGrid& grid, const std::vector<SearchState>& front,
                                            double eps);

/// Force-valuates each pruned state (into `scratch`) and checks that some
/// state of `valuated` eps-dominates it. Returns the failures; `validated`
/// receives the number that passed.
std::vector<Violation> check_pruned(const std::vector<StateBitmap>& pruned,
                                    const std::vector<SearchState>& valuated, const StateSpace& space,
                                    Estimator& est, TestLog& scratch, const MeasureSet& measures, double eps,
                                    std::size_t& validated);

/// div(chosen) over the best div of any k-subset of `ground`.
double check_div_bound(const std::vector<SearchState>& chosen, const std::vector<SearchState>& ground,
                       std::size_t k, double alpha, const TestLog& log, const BitLayout& layout);

/// States the run valuated, with their vectors, in submission order.
std::vector<SearchState> valuated_states(const SearchResult& r);

/// Full post-hoc verification of a finished run.
EnumerationReport verify_run(const StateSpace& space, const MeasureSet& measures, const SearchConfig& cfg,
                             Estimator& est, const SearchResult& run, const TestLog& run_log,
                             std::size_t max_bits = kDefaultMaxBits);

/// True when eps-cover, front coverage, the div bound and the grid bound
/// all hold. Pruning findings are informational.
bool report_ok(const EnumerationReport& r);

}  // namespace skyforge
