#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "skyforge/measures.hpp"
#include "skyforge/test_log.hpp"

namespace skyforge {

/// Spearman rank correlation with average ranks for ties. Returns nullopt
/// when either sequence is constant. Throws ArgumentError unless
/// |xs| = |ys| >= 2.
std::optional<double> spearman(const std::vector<double>& xs, const std::vector<double>& ys);

/// Fewer logged tests than this give an empty graph.
inline constexpr std::size_t kMinCorrelationSupport = 3;

/// Undirected graph over the measures plus one extra node standing for
/// dataset size (the number of retained value bits). An edge joins two nodes
/// whose Spearman coefficient over the log has magnitude at least theta.
class CorrelationGraph {
 public:
  CorrelationGraph() = default;
  CorrelationGraph(std::size_t num_measures, double theta);

  /// Recomputes every edge from the current log.
  void rebuild(const TestLog& log);

  std::size_t num_measures() const { return m_; }
  std::size_t num_nodes() const { return m_ + 1; }
  std::size_t size_node() const { return m_; }
  double theta() const { return theta_; }

  /// Signed coefficient when (i, j) is an edge.
  std::optional<double> edge(std::size_t i, std::size_t j) const;
  bool has_edge(std::size_t i, std::size_t j) const { return edge(i, j).has_value(); }
  std::size_t num_edges() const;
  bool empty() const { return num_edges() == 0; }

 private:
  std::size_t m_ = 0;
  double theta_ = 1.0;
  std::vector<std::optional<double>> w_;  // (m+1)^2, symmetric
};

/// Value of graph node `node` for a logged test.
double node_value(const TestRecord& r, std::size_t node, std::size_t num_measures);

/// Estimated range of measure `p` for a state whose node `feature` has value
/// `x`: the spread of p over the log entries whose feature values most
/// tightly bracket x, clamped to [pl, pu]. Nullopt when no bracket exists.
std::optional<std::pair<double, double>> bracket_bounds(const TestLog& log, std::size_t feature,
                                                        double x, std::size_t p,
                                                        const MeasureSpec& spec,
                                                        std::size_t num_measures);

/// Fills the unvaluated entries of `partial` (for a state with `size_proxy`
/// retained bits) with ranges. Each unknown measure uses its most strongly
/// correlated neighbor among the known measures and the size node; with no
/// neighbor the entry stays unvaluated, with no bracket it becomes [pl, pu].
PerfVector estimate_bounds(const PerfVector& partial, double size_proxy, const TestLog& log,
                           const CorrelationGraph& graph, const MeasureSet& measures);

}  // namespace skyforge
