#pragma once

#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "skyforge/correlation.hpp"
#include "skyforge/estimator.hpp"
#include "skyforge/operators.hpp"
#include "skyforge/skyline.hpp"
#include "skyforge/test_log.hpp"

namespace skyforge {

enum class Algorithm { Apx, Bi, NoBi, Div };

const char* to_string(Algorithm a);
Algorithm parse_algorithm(const std::string& s);

struct SearchConfig {
  double epsilon = 0.1;
  std::size_t budget = 1000;  // estimator invocations; log hits are free
  std::size_t max_length = std::numeric_limits<std::size_t>::max();
  Algorithm algorithm = Algorithm::Apx;
  std::size_t k = 5;
  double alpha = 0.5;
  double theta = 0.8;
  std::string target;  // start of the backward search
  std::size_t workers = 1;

  /// Throws ArgumentError on out-of-range values.
  void validate() const;
};

enum class NodeStatus { Valuated, Pruned };

struct GraphNode {
  SearchState state;
  SearchDirection direction = SearchDirection::Forward;
  NodeStatus status = NodeStatus::Valuated;
  /// Edge that first reached the node; empty for roots.
  std::optional<Transition> via;
};

/// States reached by the run and the one-flip transitions between them.
class RunningGraph {
 public:
  void add_root(const SearchState& s, SearchDirection dir);
  /// Adds `to` (when new) reached from `from` by `op`, and the edge.
  void add(const StateBitmap& from, const Operator& op, const SearchState& to, SearchDirection dir,
           NodeStatus status = NodeStatus::Valuated);
  void add_edge(const StateBitmap& from, const Operator& op, const StateBitmap& to);

  const std::map<StateBitmap, GraphNode>& nodes() const { return nodes_; }
  const std::vector<Transition>& edges() const { return edges_; }
  const std::vector<StateBitmap>& roots() const { return roots_; }
  bool contains(const StateBitmap& b) const { return nodes_.count(b) != 0; }
  const GraphNode& node(const StateBitmap& b) const { return nodes_.at(b); }

  /// Transitions from a root to `b` along first-discovery edges.
  std::vector<Transition> path_to(const StateBitmap& b) const;

 private:
  std::map<StateBitmap, GraphNode> nodes_;
  std::vector<Transition> edges_;
  std::vector<StateBitmap> roots_;
};

/// A forward state and a backward state with bwd param-eps-dominating fwd;
/// states strictly between them (by containment) are pruning candidates.
struct PrunePair {
  StateBitmap forward;
  StateBitmap backward;
};

enum class StopReason { Exhausted, Budget, FrontierMet, EstimatorFailure };

const char* to_string(StopReason r);

struct SearchResult {
  SkylineGrid grid;
  RunningGraph graph;
  /// Valuated states in submission order (roots included).
  std::vector<StateBitmap> submitted;
  std::vector<StateBitmap> pruned;
  std::vector<PrunePair> pairs;
  /// DivMODis only: the reported diversified set, in bitmap order.
  std::vector<StateBitmap> diversified;
  std::size_t estimator_calls = 0;
  StopReason stop = StopReason::Exhausted;
  bool partial = false;
  std::string failure;
  std::string failed_bitmap;
};

/// Start of the backward search: every literal of `target`, plus the first
/// literal of the first other attribute when `needs_feature` is set.
SearchState back_st(const StateSpace& space, const std::string& target, bool needs_feature);

/// Parameterized eps-dominance of `a` over `b`; false when some entry is
/// unvaluated and unbounded.
bool param_eps_dominates(const PerfVector& a, const PerfVector& b, double eps);

/// Whether `mid` may be skipped: it lies strictly between bwd and fwd by
/// containment, and some valuated endpoint eps-dominates every value the
/// estimated bounds of `mid` allow.
bool can_prune(const SearchState& mid, const SearchState& fwd, const SearchState& bwd, double eps,
               const CorrelationGraph& graph, const TestLog& log, const MeasureSet& measures);

/// Blend of bitmap cosine dissimilarity and normalized Euclidean distance.
double dis_score(const SearchState& a, const SearchState& b, double alpha, const TestLog& log,
                 const BitLayout& layout);
double div_score(const std::vector<SearchState>& set, double alpha, const TestLog& log,
                 const BitLayout& layout);

/// Picks at most k states: the first k in bitmap order, then one pass of
/// improving swaps.
std::vector<SearchState> diversify_level(std::vector<SearchState> level, std::size_t k, double alpha,
                                         const TestLog& log, const BitLayout& layout);

SearchResult run_apx(const StateSpace& space, const MeasureSet& measures, const SearchConfig& cfg,
                     Estimator& est, TestLog& log);
SearchResult run_bi(const StateSpace& space, const MeasureSet& measures, const SearchConfig& cfg,
                    Estimator& est, TestLog& log, bool pruning);
SearchResult run_div(const StateSpace& space, const MeasureSet& measures, const SearchConfig& cfg,
                     Estimator& est, TestLog& log);
/// Dispatches on cfg.algorithm.
SearchResult run_search(const StateSpace& space, const MeasureSet& measures, const SearchConfig& cfg,
                        Estimator& est, TestLog& log);

}  // namespace skyforge
