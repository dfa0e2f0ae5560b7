#include "skyforge/search.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <deque>
#include <exception>
#include <set>
#include <thread>
#include <unordered_set>

#include "skyforge/errors.hpp"

namespace skyforge {

const char* to_string(Algorithm a) {
  switch (a) {
    case Algorithm::Apx: return "apx";
    case Algorithm::Bi: return "bi";
    case Algorithm::NoBi: return "nobi";
    case Algorithm::Div: return "div";
  }
  return "?";
}

Algorithm parse_algorithm(const std::string& s) {
  if (s == "apx") return Algorithm::Apx;
  if (s == "bi") return Algorithm::Bi;
  if (s == "nobi") return Algorithm::NoBi;
  if (s == "div") return Algorithm::Div;
  throw ArgumentError("unknown algorithm '" + s + "'");
}

const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::Exhausted: return "exhausted";
    case StopReason::Budget: return "budget";
    case StopReason::FrontierMet: return "frontier_met";
    case StopReason::EstimatorFailure: return "estimator_failure";
  }
  return "?";
}

void SearchConfig::validate() const {
  if (!(epsilon > 0) || !std::isfinite(epsilon)) throw ArgumentError("epsilon must be positive");
  if (budget < 1) throw ArgumentError("budget must be at least 1");
  if (algorithm == Algorithm::Div && k < 1) throw ArgumentError("k must be at least 1");
  if (!(alpha >= 0 && alpha <= 1)) throw ArgumentError("alpha must lie in [0, 1]");
  if (!(theta >= 0 && theta <= 1)) throw ArgumentError("theta must lie in [0, 1]");
  if (workers < 1) throw ArgumentError("workers must be at least 1");
}

void RunningGraph::add_root(const SearchState& s, SearchDirection dir) {
  if (nodes_.count(s.bitmap)) return;
  nodes_.emplace(s.bitmap, GraphNode{s, dir, NodeStatus::Valuated, std::nullopt});
  roots_.push_back(s.bitmap);
}

void RunningGraph::add(const StateBitmap& from, const Operator& op, const SearchState& to,
                       SearchDirection dir, NodeStatus status) {
  if (!nodes_.count(from)) throw ArgumentError("edge from an unknown state");
  if (nodes_.count(to.bitmap)) {
    add_edge(from, op, to.bitmap);
    return;
  }
  Transition t{from, op, to.bitmap};
  nodes_.emplace(to.bitmap, GraphNode{to, dir, status, t});
  edges_.push_back(std::move(t));
}

void RunningGraph::add_edge(const StateBitmap& from, const Operator& op, const StateBitmap& to) {
  if (!nodes_.count(from) || !nodes_.count(to)) throw ArgumentError("edge between unknown states");
  if (from.hamming(to) != 1) throw ArgumentError("edges must flip exactly one bit");
  edges_.push_back({from, op, to});
}

std::vector<Transition> RunningGraph::path_to(const StateBitmap& b) const {
  std::vector<Transition> path;
  const GraphNode* n = &nodes_.at(b);
  while (n->via) {
    path.push_back(*n->via);
    n = &nodes_.at(n->via->from);
  }
  std::reverse(path.begin(), path.end());
  return path;
}

SearchState back_st(const StateSpace& space, const std::string& target, bool needs_feature) {
  const auto& rel = space.universal().relation();
  auto col = rel.column_index(target);
  if (!col) throw ArgumentError("target attribute '" + target + "' is not in the universal schema");
  const auto& layout = space.layout();
  StateBitmap b(layout.num_bits());
  for (std::size_t l = 0; l < layout.width(*col); ++l) b.set(layout.bit(*col, l));
  if (needs_feature) {
    for (std::size_t a = 0; a < layout.num_attributes(); ++a) {
      if (a == *col || layout.width(a) == 0) continue;
      b.set(layout.bit(a, 0));
      break;
    }
  }
  if (space.is_degenerate(b)) throw DegenerateStateError("backward start state is empty");
  return {b, 0, std::nullopt};
}

bool param_eps_dominates(const PerfVector& a, const PerfVector& b, double eps) {
  if (a.size() != b.size()) throw ArgumentError("performance vectors over different measure sets");
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto& x = a.entries[i];
    const auto& y = b.entries[i];
    if (!x.is_known() || !y.is_known()) return false;
    // Valuated entries act as degenerate ranges, which covers all three cases.
    if (x.upper() > (1.0 + eps) * y.lower()) return false;
  }
  return true;
}

bool can_prune(const SearchState& mid, const SearchState& fwd, const SearchState& bwd, double eps,
               const CorrelationGraph& graph, const TestLog& log, const MeasureSet& measures) {
  if (mid.bitmap == fwd.bitmap || mid.bitmap == bwd.bitmap) return false;
  if (!bwd.bitmap.is_subset_of(mid.bitmap) || !mid.bitmap.is_subset_of(fwd.bitmap)) return false;
  if (graph.empty()) return false;

  PerfVector partial = mid.perf ? *mid.perf : PerfVector(measures.size());
  PerfVector est = estimate_bounds(partial, static_cast<double>(mid.bitmap.count()), log, graph, measures);
  for (const auto& e : est.entries)
    if (!e.is_known()) return false;

  for (const SearchState* end : {&bwd, &fwd}) {
    if (!end->perf || !end->perf->fully_valuated()) continue;
    const auto v = end->perf->values();
    bool all = true, some = false;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double lo = est.entries[i].lower();
      if (v[i] > (1.0 + eps) * lo) all = false;
      if (v[i] <= lo) some = true;
    }
    if (all && some) return true;
  }
  return false;
}

namespace {

double cosine(const StateBitmap& a, const StateBitmap& b, const BitLayout& layout) {
  if (a == b) return 1.0;
  double dot = 0, na = 0, nb = 0;
  for (std::size_t attr = 0; attr < layout.num_attributes(); ++attr) {
    const bool x = layout.attr_present(a, attr), y = layout.attr_present(b, attr);
    dot += x && y;
    na += x;
    nb += y;
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    const bool x = a.test(i), y = b.test(i);
    dot += x && y;
    na += x;
    nb += y;
  }
  if (na == 0 || nb == 0) return 0.0;
  return dot / std::sqrt(na * nb);
}

}  // namespace

double dis_score(const SearchState& a, const SearchState& b, double alpha, const TestLog& log,
                 const BitLayout& layout) {
  if (!a.perf || !b.perf) throw ArgumentError("dis_score needs valuated states");
  if (a.bitmap.size() != b.bitmap.size()) throw ArgumentError("bitmaps differ in length");
  const double cos_term = (1.0 - cosine(a.bitmap, b.bitmap, layout)) / 2.0;
  const auto pa = a.perf->values(), pb = b.perf->values();
  const double em = log.size() < 2 ? std::sqrt(static_cast<double>(pa.size())) : log.max_pairwise_distance();
  const double euc_term = em > 0 ? std::min(1.0, euclidean(pa, pb) / em) : 0.0;
  return alpha * cos_term + (1.0 - alpha) * euc_term;
}

double div_score(const std::vector<SearchState>& set, double alpha, const TestLog& log,
                 const BitLayout& layout) {
  double s = 0.0;
  for (std::size_t i = 0; i < set.size(); ++i)
    for (std::size_t j = i + 1; j < set.size(); ++j) s += dis_score(set[i], set[j], alpha, log, layout);
  return s;
}

std::vector<SearchState> diversify_level(std::vector<SearchState> level, std::size_t k, double alpha,
                                         const TestLog& log, const BitLayout& layout) {
  if (level.size() <= k) return level;
  std::stable_sort(level.begin(), level.end(), [](const auto& a, const auto& b) { return a.bitmap < b.bitmap; });
  std::vector<SearchState> chosen(level.begin(), level.begin() + static_cast<std::ptrdiff_t>(k));
  double score = div_score(chosen, alpha, log, layout);
  for (std::size_t x = k; x < level.size(); ++x) {
    std::optional<std::size_t> best;
    double best_score = score;
    for (std::size_t y = 0; y < chosen.size(); ++y) {
      auto trial = chosen;
      trial[y] = level[x];
      const double s = div_score(trial, alpha, log, layout);
      if (s > best_score) {
        best = y;
        best_score = s;
      }
    }
    if (best) {
      chosen[*best] = level[x];
      score = best_score;
    }
  }
  return chosen;
}

namespace {

struct Options {
  bool backward = false;
  bool pruning = false;
  bool diversify = false;
};

// Shared driver: forward search alone (ApxMODis) or interleaved with the
// backward search, optionally pruning and diversifying.
class Engine {
 public:
  Engine(const StateSpace& space, const MeasureSet& measures, const SearchConfig& cfg, Estimator& est,
         TestLog& log, Options opt)
      : space_(space), measures_(measures), cfg_(cfg), est_(est), log_(log), opt_(opt),
        calls_before_(log.estimator_calls()), corr_(measures.size(), cfg.theta) {
    cfg_.validate();
    result_.grid = SkylineGrid(measures_, cfg_.epsilon);
  }

  SearchResult run() {
    try {
      loop();
    } catch (const EstimatorFailure& f) {
      result_.stop = StopReason::EstimatorFailure;
      result_.partial = true;
      result_.failure = f.what();
      result_.failed_bitmap = f.bitmap;
    }
    result_.estimator_calls = log_.estimator_calls() - calls_before_;
    if (opt_.diversify) {
      std::sort(reported_.begin(), reported_.end(), [](const auto& a, const auto& b) { return a.bitmap < b.bitmap; });
      for (const auto& s : reported_) result_.diversified.push_back(s.bitmap);
    }
    return std::move(result_);
  }

 private:
  struct Front {
    SearchDirection dir;
    std::deque<SearchState> queue;
    std::unordered_set<StateBitmap, BitmapHash> pending;
  };

  std::size_t remaining() const {
    const std::size_t used = log_.estimator_calls() - calls_before_;
    return used >= cfg_.budget ? 0 : cfg_.budget - used;
  }

  // Valuates the longest prefix of `states` the budget allows; returns its length.
  std::size_t valuate_prefix(std::vector<SearchState*>& states) {
    std::size_t rem = remaining(), n = 0;
    for (; n < states.size(); ++n) {
      if (log_.contains(states[n]->bitmap)) continue;
      if (rem == 0) break;
      --rem;
    }
    if (n < states.size()) budget_hit_ = true;

    // Estimates run concurrently; the log is appended in input order so it
    // does not depend on the worker count.
    std::vector<std::optional<TestRecord>> records(n);
    std::vector<std::exception_ptr> errors(n);
    auto work = [&](std::size_t i) {
      if (log_.contains(states[i]->bitmap)) return;
      try {
        records[i] = evaluate(states[i]->bitmap, est_, log_, space_, measures_);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    };
    const std::size_t workers = std::min(cfg_.workers, n);
    if (workers <= 1) {
      for (std::size_t i = 0; i < n; ++i) work(i);
    } else {
      std::atomic<std::size_t> next{0};
      std::vector<std::thread> pool;
      for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&] {
          for (std::size_t i; (i = next++) < n;) work(i);
        });
      for (auto& t : pool) t.join();
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (errors[i]) std::rethrow_exception(errors[i]);
      if (records[i]) log_.append(std::move(*records[i]));
      states[i]->perf = PerfVector::of(log_.find(states[i]->bitmap)->perf);
    }
    return n;
  }

  SubmitResult submit(const SearchState& s) {
    result_.submitted.push_back(s.bitmap);
    return result_.grid.submit(s.bitmap, s.perf->values());
  }

  bool start(Front& f, SearchState root) {
    std::vector<SearchState*> one{&root};
    if (visited_.count(root.bitmap)) return true;
    if (valuate_prefix(one) == 0) return false;
    visited_.insert(root.bitmap);
    result_.graph.add_root(root, f.dir);
    if (submit(root) != SubmitResult::Rejected) accepted_.push_back(root);
    f.pending.insert(root.bitmap);
    f.queue.push_back(std::move(root));
    return true;
  }

  void loop() {
    if (space_.is_degenerate(space_.full())) throw ArgumentError("universal table is empty");
    fwd_.dir = SearchDirection::Forward;
    bwd_.dir = SearchDirection::Backward;
    if (!start(fwd_, space_.root())) {
      result_.stop = StopReason::Budget;
      return;
    }
    if (opt_.backward) {
      SearchState b = back_st(space_, cfg_.target, est_.requires_feature_column());
      if (b.bitmap == space_.full()) {
        result_.stop = StopReason::FrontierMet;
        return;
      }
      if (!start(bwd_, b)) {
        result_.stop = StopReason::Budget;
        return;
      }
    }
    refresh_reported();

    while (!fwd_.queue.empty() || !bwd_.queue.empty()) {
      iter_f_.clear();
      iter_b_.clear();
      bool met = step(fwd_, bwd_, iter_f_);
      if (!budget_hit_ && opt_.backward) met = step(bwd_, fwd_, iter_b_) || met;
      if (opt_.pruning) record_pairs();
      refresh_reported();
      if (budget_hit_) {
        result_.stop = StopReason::Budget;
        return;
      }
      if (met) {
        result_.stop = StopReason::FrontierMet;
        return;
      }
    }
    result_.stop = StopReason::Exhausted;
  }

  // One dequeue in direction `f`; returns whether the frontiers met.
  bool step(Front& f, Front& other, std::vector<SearchState>& touched) {
    if (f.queue.empty()) return false;
    SearchState s = std::move(f.queue.front());
    f.queue.pop_front();
    f.pending.erase(s.bitmap);
    touched.push_back(s);
    if (s.level >= cfg_.max_length) return false;

    bool met = false;
    std::vector<Child> fresh;
    for (auto& c : op_gen(s, f.dir, space_)) {
      if (other.pending.count(c.state.bitmap)) {
        met = true;
        continue;
      }
      if (visited_.count(c.state.bitmap)) {
        const auto& g = result_.graph;
        if (g.contains(c.state.bitmap) && g.node(c.state.bitmap).direction == f.dir)
          result_.graph.add_edge(s.bitmap, c.op, c.state.bitmap);
        continue;
      }
      fresh.push_back(std::move(c));
    }

    if (opt_.pruning && !result_.pairs.empty() && !fresh.empty()) {
      // Ranking the whole log is O(n log n), so refreshing on every step is
      // quadratic. Refresh once the log has grown by a sixteenth.
      const std::size_t n = log_.size();
      if (n != corr_size_ && (corr_size_ < kCorrExact || n >= corr_size_ + corr_size_ / 16)) {
        corr_.rebuild(log_);
        corr_size_ = n;
      }
      std::vector<Child> kept;
      for (auto& c : fresh) {
        if (!log_.contains(c.state.bitmap) && prunable(c.state)) {
          visited_.insert(c.state.bitmap);
          result_.pruned.push_back(c.state.bitmap);
          result_.graph.add(s.bitmap, c.op, c.state, f.dir, NodeStatus::Pruned);
        } else {
          kept.push_back(std::move(c));
        }
      }
      fresh = std::move(kept);
    }

    std::vector<SearchState*> batch;
    for (auto& c : fresh) batch.push_back(&c.state);
    const std::size_t n = valuate_prefix(batch);
    fresh.resize(n);

    std::vector<SearchState> level;
    for (auto& c : fresh) {
      visited_.insert(c.state.bitmap);
      result_.graph.add(s.bitmap, c.op, c.state, f.dir);
      if (submit(c.state) != SubmitResult::Rejected) accepted_.push_back(c.state);
      touched.push_back(c.state);
      level.push_back(c.state);
    }
    if (opt_.diversify)
      level = diversify_level(std::move(level), cfg_.k, cfg_.alpha, log_, space_.layout());
    for (auto& c : level) {
      f.pending.insert(c.bitmap);
      f.queue.push_back(std::move(c));
    }
    return met;
  }

  bool prunable(const SearchState& mid) const {
    for (const auto& p : result_.pairs) {
      if (!p.backward.is_subset_of(mid.bitmap) || !mid.bitmap.is_subset_of(p.forward)) continue;
      const auto& g = result_.graph;
      if (can_prune(mid, g.node(p.forward).state, g.node(p.backward).state, cfg_.epsilon, corr_, log_, measures_))
        return true;
    }
    return false;
  }

  void record_pairs() {
    for (const auto& f : iter_f_) {
      for (const auto& b : iter_b_) {
        if (!f.perf || !b.perf) continue;
        if (b.bitmap.hamming(f.bitmap) < 2 || !b.bitmap.is_subset_of(f.bitmap)) continue;
        if (!param_eps_dominates(*b.perf, *f.perf, cfg_.epsilon)) continue;
        if (pair_keys_.insert(f.bitmap.hex() + "/" + b.bitmap.hex()).second)
          result_.pairs.push_back({f.bitmap, b.bitmap});
      }
    }
  }

  // Streams the newly accepted occupants into the reported k-set.
  void refresh_reported() {
    if (!opt_.diversify) return;
    std::vector<SearchState> cand;
    std::set<StateBitmap> seen;
    auto take = [&](const SearchState& s) {
      if (result_.grid.contains(s.bitmap) && seen.insert(s.bitmap).second) cand.push_back(s);
    };
    for (const auto& s : reported_) take(s);
    for (const auto& s : accepted_) take(s);
    accepted_.clear();
    reported_ = diversify_level(std::move(cand), cfg_.k, cfg_.alpha, log_, space_.layout());
  }

  const StateSpace& space_;
  const MeasureSet& measures_;
  SearchConfig cfg_;
  Estimator& est_;
  TestLog& log_;
  Options opt_;
  std::size_t calls_before_;
  CorrelationGraph corr_;
  std::size_t corr_size_ = 0;  // log size at the last rebuild
  static constexpr std::size_t kCorrExact = 256;

  SearchResult result_;
  Front fwd_, bwd_;
  std::unordered_set<StateBitmap, BitmapHash> visited_;
  std::vector<SearchState> iter_f_, iter_b_;
  std::set<std::string> pair_keys_;
  std::vector<SearchState> accepted_;
  std::vector<SearchState> reported_;
  bool budget_hit_ = false;
};

}  // namespace

SearchResult run_apx(const StateSpace& space, const MeasureSet& measures, const SearchConfig& cfg,
                     Estimator& est, TestLog& log) {
  return Engine(space, measures, cfg, est, log, {false, false, false}).run();
}

SearchResult run_bi(const StateSpace& space, const MeasureSet& measures, const SearchConfig& cfg,
                    Estimator& est, TestLog& log, bool pruning) {
  return Engine(space, measures, cfg, est, log, {true, pruning, false}).run();
}

SearchResult run_div(const StateSpace& space, const MeasureSet& measures, const SearchConfig& cfg,
                     Estimator& est, TestLog& log) {
  return Engine(space, measures, cfg, est, log, {true, true, true}).run();
}

SearchResult run_search(const StateSpace& space, const MeasureSet& measures, const SearchConfig& cfg,
                        Estimator& est, TestLog& log) {
  switch (cfg.algorithm) {
    case Algorithm::Apx: return run_apx(space, measures, cfg, est, log);
    case Algorithm::Bi: return run_bi(space, measures, cfg, est, log, true);
    case Algorithm::NoBi: return run_bi(space, measures, cfg, est, log, false);
    case Algorithm::Div: return run_div(space, measures, cfg, est, log);
  }
  throw ArgumentError("unknown algorithm");
}

}  // namespace skyforge
