#include "skyforge/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "skyforge/errors.hpp"

namespace skyforge {

bool naive_dominates(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw ArgumentError("vectors differ in length");
  std::size_t no_worse = 0, better = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    no_worse += a[i] <= b[i];
    better += a[i] < b[i];
  }
  return no_worse == a.size() && better > 0;
}

bool naive_eps_dominates(const std::vector<double>& a, const std::vector<double>& b, double eps) {
  if (a.size() != b.size()) throw ArgumentError("vectors differ in length");
  std::size_t within = 0, no_worse = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    within += a[i] <= (1.0 + eps) * b[i];
    no_worse += a[i] <= b[i];
  }
  return within == a.size() && no_worse > 0;
}

std::vector<std::size_t> naive_pareto(const std::vector<std::vector<double>>& v) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    bool keep = true;
    for (std::size_t j = 0; j < v.size() && keep; ++j) {
      if (naive_dominates(v[j], v[i])) keep = false;
      if (j < i && v[j] == v[i]) keep = false;
    }
    if (keep) out.push_back(i);
  }
  return out;
}

Enumeration enumerate_all(const StateSpace& space, Estimator& est, TestLog& log,
                          const MeasureSet& measures, std::size_t max_bits) {
  const std::size_t bits = space.num_bits();
  if (bits > max_bits || bits >= 63)
    throw EnumerationLimitError("enumeration needs " + std::to_string(bits) + " bits, limit is " +
                                    std::to_string(max_bits),
                                bits);
  Enumeration out;
  out.total = std::size_t{1} << bits;
  for (std::size_t mask = 0; mask < out.total; ++mask) {
    StateBitmap b(bits);
    for (std::size_t i = 0; i < bits; ++i)
      if ((mask >> i) & 1u) b.set(i);
    if (space.is_degenerate(b)) {
      ++out.degenerate;
      continue;
    }
    SearchState s{b, bits - b.count(), std::nullopt};
    s.perf = PerfVector::of(valuate(b, est, log, space, measures));
    out.states.push_back(std::move(s));
  }
  std::sort(out.states.begin(), out.states.end(), [](const auto& a, const auto& b) { return a.bitmap < b.bitmap; });
  return out;
}

namespace {

bool within_pu(const std::vector<double>& v, const MeasureSet& m) {
  for (std::size_t i = 0; i < v.size(); ++i)
    if (v[i] > m[i].pu) return false;
  return true;
}

bool covered(const SkylineGrid& grid, const std::vector<double>& v, double eps) {
  for (const auto& [pos, e] : grid.cells())
    if (naive_eps_dominates(e.perf, v, eps)) return true;
  return false;
}

std::string text(const std::vector<double>& v) {
  std::string s = "(";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v[i]);
    s += buf;
  }
  return s + ")";
}

}  // namespace

EnumerationReport check_eps_cover(const SkylineGrid& grid, const std::vector<SearchState>& all, double eps) {
  EnumerationReport r;
  r.occupied_cells = grid.size();
  r.cell_bound = grid.cell_bound();
  for (const auto& s : all) {
    if (!s.perf) continue;
    const auto v = s.perf->values();
    if (!within_pu(v, grid.measures())) continue;
    if (!covered(grid, v, eps))
      r.eps_cover_violations.push_back({s.bitmap, "no occupant eps-dominates " + text(v)});
  }
  return r;
}

std::vector<Violation> check_front_coverage(const SkylineGrid& grid, const std::vector<SearchState>& front,
                                            double eps) {
  std::vector<Violation> out;
  for (const auto& s : front) {
    const auto v = s.perf->values();
    if (!covered(grid, v, eps)) out.push_back({s.bitmap, "front member " + text(v) + " is not covered"});
  }
  return out;
}

std::vector<Violation> check_pruned(const std::vector<StateBitmap>& pruned,
                                    const std::vector<SearchState>& valuated, const StateSpace& space,
                                    Estimator& est, TestLog& scratch, const MeasureSet& measures, double eps,
                                    std::size_t& validated) {
  std::vector<Violation> out;
  validated = 0;
  for (const auto& b : pruned) {
    const auto v = valuate(b, est, scratch, space, measures);
    bool ok = false;
    for (const auto& s : valuated) {
      if (s.perf && naive_eps_dominates(s.perf->values(), v, eps)) {
        ok = true;
        break;
      }
    }
    if (ok)
      ++validated;
    else
      out.push_back({b, "pruned state " + text(v) + " is not eps-dominated by a valuated state"});
  }
  return out;
}

namespace {

double oracle_div(const std::vector<const SearchState*>& set, double alpha, const TestLog& log,
                  const BitLayout& layout) {
  double s = 0;
  for (std::size_t i = 0; i < set.size(); ++i)
    for (std::size_t j = i + 1; j < set.size(); ++j) s += dis_score(*set[i], *set[j], alpha, log, layout);
  return s;
}

}  // namespace

double check_div_bound(const std::vector<SearchState>& chosen, const std::vector<SearchState>& ground,
                       std::size_t k, double alpha, const TestLog& log, const BitLayout& layout) {
  if (k > ground.size()) throw ArgumentError("k exceeds the ground set");
  if (ground.size() > kMaxDivGround) throw ArgumentError("ground set too large to enumerate");
  double best = 0.0;
  std::vector<bool> pick(ground.size(), false);
  std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(k), true);
  do {
    std::vector<const SearchState*> subset;
    for (std::size_t i = 0; i < ground.size(); ++i)
      if (pick[i]) subset.push_back(&ground[i]);
    best = std::max(best, oracle_div(subset, alpha, log, layout));
  } while (std::prev_permutation(pick.begin(), pick.end()));
  std::vector<const SearchState*> mine;
  for (const auto& s : chosen) mine.push_back(&s);
  const double got = oracle_div(mine, alpha, log, layout);
  if (best <= 0.0) return 1.0;
  return got / best;
}

std::vector<SearchState> valuated_states(const SearchResult& r) {
  std::vector<SearchState> out;
  for (const auto& b : r.submitted) out.push_back(r.graph.node(b).state);
  return out;
}

EnumerationReport verify_run(const StateSpace& space, const MeasureSet& measures, const SearchConfig& cfg,
                             Estimator& est, const SearchResult& run, const TestLog& run_log,
                             std::size_t max_bits) {
  TestLog scratch;
  Enumeration all = enumerate_all(space, est, scratch, measures, max_bits);

  const auto mine = valuated_states(run);
  EnumerationReport r = check_eps_cover(run.grid, mine, cfg.epsilon);
  r.total_states = all.total;
  r.degenerate = all.degenerate;

  std::vector<SearchState> in_bounds;
  for (const auto& s : all.states)
    if (within_pu(s.perf->values(), measures)) in_bounds.push_back(s);
  std::vector<std::vector<double>> vs;
  for (const auto& s : in_bounds) vs.push_back(s.perf->values());
  std::vector<SearchState> front;
  for (auto i : naive_pareto(vs)) {
    front.push_back(in_bounds[i]);
    r.exact_front.push_back(in_bounds[i].bitmap);
  }

  if (cfg.algorithm == Algorithm::Apx && run.stop == StopReason::Exhausted &&
      cfg.max_length >= space.num_bits()) {
    r.front_checked = true;
    r.front_uncovered = check_front_coverage(run.grid, front, cfg.epsilon);
  }

  r.pruning_violations =
      check_pruned(run.pruned, mine, space, est, scratch, measures, cfg.epsilon, r.pruned_validated);

  if (cfg.algorithm == Algorithm::Div) {
    std::vector<SearchState> ground;
    for (const auto& e : run.grid.occupants()) ground.push_back(run.graph.node(e.bitmap).state);
    std::vector<SearchState> chosen;
    for (const auto& b : run.diversified) {
      chosen.push_back(run.graph.node(b).state);
      if (!run.grid.contains(b)) ground.push_back(chosen.back());
    }
    if (ground.size() <= kMaxDivGround && !chosen.empty())
      r.div_ratio = check_div_bound(chosen, ground, chosen.size(), cfg.alpha, run_log, space.layout());
  }
  return r;
}

bool report_ok(const EnumerationReport& r) {
  // Pruning relies on estimated bounds, so its findings are reported but
  // do not fail a run.
  if (!r.eps_cover_violations.empty() || !r.front_uncovered.empty()) return false;
  if (r.div_ratio && *r.div_ratio < 0.25) return false;
  return static_cast<double>(r.occupied_cells) <= r.cell_bound;
}

nlohmann::json EnumerationReport::to_json() const {
  auto list = [](const std::vector<Violation>& vs) {
    auto a = nlohmann::json::array();
    for (const auto& v : vs) a.push_back({{"bitmap", v.bitmap.hex()}, {"reason", v.reason}});
    return a;
  };
  nlohmann::json j;
  j["total_states"] = total_states;
  j["degenerate"] = degenerate;
  auto front = nlohmann::json::array();
  for (const auto& b : exact_front) front.push_back(b.hex());
  j["exact_front"] = front;
  j["eps_cover_violations"] = list(eps_cover_violations);
  j["front_checked"] = front_checked;
  j["front_uncovered"] = list(front_uncovered);
  j["pruned_validated"] = pruned_validated;
  j["pruning_violations"] = list(pruning_violations);
  j["div_ratio"] = div_ratio ? nlohmann::json(*div_ratio) : nlohmann::json(nullptr);
  j["occupied_cells"] = occupied_cells;
  j["cell_bound"] = cell_bound;
  j["ok"] = report_ok(*this);
  return j;
}

}  // namespace skyforge
