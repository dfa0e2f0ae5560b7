#include "skyforge/correlation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "skyforge/errors.hpp"

namespace skyforge {

namespace {

std::vector<double> average_ranks(const std::vector<double>& v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

std::optional<double> spearman(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) throw ArgumentError("spearman: sequences differ in length");
  if (xs.size() < 2) throw ArgumentError("spearman: need at least two observations");
  auto rx = average_ranks(xs);
  auto ry = average_ranks(ys);
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

CorrelationGraph::CorrelationGraph(std::size_t num_measures, double theta)
    : m_(num_measures), theta_(theta), w_((num_measures + 1) * (num_measures + 1)) {}

double node_value(const TestRecord& r, std::size_t node, std::size_t num_measures) {
  return node == num_measures ? r.size_proxy : r.perf[node];
}

void CorrelationGraph::rebuild(const TestLog& log) {
  std::fill(w_.begin(), w_.end(), std::nullopt);
  const auto& recs = log.records();
  if (recs.size() < kMinCorrelationSupport) return;
  const std::size_t n = num_nodes();
  std::vector<std::vector<double>> cols(n);
  for (std::size_t a = 0; a < n; ++a)
    for (const auto& r : recs) cols[a].push_back(node_value(r, a, m_));
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      auto c = spearman(cols[a], cols[b]);
      // A tiny slack keeps coefficients such as 0.8 from failing theta = 0.8
      // through rounding.
      if (c && std::abs(*c) >= theta_ - 1e-12) w_[a * n + b] = w_[b * n + a] = c;
    }
  }
}

std::optional<double> CorrelationGraph::edge(std::size_t i, std::size_t j) const {
  if (i == j || i >= num_nodes() || j >= num_nodes()) return std::nullopt;
  return w_[i * num_nodes() + j];
}

std::size_t CorrelationGraph::num_edges() const {
  return static_cast<std::size_t>(std::count_if(w_.begin(), w_.end(), [](const auto& w) { return w.has_value(); })) / 2;
}

std::optional<std::pair<double, double>> bracket_bounds(const TestLog& log, std::size_t feature,
                                                        double x, std::size_t p,
                                                        const MeasureSpec& spec,
                                                        std::size_t num_measures) {
  const auto& recs = log.records();
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  for (const auto& r : recs) {
    const double f = node_value(r, feature, num_measures);
    if (f <= x) lo = std::max(lo, f);
    if (f >= x) hi = std::min(hi, f);
  }
  if (!std::isfinite(lo) || !std::isfinite(hi)) return std::nullopt;
  double pl = std::numeric_limits<double>::infinity();
  double pu = -std::numeric_limits<double>::infinity();
  for (const auto& r : recs) {
    const double f = node_value(r, feature, num_measures);
    if (f != lo && f != hi) continue;
    pl = std::min(pl, r.perf[p]);
    pu = std::max(pu, r.perf[p]);
  }
  pl = std::clamp(pl, spec.pl, spec.pu);
  pu = std::clamp(pu, pl, spec.pu);
  return std::make_pair(pl, pu);
}

PerfVector estimate_bounds(const PerfVector& partial, double size_proxy, const TestLog& log,
                           const CorrelationGraph& graph, const MeasureSet& measures) {
  const std::size_t m = measures.size();
  if (partial.size() != m) throw ArgumentError("performance vector does not match the measure set");
  PerfVector out = partial;
  for (std::size_t p = 0; p < m; ++p) {
    if (partial.entries[p].is_valuated()) continue;
    std::optional<std::size_t> best;
    double best_w = -1.0;
    auto consider = [&](std::size_t node) {
      auto e = graph.edge(p, node);
      if (e && std::abs(*e) > best_w) {
        best = node;
        best_w = std::abs(*e);
      }
    };
    for (std::size_t q = 0; q < m; ++q)
      if (q != p && partial.entries[q].is_valuated()) consider(q);
    consider(graph.size_node());
    if (!best) continue;
    const double x = *best == graph.size_node() ? size_proxy : partial.entries[*best].value;
    auto b = bracket_bounds(log, *best, x, p, measures[p], m);
    out.entries[p] = b ? PerfEntry::bounded(b->first, b->second)
                       : PerfEntry::bounded(measures[p].pl, measures[p].pu);
  }
  return out;
}

}  // namespace skyforge
