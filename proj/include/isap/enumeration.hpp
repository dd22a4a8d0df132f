#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include "isap/error.hpp"
#include "isap/lattice.hpp"
#include "isap/polygon.hpp"

namespace isap {

/// Node limit for depth-first enumeration. Zero means unlimited.
struct EnumerationBudget {
  std::uint64_t max_nodes = 0;
};

namespace detail {

// Depth-first self-avoiding growth from `root`, calling `on_close(path)` for
// every closure of length 2..max_len. Pruned by graph distance to the root and
// by the remaining length. Returns the number of nodes visited.
template <LatticeGraph G, typename OnClose>
std::uint64_t grow_closures(const G& g, VertexIndex root, int max_len, const EnumerationBudget& budget,
                            OnClose&& on_close, VertexIndex first_step = kNoVertex) {
  const std::vector<int> dist = bfs_distances(g, root);
  std::vector<char> used(g.vertex_count(), 0);
  std::vector<VertexIndex> path{root};
  used[root] = 1;
  std::uint64_t nodes = 0;

  std::function<void()> rec = [&]() {
    if (budget.max_nodes && ++nodes > budget.max_nodes)
      throw BudgetExceeded("polygon enumeration exceeded node budget", nodes, budget.max_nodes);
    if (!budget.max_nodes) ++nodes;
    const VertexIndex last = path.back();
    const int len = static_cast<int>(path.size());
    for (VertexIndex w : g.neighbors(last)) {
      if (w == root) {
        if (len >= 3 || (len == 2 && path[1] == last)) on_close(path);
        continue;
      }
      if (used[w]) continue;
      // Reaching w uses len edges; getting back needs at least dist[w] more.
      if (dist[w] < 0 || len + dist[w] > max_len) continue;
      used[w] = 1;
      path.push_back(w);
      rec();
      path.pop_back();
      used[w] = 0;
    }
  };

  if (max_len < 2) return 0;
  for (VertexIndex w : g.neighbors(root)) {
    if (first_step != kNoVertex && w != first_step) continue;
    if (w == root) continue;
    used[w] = 1;
    path.push_back(w);
    rec();
    path.pop_back();
    used[w] = 0;
  }
  return nodes;
}

}  // namespace detail

/// All rooted directed polygons of length exactly `n` through `root` in `g`.
/// n = 0 gives {ζ}; odd n on a bipartite domain gives nothing.
template <LatticeGraph G>
std::vector<Polygon> enumerate_rooted(const G& g, VertexIndex root, int n, const EnumerationBudget& budget = {}) {
  if (n < 0 || n == 1) throw PreconditionError("enumerate_rooted: n must be 0 or >= 2, got " + std::to_string(n));
  if (!(root < g.vertex_count())) throw PreconditionError("enumerate_rooted: root out of range");
  if (n == 0) return {Polygon::empty(root)};
  std::vector<Polygon> out;
  detail::grow_closures(g, root, n, budget, [&](const std::vector<VertexIndex>& path) {
    if (static_cast<int>(path.size()) == n) out.emplace_back(root, path);
  });
  return out;
}

/// All rooted polygons through `root` of length 2..max_len, grouped by length
/// in increasing order (ζ not included).
template <LatticeGraph G>
std::vector<Polygon> enumerate_rooted_upto(const G& g, VertexIndex root, int max_len,
                                           const EnumerationBudget& budget = {}) {
  if (!(root < g.vertex_count())) throw PreconditionError("enumerate_rooted_upto: root out of range");
  std::vector<std::vector<Polygon>> by_len(std::max(max_len, 0) + 1);
  detail::grow_closures(g, root, max_len, budget,
                        [&](const std::vector<VertexIndex>& path) { by_len[path.size()].emplace_back(root, path); });
  std::vector<Polygon> out;
  for (auto& bucket : by_len)
    for (auto& p : bucket) out.push_back(std::move(p));
  return out;
}

/// |SAP(n)| on Z^d for n = 0..n_max (rooted at the origin, directed).
struct CountTable {
  int d = 2;
  int n_max = 0;
  std::vector<std::uint64_t> counts;  // index n

  std::uint64_t at(int n) const { return n >= 0 && n < static_cast<int>(counts.size()) ? counts[n] : 0; }
};

/// Counts rooted polygons of every length up to n_max on a Z^d patch large
/// enough that no polygon of length <= n_max reaches its boundary. Work is
/// split over the first step of the walk across `threads` workers.
inline CountTable count_sap(int d, int n_max, const EnumerationBudget& budget = {}, unsigned threads = 1) {
  if (d < 1) throw PreconditionError("count_sap: d must be >= 1");
  if (n_max < 2) throw PreconditionError("count_sap: n_max must be >= 2");
  const int half = n_max / 2;
  BoxDomain box = BoxDomain::cube(2 * half + 1, d);
  const VertexIndex origin = box.index(Coordinates(d, half));

  std::vector<VertexIndex> firsts(box.neighbors(origin).begin(), box.neighbors(origin).end());
  std::vector<std::vector<std::uint64_t>> partial(firsts.size(), std::vector<std::uint64_t>(n_max + 1, 0));
  // Each first-step branch gets an equal share of the node budget.
  EnumerationBudget branch_budget{budget.max_nodes ? std::max<std::uint64_t>(1, budget.max_nodes / firsts.size()) : 0};
  auto run = [&](std::size_t b) {
    detail::grow_closures(
        box, origin, n_max, branch_budget, [&](const std::vector<VertexIndex>& path) { ++partial[b][path.size()]; },
        firsts[b]);
  };
  threads = std::max(1u, threads);
  if (threads == 1) {
    for (std::size_t b = 0; b < firsts.size(); ++b) run(b);
  } else {
    std::vector<std::exception_ptr> errors(firsts.size());
    for (std::size_t start = 0; start < firsts.size(); start += threads) {
      std::vector<std::thread> pool;
      for (std::size_t b = start; b < std::min(firsts.size(), start + threads); ++b)
        pool.emplace_back([&, b] {
          try {
            run(b);
          } catch (...) {
            errors[b] = std::current_exception();
          }
        });
      for (auto& t : pool) t.join();
    }
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }
  CountTable table{d, n_max, std::vector<std::uint64_t>(n_max + 1, 0)};
  for (const auto& part : partial)
    for (int n = 0; n <= n_max; ++n) table.counts[n] += part[n];
  return table;
}

struct MuEstimate {
  double mu_hat = 0.0;
  int n_top = 0;                    // largest n used in the ratio
  std::vector<int> n;               // lengths with nonzero counts
  std::vector<double> root_counts;  // a_n = |SAP(n)|^(1/n)
  std::vector<double> ratios;       // (|SAP(n)| / |SAP(n-2)|)^(1/2), NaN where undefined
  // |SAP(n)| <= 2(d-1) n mu_hat^n for each tabulated n (diagnostic only).
  std::vector<bool> bound_holds;
};

inline MuEstimate estimate_mu(const CountTable& table) {
  MuEstimate est;
  for (int k = 1; k < static_cast<int>(table.counts.size()); ++k)
    if (table.counts[k] > 0) est.n.push_back(k);
  if (est.n.size() < 3)
    throw PreconditionError("estimate_mu: need at least 3 nonzero counts, have " + std::to_string(est.n.size()));
  for (int k : est.n) {
    double c = static_cast<double>(table.counts[k]);
    est.root_counts.push_back(std::pow(c, 1.0 / k));
    est.ratios.push_back(k >= 2 && table.at(k - 2) > 0 ? std::sqrt(c / static_cast<double>(table.at(k - 2)))
                                                       : std::numeric_limits<double>::quiet_NaN());
  }
  for (std::size_t i = est.n.size(); i-- > 0;) {
    if (!std::isnan(est.ratios[i])) {
      est.mu_hat = est.ratios[i];
      est.n_top = est.n[i];
      break;
    }
  }
  if (est.n_top == 0) throw PreconditionError("estimate_mu: no pair of counts two lengths apart");
  for (int k : est.n)
    est.bound_holds.push_back(static_cast<double>(table.counts[k]) <=
                              2.0 * (table.d - 1) * k * std::pow(est.mu_hat, k));
  return est;
}

}  // namespace isap
