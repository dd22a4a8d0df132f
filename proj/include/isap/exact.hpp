#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "isap/enumeration.hpp"
#include "isap/error.hpp"
#include "isap/lattice.hpp"
#include "isap/model.hpp"
#include "isap/polygon.hpp"

namespace isap {

/// The finite state space used for exact sums: every polygon has length at
/// most `per_polygon_cap`, the total length C is at most `total_cap`
/// (negative = no total cap), and only roots in `whitelist` may carry a
/// nonempty polygon (empty whitelist = every root).
struct TruncationPolicy {
  int per_polygon_cap = 4;
  int total_cap = -1;
  std::vector<VertexIndex> whitelist;

  bool has_total_cap() const { return total_cap >= 0; }
  bool allows_root(VertexIndex v) const {
    return whitelist.empty() || std::find(whitelist.begin(), whitelist.end(), v) != whitelist.end();
  }
};

struct ExactBudget {
  std::uint64_t max_states = 0;  // zero = unlimited
  unsigned threads = 1;
};

inline double log_sum_exp(const std::vector<double>& terms) {
  double m = -std::numeric_limits<double>::infinity();
  for (double t : terms) m = std::max(m, t);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double t : terms) s += std::exp(t - m);
  return m + std::log(s);
}

/// Aggregated state space: for every (C, I, tag) the sum over configurations
/// of prod_x 1/(||gamma_x|| v 1) and the number of configurations. Any
/// (alpha, lambda) is then evaluated without re-enumeration.
class DensityTable {
 public:
  DensityTable() = default;
  DensityTable(std::size_t volume, int c_max, int tag_max)
      : volume_(volume), c_max_(c_max), tag_max_(tag_max),
        weight_(static_cast<std::size_t>(c_max + 1) * (c_max + 1) * (tag_max + 1), 0.0),
        count_(weight_.size(), 0) {}

  std::size_t volume() const { return volume_; }
  int c_max() const { return c_max_; }
  int tag_max() const { return tag_max_; }
  std::uint64_t state_count() const {
    std::uint64_t s = 0;
    for (auto c : count_) s += c;
    return s;
  }

  void add(int C, int I, int tag, double w) {
    std::size_t k = index(C, I, tag);
    weight_[k] += w;
    ++count_[k];
  }

  void merge(const DensityTable& o) {
    for (std::size_t k = 0; k < weight_.size(); ++k) {
      weight_[k] += o.weight_[k];
      count_[k] += o.count_[k];
    }
  }

  struct Cell {
    int C, I, N, tag;
    double weight;
    std::uint64_t count;
  };

  std::vector<Cell> cells() const {
    std::vector<Cell> out;
    for (int C = 0; C <= c_max_; ++C)
      for (int I = 0; I <= c_max_; ++I)
        for (int t = 0; t <= tag_max_; ++t) {
          std::size_t k = index(C, I, t);
          if (count_[k])
            out.push_back(Cell{C, I, I - C + static_cast<int>(volume_), t, weight_[k], count_[k]});
        }
    return out;
  }

  /// log e^{-H} summed over a cell, in the params' form.
  static double log_cell_weight(const Cell& c, const Params& p) {
    Observables o{c.C, c.I, c.N, 0.0};
    return std::log(c.weight) - energy_of(o, p);
  }

  double log_partition(const Params& p) const {
    std::vector<double> t;
    for (const Cell& c : cells()) t.push_back(log_cell_weight(c, p));
    return log_sum_exp(t);
  }

  /// E[f(cell)] under the Gibbs weights.
  double expectation(const Params& p, const std::function<double(const Cell&)>& f) const {
    auto cs = cells();
    std::vector<double> lw;
    for (const Cell& c : cs) lw.push_back(log_cell_weight(c, p));
    double lz = log_sum_exp(lw);
    double e = 0.0;
    for (std::size_t i = 0; i < cs.size(); ++i) e += std::exp(lw[i] - lz) * f(cs[i]);
    return e;
  }

  /// Law of g(cell) on 0..max_value.
  std::vector<double> law(const Params& p, const std::function<int(const Cell&)>& g, int max_value) const {
    auto cs = cells();
    std::vector<double> lw;
    for (const Cell& c : cs) lw.push_back(log_cell_weight(c, p));
    double lz = log_sum_exp(lw);
    std::vector<double> out(max_value + 1, 0.0);
    for (std::size_t i = 0; i < cs.size(); ++i) {
      int v = g(cs[i]);
      if (v < 0 || v > max_value) throw PreconditionError("law: value outside range");
      out[v] += std::exp(lw[i] - lz);
    }
    return out;
  }

  std::vector<double> tag_law(const Params& p) const {
    return law(p, [](const Cell& c) { return c.tag; }, tag_max_);
  }

 private:
  std::size_t index(int C, int I, int tag) const {
    if (C < 0 || C > c_max_ || I < 0 || I > c_max_ || tag < 0 || tag > tag_max_)
      throw PreconditionError("density table index out of range");
    return (static_cast<std::size_t>(C) * (c_max_ + 1) + I) * (tag_max_ + 1) + tag;
  }

  std::size_t volume_ = 0;
  int c_max_ = 0;
  int tag_max_ = 0;
  std::vector<double> weight_;
  std::vector<std::uint64_t> count_;
};

/// Per-root option lists; option 0 of every list is conventionally ζ, and
/// options are sorted by length.
using CandidateLists = std::vector<std::vector<Polygon>>;

/// Leaf tag: sees the chosen polygon of every root and the occupancy field.
using TagFunction = std::function<int(const std::vector<const Polygon*>&, const std::vector<int>&)>;

/// Rooted polygons of length <= K through every vertex, ζ first, by length.
/// Computed once at vertex 0 and translated.
inline CandidateLists polygon_pools(const TorusLattice& lat, int K, const EnumerationBudget& budget = {}) {
  if (K < 0) throw PreconditionError("polygon_pools: cap must be non-negative");
  std::vector<Polygon> base = K >= 2 ? enumerate_rooted_upto(lat, 0, K, budget) : std::vector<Polygon>{};
  CandidateLists pools(lat.vertex_count());
  for (VertexIndex v = 0; v < lat.vertex_count(); ++v) {
    pools[v].reserve(base.size() + 1);
    pools[v].push_back(Polygon::empty(v));
    for (const Polygon& p : base) pools[v].push_back(translate_to(lat, p, v));
  }
  return pools;
}

/// Number of configurations selecting one option per root with total length
/// at most `total_cap` (negative = unlimited), by knapsack convolution over
/// the per-root length histograms. Saturates at UINT64_MAX.
inline std::uint64_t state_space_size(const CandidateLists& cand, int total_cap) {
  int cap = total_cap;
  if (cap < 0) {
    cap = 0;
    for (const auto& opts : cand) {
      std::size_t m = 0;
      for (const auto& p : opts) m = std::max(m, p.length());
      cap += static_cast<int>(m);
    }
  }
  constexpr std::uint64_t kMax = std::numeric_limits<std::uint64_t>::max();
  auto sat_add = [](std::uint64_t a, std::uint64_t b) { return a > kMax - b ? kMax : a + b; };
  auto sat_mul = [](std::uint64_t a, std::uint64_t b) { return (a && b > kMax / a) ? kMax : a * b; };
  std::vector<std::uint64_t> ways(cap + 1, 0);
  ways[0] = 1;
  for (const auto& opts : cand) {
    std::vector<std::uint64_t> hist(cap + 1, 0);
    for (const auto& p : opts)
      if (static_cast<int>(p.length()) <= cap) ++hist[p.length()];
    std::vector<std::uint64_t> next(cap + 1, 0);
    for (int a = 0; a <= cap; ++a) {
      if (!ways[a]) continue;
      for (int b = 0; a + b <= cap; ++b)
        if (hist[b]) next[a + b] = sat_add(next[a + b], sat_mul(ways[a], hist[b]));
    }
    ways.swap(next);
  }
  std::uint64_t total = 0;
  for (auto w : ways) total = sat_add(total, w);
  return total;
}

namespace detail {

struct EnumerationWorker {
  const CandidateLists& cand;
  const std::vector<VertexIndex>& active;
  int total_cap;
  const TagFunction& tag;
  std::vector<int> occ;
  std::vector<const Polygon*> chosen;
  DensityTable table;

  void apply(const Polygon& p, int& I) {
    for (VertexIndex v : p.cycle()) {
      if (occ[v] >= 1) ++I;
      ++occ[v];
    }
  }
  void undo(const Polygon& p) {
    for (VertexIndex v : p.cycle()) --occ[v];
  }

  void descend(std::size_t depth, int C, int I, double w) {
    if (depth == active.size()) {
      table.add(C, I, tag(chosen, occ), w);
      return;
    }
    const VertexIndex root = active[depth];
    const Polygon* saved = chosen[root];
    for (const Polygon& p : cand[root]) {
      const int len = static_cast<int>(p.length());
      if (total_cap >= 0 && C + len > total_cap) break;
      int I2 = I;
      apply(p, I2);
      chosen[root] = &p;
      descend(depth + 1, C + len, I2, len > 0 ? w / len : w);
      undo(p);
    }
    chosen[root] = saved;
  }
};

}  // namespace detail

/// Exhaustive sum over the product of candidate lists with the total cap.
/// The first branching root is split across worker threads; per-branch tables
/// are merged in branch order so results do not depend on scheduling.
inline DensityTable enumerate_density(const TorusLattice& lat, const CandidateLists& cand, int total_cap,
                                      const TagFunction& tag, int tag_max, const ExactBudget& budget = {}) {
  const std::size_t n = lat.vertex_count();
  if (cand.size() != n) throw PreconditionError("enumerate_density: one candidate list per vertex required");
  for (const auto& opts : cand) {
    if (opts.empty()) throw PreconditionError("enumerate_density: empty candidate list");
    for (std::size_t i = 1; i < opts.size(); ++i)
      if (opts[i].length() < opts[i - 1].length())
        throw PreconditionError("enumerate_density: candidate lists must be sorted by length");
  }
  const std::uint64_t size = state_space_size(cand, total_cap);
  if (budget.max_states && size > budget.max_states)
    throw BudgetExceeded("exact enumeration state space too large", size, budget.max_states);

  int c_max = 0;
  for (const auto& opts : cand) c_max += static_cast<int>(opts.back().length());
  if (total_cap >= 0) c_max = std::min(c_max, total_cap);

  // Roots with a single option are fixed up front.
  std::vector<VertexIndex> active;
  std::vector<int> occ0(n, 0);
  std::vector<const Polygon*> chosen0(n, nullptr);
  int C0 = 0, I0 = 0;
  double w0 = 1.0;
  for (VertexIndex v = 0; v < n; ++v) {
    chosen0[v] = &cand[v][0];
    if (cand[v].size() > 1) {
      active.push_back(v);
      continue;
    }
    const Polygon& p = cand[v][0];
    for (VertexIndex u : p.cycle()) {
      if (occ0[u] >= 1) ++I0;
      ++occ0[u];
    }
    C0 += static_cast<int>(p.length());
    if (!p.is_empty()) w0 /= static_cast<double>(p.length());
  }
  DensityTable result(n, c_max, tag_max);
  if (total_cap >= 0 && C0 > total_cap) return result;

  auto make_worker = [&]() {
    return detail::EnumerationWorker{cand, active, total_cap, tag, occ0, chosen0, DensityTable(n, c_max, tag_max)};
  };
  if (active.empty()) {
    result.add(C0, I0, tag(chosen0, occ0), w0);
    return result;
  }

  const VertexIndex first = active.front();
  const std::size_t branches = cand[first].size();
  std::vector<DensityTable> parts(branches);
  auto run_branch = [&](std::size_t b) {
    auto worker = make_worker();
    const Polygon& p = cand[first][b];
    const int len = static_cast<int>(p.length());
    if (total_cap >= 0 && C0 + len > total_cap) {
      parts[b] = std::move(worker.table);
      return;
    }
    int I = I0;
    worker.apply(p, I);
    worker.chosen[first] = &p;
    worker.descend(1, C0 + len, I, len > 0 ? w0 / len : w0);
    parts[b] = std::move(worker.table);
  };

  const unsigned threads = std::max(1u, budget.threads);
  if (threads == 1) {
    for (std::size_t b = 0; b < branches; ++b) run_branch(b);
  } else {
    std::vector<std::exception_ptr> errors(threads);
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t)
      pool.emplace_back([&, t] {
        try {
          for (std::size_t b = t; b < branches; b += threads) run_branch(b);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    for (auto& th : pool) th.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }
  for (const auto& part : parts) result.merge(part);
  return result;
}

/// Candidate lists for a truncation policy: ζ plus the pool of length <= K
/// at whitelisted roots, only ζ elsewhere.
inline CandidateLists truncated_candidates(const TorusLattice& lat, const TruncationPolicy& trunc,
                                           const EnumerationBudget& enum_budget = {}) {
  if (trunc.per_polygon_cap < 0) throw PreconditionError("exact computation needs a finite per-polygon cap");
  CandidateLists pools = polygon_pools(lat, trunc.per_polygon_cap, enum_budget);
  for (VertexIndex v = 0; v < lat.vertex_count(); ++v)
    if (!trunc.allows_root(v)) pools[v].resize(1);
  return pools;
}

/// Tag = ||gamma_origin||.
inline TagFunction origin_length_tag(VertexIndex origin) {
  return [origin](const std::vector<const Polygon*>& chosen, const std::vector<int>&) {
    return static_cast<int>(chosen[origin]->length());
  };
}

/// Tag = max length over polygons that visit x (0 when none does).
inline TagFunction covering_length_tag(VertexIndex x) {
  return [x](const std::vector<const Polygon*>& chosen, const std::vector<int>& occ) {
    if (occ[x] == 0) return 0;
    int best = 0;
    for (const Polygon* p : chosen)
      if (p->length() > static_cast<std::size_t>(best) && p->contains_vertex(x)) best = static_cast<int>(p->length());
    return best;
  };
}

/// Exact model on a truncated state space, tagged by ||gamma_origin||.
inline DensityTable exact_density(const TorusLattice& lat, const TruncationPolicy& trunc, VertexIndex origin = 0,
                                  const ExactBudget& budget = {}) {
  CandidateLists cand = truncated_candidates(lat, trunc);
  return enumerate_density(lat, cand, trunc.total_cap, origin_length_tag(origin), std::max(trunc.per_polygon_cap, 0),
                           budget);
}

struct ExactSummary {
  double log_Z = 0.0;  // in the params' form
  double mean_C = 0.0;
  double mean_I = 0.0;
  double mean_N = 0.0;
  std::vector<double> origin_length_law;  // index = ||gamma_o||
  std::uint64_t states = 0;
};

inline ExactSummary summarize(const DensityTable& t, const Params& p) {
  ExactSummary s;
  s.log_Z = t.log_partition(p);
  s.mean_C = t.expectation(p, [](const DensityTable::Cell& c) { return static_cast<double>(c.C); });
  s.mean_I = t.expectation(p, [](const DensityTable::Cell& c) { return static_cast<double>(c.I); });
  s.mean_N = t.expectation(p, [](const DensityTable::Cell& c) { return static_cast<double>(c.N); });
  s.origin_length_law = t.tag_law(p);
  s.states = t.state_count();
  return s;
}

inline ExactSummary exact_summary(const TorusLattice& lat, const Params& params, const TruncationPolicy& trunc,
                                  VertexIndex origin = 0, const ExactBudget& budget = {}) {
  return summarize(exact_density(lat, trunc, origin, budget), params);
}

/// Density table of Ω_A: every polygon lies inside A (roots outside A are ζ).
inline DensityTable restricted_density(const TorusLattice& lat, const std::vector<VertexIndex>& A,
                                       const TruncationPolicy& trunc, const ExactBudget& budget = {}) {
  std::vector<char> inA(lat.vertex_count(), 0);
  for (VertexIndex v : A) {
    if (!(v < lat.vertex_count())) throw PreconditionError("restricted_Z: vertex outside lattice");
    inA[v] = 1;
  }
  CandidateLists cand = truncated_candidates(lat, trunc);
  for (VertexIndex v = 0; v < lat.vertex_count(); ++v) {
    if (!inA[v]) {
      cand[v].resize(1);
      continue;
    }
    std::vector<Polygon> keep;
    for (auto& p : cand[v]) {
      bool inside = true;
      for (VertexIndex u : p.cycle()) inside = inside && inA[u];
      if (inside) keep.push_back(std::move(p));
    }
    cand[v] = std::move(keep);
  }
  return enumerate_density(
      lat, cand, trunc.total_cap, [](const std::vector<const Polygon*>&, const std::vector<int>&) { return 0; }, 0,
      budget);
}

/// log Z(A) in the params' form.
inline double restricted_Z(const TorusLattice& lat, const std::vector<VertexIndex>& A, const Params& params,
                           const TruncationPolicy& trunc, const ExactBudget& budget = {}) {
  return restricted_density(lat, A, trunc, budget).log_partition(params);
}

struct RatioCheck {
  bool holds = false;
  double ratio = 0.0;  // Z(B \ A) / Z(B)
  double bound = 0.0;  // (1 + e^{-2 alpha})^{-h}
  double margin = 0.0; // bound - ratio
  double log_Z_A = 0.0;
  bool lower_bound_holds = false;  // Z(A) >= (1 + e^{-2 alpha})^h
};

/// Checks that `pairs` are h disjoint adjacent pairs inside A and A ⊆ B.
inline void check_pair_structure(const TorusLattice& lat, const std::vector<VertexIndex>& A,
                                 const std::vector<VertexIndex>& B,
                                 const std::vector<std::pair<VertexIndex, VertexIndex>>& pairs) {
  auto in = [](const std::vector<VertexIndex>& s, VertexIndex v) { return std::find(s.begin(), s.end(), v) != s.end(); };
  for (VertexIndex v : A)
    if (!in(B, v)) throw PreconditionError("partition_ratio_check: A must be a subset of B");
  std::vector<VertexIndex> used;
  for (auto [x, y] : pairs) {
    if (!in(A, x) || !in(A, y)) throw PreconditionError("partition_ratio_check: pair not contained in A");
    if (!lat.is_adjacent(x, y) || x == y) throw PreconditionError("partition_ratio_check: pair is not adjacent");
    if (in(used, x) || in(used, y)) throw PreconditionError("partition_ratio_check: pairs are not disjoint");
    used.push_back(x);
    used.push_back(y);
  }
}

/// Ratio inequality for several parameter points from one enumeration of
/// each of Ω_B, Ω_{B\A}, Ω_A. Ratios use the alpha-lambda form.
inline std::vector<RatioCheck> partition_ratio_check(const TorusLattice& lat, const std::vector<VertexIndex>& A,
                                                     const std::vector<VertexIndex>& B,
                                                     const std::vector<std::pair<VertexIndex, VertexIndex>>& pairs,
                                                     const std::vector<Params>& params, const TruncationPolicy& trunc,
                                                     const ExactBudget& budget = {}) {
  check_pair_structure(lat, A, B, pairs);
  std::vector<VertexIndex> BminusA;
  for (VertexIndex v : B)
    if (std::find(A.begin(), A.end(), v) == A.end()) BminusA.push_back(v);
  DensityTable tB = restricted_density(lat, B, trunc, budget);
  DensityTable tBA = restricted_density(lat, BminusA, trunc, budget);
  DensityTable tA = restricted_density(lat, A, trunc, budget);
  const double h = static_cast<double>(pairs.size());
  std::vector<RatioCheck> out;
  for (const Params& p0 : params) {
    Params p = p0.as_alpha_lambda();
    RatioCheck r;
    const double log_bound = -h * std::log1p(std::exp(-2.0 * p.alpha()));
    const double log_ratio = tBA.log_partition(p) - tB.log_partition(p);
    r.ratio = std::exp(log_ratio);
    r.bound = std::exp(log_bound);
    r.margin = r.bound - r.ratio;
    r.holds = log_ratio <= log_bound;
    r.log_Z_A = tA.log_partition(p);
    r.lower_bound_holds = r.log_Z_A >= -log_bound;
    out.push_back(r);
  }
  return out;
}

inline RatioCheck partition_ratio_check(const TorusLattice& lat, const std::vector<VertexIndex>& A,
                                        const std::vector<VertexIndex>& B,
                                        const std::vector<std::pair<VertexIndex, VertexIndex>>& pairs,
                                        const Params& params, const TruncationPolicy& trunc,
                                        const ExactBudget& budget = {}) {
  return partition_ratio_check(lat, A, B, pairs, std::vector<Params>{params}, trunc, budget).front();
}

/// Phi = log Z~ / |Λ| in the rho-nu form.
inline double pressure(const DensityTable& t, const Params& params) {
  return t.log_partition(params.as_rho_nu()) / static_cast<double>(t.volume());
}

inline double pressure(const TorusLattice& lat, const Params& params, const TruncationPolicy& trunc,
                       const ExactBudget& budget = {}) {
  return pressure(exact_density(lat, trunc, 0, budget), params);
}

struct PressureGradient {
  double d_rho = 0.0;  // -E[C] / |Λ|
  double d_nu = 0.0;   // -E[N] / |Λ|
  double fd_rho = 0.0; // central differences
  double fd_nu = 0.0;
};

inline PressureGradient pressure_gradient(const DensityTable& t, const Params& params, double step = 1e-4) {
  Params p = params.as_rho_nu();
  const double vol = static_cast<double>(t.volume());
  PressureGradient g;
  g.d_rho = -t.expectation(p, [](const DensityTable::Cell& c) { return static_cast<double>(c.C); }) / vol;
  g.d_nu = -t.expectation(p, [](const DensityTable::Cell& c) { return static_cast<double>(c.N); }) / vol;
  g.fd_rho = (pressure(t, Params::rho_nu(p.rho() + step, p.nu())) - pressure(t, Params::rho_nu(p.rho() - step, p.nu()))) /
             (2 * step);
  g.fd_nu = (pressure(t, Params::rho_nu(p.rho(), p.nu() + step)) - pressure(t, Params::rho_nu(p.rho(), p.nu() - step))) /
            (2 * step);
  return g;
}

inline PressureGradient pressure_gradient(const TorusLattice& lat, const Params& params, const TruncationPolicy& trunc,
                                          double step = 1e-4, const ExactBudget& budget = {}) {
  return pressure_gradient(exact_density(lat, trunc, 0, budget), params, step);
}

/// Candidate lists with γ_o pinned to `pinned`.
inline CandidateLists pinned_candidates(const TorusLattice& lat, const Polygon& pinned, const TruncationPolicy& trunc) {
  if (auto bad = validate(lat, pinned)) throw PreconditionError("pinned polygon invalid: " + bad->message);
  CandidateLists cand = truncated_candidates(lat, trunc);
  cand[pinned.root()] = {pinned};
  return cand;
}

/// Density of the measure conditioned on γ_o = pinned, tagged 1 when every
/// root in A carries ζ and 0 otherwise.
inline DensityTable conditional_empty_density(const TorusLattice& lat, const Polygon& pinned,
                                              const std::vector<VertexIndex>& A, const TruncationPolicy& trunc,
                                              const ExactBudget& budget = {}) {
  if (trunc.per_polygon_cap < 4)
    throw PreconditionError("conditional_empty_probability: per-polygon cap must be at least 4");
  for (VertexIndex x : A) {
    if (x == pinned.root()) throw PreconditionError("conditional_empty_probability: A must exclude the origin");
    if (!(x < lat.vertex_count())) throw PreconditionError("conditional_empty_probability: vertex outside lattice");
  }
  CandidateLists cand = pinned_candidates(lat, pinned, trunc);
  TagFunction tag = [A](const std::vector<const Polygon*>& chosen, const std::vector<int>&) {
    for (VertexIndex x : A)
      if (!chosen[x]->is_empty()) return 0;
    return 1;
  };
  return enumerate_density(lat, cand, trunc.total_cap, tag, 1, budget);
}

inline double conditional_empty_probability(const TorusLattice& lat, const Polygon& pinned,
                                            const std::vector<VertexIndex>& A, const Params& params,
                                            const TruncationPolicy& trunc, const ExactBudget& budget = {}) {
  if (A.empty()) return 1.0;
  return conditional_empty_density(lat, pinned, A, trunc, budget).tag_law(params)[1];
}

}  // namespace isap
