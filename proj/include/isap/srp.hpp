#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "isap/error.hpp"
#include "isap/exact.hpp"
#include "isap/lattice.hpp"

namespace isap {

/// Spatial random permutations with |σ(x) - x| <= 1 (torus distance),
/// weighted by exp(-alpha * sum_x |σ(x) - x|).
struct SrpResult {
  double Z = 0.0;
  std::uint64_t permutations = 0;
  std::vector<double> cycle_law;  // index k = |C_x|, k >= 1
};

namespace detail {

// Backtracking over bijections with forced-assignment propagation: a target
// that only one unassigned source can still reach is assigned immediately.
class SrpEnumerator {
 public:
  SrpEnumerator(const TorusLattice& lat, double alpha, VertexIndex x, std::uint64_t max_perms)
      : lat_(lat), alpha_(alpha), x_(x), max_perms_(max_perms), n_(lat.vertex_count()) {
    options_.resize(n_);
    for (VertexIndex v = 0; v < n_; ++v) {
      options_[v].push_back(v);
      for (VertexIndex w : lat.neighbors(v)) options_[v].push_back(w);
    }
    preimages_.resize(n_);
    for (VertexIndex v = 0; v < n_; ++v)
      for (VertexIndex w : options_[v]) preimages_[w].push_back(v);
    sigma_.assign(n_, kNoVertex);
    taken_.assign(n_, 0);
    result_.cycle_law.assign(n_ + 1, 0.0);
  }

  SrpResult run() {
    search(0);
    if (result_.Z > 0)
      for (double& p : result_.cycle_law) p /= result_.Z;
    return result_;
  }

 private:
  bool assign(VertexIndex v, VertexIndex w, std::vector<VertexIndex>& trail) {
    if (sigma_[v] != kNoVertex || taken_[w]) return false;
    sigma_[v] = w;
    taken_[w] = 1;
    moved_ += (w != v);
    trail.push_back(v);
    return true;
  }

  void unassign(std::vector<VertexIndex>& trail, std::size_t keep) {
    while (trail.size() > keep) {
      VertexIndex v = trail.back();
      trail.pop_back();
      taken_[sigma_[v]] = 0;
      moved_ -= (sigma_[v] != v);
      sigma_[v] = kNoVertex;
    }
  }

  // Returns false on a contradiction (an untaken target no source can reach,
  // or a source with no free target).
  bool propagate(std::vector<VertexIndex>& trail) {
    bool changed = true;
    while (changed) {
      changed = false;
      for (VertexIndex v = 0; v < n_; ++v) {
        if (sigma_[v] != kNoVertex) continue;
        int free = 0;
        VertexIndex last = kNoVertex;
        for (VertexIndex w : options_[v])
          if (!taken_[w]) ++free, last = w;
        if (free == 0) return false;
        if (free == 1) {
          assign(v, last, trail);
          changed = true;
        }
      }
      for (VertexIndex w = 0; w < n_; ++w) {
        if (taken_[w]) continue;
        int free = 0;
        VertexIndex last = kNoVertex;
        for (VertexIndex v : preimages_[w])
          if (sigma_[v] == kNoVertex) ++free, last = v;
        if (free == 0) return false;
        if (free == 1) {
          assign(last, w, trail);
          changed = true;
        }
      }
    }
    return true;
  }

  void search(int) {
    std::size_t keep = trail_.size();
    if (!propagate(trail_)) {
      unassign(trail_, keep);
      return;
    }
    // Most constrained unassigned source.
    VertexIndex pick = kNoVertex;
    int best = 1 << 30;
    for (VertexIndex v = 0; v < n_; ++v) {
      if (sigma_[v] != kNoVertex) continue;
      int free = 0;
      for (VertexIndex w : options_[v]) free += !taken_[w];
      if (free < best) best = free, pick = v;
    }
    if (pick == kNoVertex) {
      record();
      unassign(trail_, keep);
      return;
    }
    for (VertexIndex w : options_[pick]) {
      if (taken_[w]) continue;
      std::size_t mark = trail_.size();
      assign(pick, w, trail_);
      search(0);
      unassign(trail_, mark);
    }
    unassign(trail_, keep);
  }

  void record() {
    if (max_perms_ && result_.permutations >= max_perms_)
      throw BudgetExceeded("SRP enumeration exceeded permutation budget", result_.permutations + 1, max_perms_);
    ++result_.permutations;
    const double w = std::exp(-alpha_ * moved_);
    result_.Z += w;
    int len = 1;
    for (VertexIndex v = sigma_[x_]; v != x_; v = sigma_[v]) ++len;
    result_.cycle_law[len] += w;
  }

  const TorusLattice& lat_;
  double alpha_;
  VertexIndex x_;
  std::uint64_t max_perms_;
  std::size_t n_;
  std::vector<std::vector<VertexIndex>> options_, preimages_;
  std::vector<VertexIndex> sigma_;
  std::vector<char> taken_;
  std::vector<VertexIndex> trail_;
  int moved_ = 0;
  SrpResult result_;
};

}  // namespace detail

/// Exact SRP measure by backtracking: partition function, number of admissible
/// permutations and the law of the cycle length of x (fixed point = 1).
inline SrpResult srp_enumerate(const TorusLattice& lat, double alpha, VertexIndex x = 0, std::uint64_t max_perms = 0) {
  if (lat.side() < 3) throw PreconditionError("SRP needs side >= 3 so that displacements are well defined");
  if (!(x < lat.vertex_count())) throw PreconditionError("SRP: vertex outside lattice");
  return detail::SrpEnumerator(lat, alpha, x, max_perms).run();
}

inline std::vector<double> srp_cycle_law(const TorusLattice& lat, double alpha, VertexIndex x = 0) {
  return srp_enumerate(lat, alpha, x).cycle_law;
}

/// Permanent of a square matrix by Ryser's formula with Gray-code updates.
inline double permanent(const std::vector<std::vector<double>>& M) {
  const std::size_t n = M.size();
  if (n == 0) return 1.0;
  if (n > 30) throw PreconditionError("permanent: matrix too large");
  std::vector<double> row_sums(n, 0.0);
  double total = 0.0;
  std::uint64_t gray_prev = 0;
  for (std::uint64_t k = 1; k < (1ULL << n); ++k) {
    std::uint64_t gray = k ^ (k >> 1);
    std::uint64_t diff = gray ^ gray_prev;
    int col = __builtin_ctzll(diff);
    double sign_col = (gray & diff) ? 1.0 : -1.0;
    for (std::size_t i = 0; i < n; ++i) row_sums[i] += sign_col * M[i][col];
    gray_prev = gray;
    double prod = 1.0;
    for (std::size_t i = 0; i < n; ++i) prod *= row_sums[i];
    int bits = __builtin_popcountll(gray);
    total += ((n - bits) % 2 == 0 ? 1.0 : -1.0) * prod;
  }
  return total;
}

/// The SRP weight matrix M[x][y] = exp(-alpha d(x,y)) for d <= 1, else 0;
/// its permanent is the SRP partition function.
inline std::vector<std::vector<double>> srp_weight_matrix(const TorusLattice& lat, double alpha) {
  const std::size_t n = lat.vertex_count();
  std::vector<std::vector<double>> M(n, std::vector<double>(n, 0.0));
  for (VertexIndex u = 0; u < n; ++u)
    for (VertexIndex v = 0; v < n; ++v) {
      int d = lat.torus_distance(u, v);
      if (d <= 1) M[u][v] = std::exp(-alpha * d);
    }
  return M;
}

/// Total variation distance between two laws on a common index range.
inline double total_variation(const std::vector<double>& p, const std::vector<double>& q) {
  const std::size_t n = std::max(p.size(), q.size());
  double s = 0.0;
  for (std::size_t k = 0; k < n; ++k) s += std::abs((k < p.size() ? p[k] : 0.0) - (k < q.size() ? q[k] : 0.0));
  return 0.5 * s;
}

/// Law of max_{z : x in γ_z} ||γ_z|| under the truncated ISAP measure, with
/// the value 0 (x uncovered) moved to the fixed-point atom 1.
inline std::vector<double> isap_covering_law(const DensityTable& t, const Params& params) {
  std::vector<double> law = t.tag_law(params);
  law[1] += law[0];
  law[0] = 0.0;
  return law;
}

/// Restricts a law to lengths 1..K and renormalises.
inline std::vector<double> restrict_law(std::vector<double> law, int K) {
  if (static_cast<int>(law.size()) > K + 1) law.resize(K + 1);
  double s = 0.0;
  for (double p : law) s += p;
  if (s > 0)
    for (double& p : law) p /= s;
  return law;
}

/// TV distance between the projected ISAP law and the SRP cycle law of x for
/// each lambda, both restricted to the truncation's length range. One ISAP
/// enumeration serves all lambdas.
inline std::vector<double> isap_srp_distance(const TorusLattice& lat, double alpha, const std::vector<double>& lambdas,
                                             const TruncationPolicy& trunc, VertexIndex x = 0,
                                             const ExactBudget& budget = {}) {
  const int K = trunc.per_polygon_cap;
  CandidateLists cand = truncated_candidates(lat, trunc);
  DensityTable t = enumerate_density(lat, cand, trunc.total_cap, covering_length_tag(x), K, budget);
  std::vector<double> srp = restrict_law(srp_cycle_law(lat, alpha, x), K);
  std::vector<double> out;
  for (double lam : lambdas)
    out.push_back(total_variation(restrict_law(isap_covering_law(t, Params::alpha_lambda(alpha, lam)), K), srp));
  return out;
}

}  // namespace isap
