#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "isap/enumeration.hpp"
#include "isap/error.hpp"
#include "isap/estimator.hpp"
#include "isap/exact.hpp"
#include "isap/lattice.hpp"
#include "isap/model.hpp"
#include "isap/polygon.hpp"
#include "isap/rng.hpp"

namespace isap {

enum class MoveType { kPool = 0, kToggle = 1, kRosenbluth = 2, kPlaquette = 3 };
inline constexpr int kMoveTypes = 4;

inline const char* to_string(MoveType m) {
  switch (m) {
    case MoveType::kPool: return "pool";
    case MoveType::kToggle: return "toggle";
    case MoveType::kRosenbluth: return "rosenbluth";
    case MoveType::kPlaquette: return "plaquette";
  }
  return "unknown";
}

/// Relative selection probabilities of the move types for each proposal.
struct MoveWeights {
  double pool = 0.0;
  double toggle = 0.0;
  double rosenbluth = 0.0;
  double plaquette = 0.0;

  double total() const { return pool + toggle + rosenbluth + plaquette; }
  double of(MoveType m) const {
    switch (m) {
      case MoveType::kPool: return pool;
      case MoveType::kToggle: return toggle;
      case MoveType::kRosenbluth: return rosenbluth;
      case MoveType::kPlaquette: return plaquette;
    }
    return 0.0;
  }
};

/// Independence proposal by sequential growth. With probability p_empty the
/// proposal is ζ; otherwise a length n is drawn with probability proportional
/// to length_ratio^n over the admissible lengths up to max_length (0 means
/// the cap K, or |Λ| when uncapped), and a self-avoiding walk is grown from
/// the root choosing uniformly among unvisited neighbours that can still get
/// back to the root in the remaining steps.
struct RosenbluthConfig {
  double p_empty = 0.3;
  double length_ratio = 0.85;
  int max_length = 0;
};

/// Umbrella weights on the origin polygon: the chain samples
/// π(γ) exp(log_weight[min(||γ_o||, size-1)]) and estimates are reweighted
/// back to π. `extra_updates` adds that many proposals at the origin to every
/// sweep.
struct OriginBias {
  std::vector<double> log_weight;
  int extra_updates = 0;

  /// Weight beta * min(n, saturation).
  static OriginBias linear(double beta, int saturation, int extra_updates = 0) {
    OriginBias b;
    for (int n = 0; n <= saturation; ++n) b.log_weight.push_back(beta * n);
    b.extra_updates = extra_updates;
    return b;
  }

  bool active() const { return !log_weight.empty(); }
  double log_factor(std::size_t len) const {
    if (log_weight.empty()) return 0.0;
    return log_weight[std::min(len, log_weight.size() - 1)];
  }
};

struct ChainConfig {
  Params params = Params::alpha_lambda(1.0, 0.0);
  TruncationPolicy trunc{-1, -1, {}};  // per_polygon_cap < 0 means uncapped
  MoveWeights moves{0.0, 0.4, 0.2, 0.4};
  RosenbluthConfig rosenbluth;
  OriginBias bias;
  VertexIndex origin = 0;
  std::uint64_t seed = 0;
};

/// Result of one BFACF-type local move on a polygon.
struct PlaquetteMove {
  enum class Kind { kNone, kGrow, kShrink, kFlip } kind = Kind::kNone;
  std::optional<Polygon> result;
};

/// Local move on edge i (c[i] -> c[i+1]) in perpendicular direction `dir`:
/// insert a unit square (+2), remove one (-2), or flip a corner. Returns no
/// result when the move is blocked or would remove the root.
template <LatticeGraph G>
PlaquetteMove plaquette_move(const G& g, const Polygon& p, std::size_t i, int dir) {
  PlaquetteMove out;
  const auto& c = p.cycle();
  const std::size_t n = c.size();
  if (n < 2 || i >= n) return out;
  const VertexIndex a = c[i], b = c[(i + 1) % n];
  const VertexIndex prev = c[(i + n - 1) % n], next = c[(i + 2) % n];
  const VertexIndex a2 = g.step(a, dir), b2 = g.step(b, dir);
  if (a2 == kNoVertex || b2 == kNoVertex) return out;
  if (a2 == b || a2 == a) return out;  // dir is not perpendicular
  auto on = [&](VertexIndex v) { return p.contains_vertex(v); };
  const VertexIndex root = p.root();
  std::vector<VertexIndex> cyc;
  cyc.reserve(n + 2);
  if (n >= 4 && prev == a2 && next == b2) {
    out.kind = PlaquetteMove::Kind::kShrink;
    if (a == root || b == root) return out;
    for (std::size_t k = 0; k < n; ++k)
      if (k != i && k != (i + 1) % n) cyc.push_back(c[k]);
  } else if (n >= 4 && prev == a2) {
    // a2 -> a -> b becomes a2 -> b2 -> b.
    out.kind = PlaquetteMove::Kind::kFlip;
    if (a == root || on(b2)) return out;
    cyc = c;
    cyc[i] = b2;
  } else if (n >= 4 && next == b2) {
    // a -> b -> b2 becomes a -> a2 -> b2.
    out.kind = PlaquetteMove::Kind::kFlip;
    if (b == root || on(a2)) return out;
    cyc = c;
    cyc[(i + 1) % n] = a2;
  } else {
    out.kind = PlaquetteMove::Kind::kGrow;
    if (on(a2) || on(b2)) return out;
    for (std::size_t k = 0; k < n; ++k) {
      cyc.push_back(c[k]);
      if (k == i) {
        cyc.push_back(a2);
        cyc.push_back(b2);
      }
    }
  }
  out.result = Polygon(root, std::move(cyc));
  return out;
}

/// Directions perpendicular to the edge a -> b.
template <LatticeGraph G>
std::vector<int> perpendicular_directions(const G& g, VertexIndex a, VertexIndex b) {
  int axis = -1;
  for (int dir = 0; dir < 2 * g.dimension(); ++dir)
    if (g.step(a, dir) == b) axis = direction_axis(dir);
  std::vector<int> dirs;
  for (int dir = 0; dir < 2 * g.dimension(); ++dir)
    if (direction_axis(dir) != axis) dirs.push_back(dir);
  return dirs;
}

/// Markov chain on configurations of a torus; one sweep is |Λ| single-site
/// proposals at uniformly chosen roots (plus the bias's extra origin updates).
class Chain {
 public:
  Chain(std::shared_ptr<const TorusLattice> lattice, ChainConfig config)
      : cfg_(lattice), config_(std::move(config)), rng_(config_.seed) {
    const TorusLattice& lat = *lattice;
    if (!(config_.origin < lat.vertex_count())) throw PreconditionError("origin outside lattice");
    if (config_.moves.total() <= 0) throw PreconditionError("at least one move type needs positive weight");
    const int K = config_.trunc.per_polygon_cap;
    if (config_.moves.pool > 0) {
      if (K < 0) throw PreconditionError("pool proposals need a finite per-polygon cap");
      pools_ = polygon_pools(lat, K);
    }
    if (config_.moves.rosenbluth > 0) build_length_law();
    if (config_.moves.plaquette > 0 && lat.side() < 3) throw PreconditionError("plaquette moves need side >= 3");
    stamp_.assign(lat.vertex_count(), 0);
    whitelisted_.assign(lat.vertex_count(), 1);
    if (!config_.trunc.whitelist.empty()) {
      std::fill(whitelisted_.begin(), whitelisted_.end(), 0);
      for (VertexIndex v : config_.trunc.whitelist) whitelisted_.at(v) = 1;
    }
    std::array<double, kMoveTypes> w{config_.moves.pool, config_.moves.toggle, config_.moves.rosenbluth,
                                     config_.moves.plaquette};
    double acc = 0.0;
    for (int m = 0; m < kMoveTypes; ++m) {
      acc += w[m] / config_.moves.total();
      move_cdf_[m] = acc;
    }
  }

  const Configuration& configuration() const { return cfg_; }
  const ChainConfig& config() const { return config_; }
  const TorusLattice& lattice() const { return cfg_.lattice(); }
  std::uint64_t sweeps() const { return sweeps_; }
  std::uint64_t proposed(MoveType m) const { return proposed_[static_cast<int>(m)]; }
  std::uint64_t accepted(MoveType m) const { return accepted_[static_cast<int>(m)]; }
  double acceptance_rate(MoveType m) const {
    auto p = proposed(m);
    return p ? static_cast<double>(accepted(m)) / static_cast<double>(p) : 0.0;
  }

  /// Replaces the current configuration (must respect the truncation).
  void set_polygon(VertexIndex root, Polygon p) {
    if (!admissible(root, p)) throw PreconditionError("set_polygon: polygon violates the truncation policy");
    cfg_.assign(root, std::move(p));
  }

  /// log of the factor that converts the biased chain back to the target:
  /// -beta * min(||γ_o||, saturation).
  double log_reweight() const { return -config_.bias.log_factor(cfg_.polygon(config_.origin).length()); }

  void sweep() {
    rng_.begin_sweep(sweeps_);
    const std::uint64_t n = cfg_.volume();
    for (std::uint64_t k = 0; k < n; ++k) step_at(static_cast<VertexIndex>(rng_.below(n)));
    for (int k = 0; k < config_.bias.extra_updates; ++k) step_at(config_.origin);
    ++sweeps_;
  }

  /// One Metropolis-Hastings update at root x; returns whether it was accepted.
  bool step_at(VertexIndex x) {
    const double u = rng_.uniform();
    int m = 0;
    while (m + 1 < kMoveTypes && u >= move_cdf_[m]) ++m;
    switch (static_cast<MoveType>(m)) {
      case MoveType::kPool: return pool_move(x);
      case MoveType::kToggle: return toggle_move(x);
      case MoveType::kRosenbluth: return rosenbluth_move(x);
      case MoveType::kPlaquette: return plaquette_move_at(x);
    }
    return false;
  }

  bool admissible(VertexIndex x, const Polygon& p) const {
    const int len = static_cast<int>(p.length());
    if (config_.trunc.per_polygon_cap >= 0 && len > config_.trunc.per_polygon_cap) return false;
    if (len > 0 && !whitelisted_[x]) return false;
    if (config_.trunc.total_cap >= 0) {
      const std::int64_t C = cfg_.observables().C - static_cast<std::int64_t>(cfg_.polygon(x).length()) + len;
      if (C > config_.trunc.total_cap) return false;
    }
    return true;
  }

  /// H(new) - H(old) for replacing γ_x, including the umbrella tilt.
  double delta_energy(VertexIndex x, const Polygon& p) const {
    double d = cfg_.energy_delta(x, p, config_.params);
    if (x == config_.origin && !config_.bias.log_weight.empty())
      d -= config_.bias.log_factor(p.length()) - config_.bias.log_factor(cfg_.polygon(x).length());
    return d;
  }

  /// Probability that the growth proposal at x produces `p` (ζ included).
  double rosenbluth_density(VertexIndex x, const Polygon& p) const {
    const auto& rc = config_.rosenbluth;
    if (p.is_empty()) return rc.p_empty;
    const std::size_t n = p.length();
    if (n >= length_law_.size() || length_law_[n] == 0.0) return 0.0;
    const TorusLattice& lat = lattice();
    const auto& c = p.cycle();
    ++generation_;
    stamp_[x] = generation_;
    double q = (1.0 - rc.p_empty) * length_law_[n];
    for (std::size_t i = 1; i < n; ++i) {
      int k = 0;
      for (VertexIndex w : lat.neighbors(c[i - 1]))
        if (stamp_[w] != generation_ && lat.torus_distance(w, x) <= static_cast<int>(n - i)) ++k;
      if (k == 0) return 0.0;
      q /= k;
      stamp_[c[i]] = generation_;
    }
    return q;
  }

  /// log of the proposal-density ratio q(cand -> current) / q(current -> cand)
  /// used by move type m at root x; -inf when m cannot propose `cand`.
  double log_hastings(MoveType m, VertexIndex x, const Polygon& cand) const {
    const Polygon& cur = cfg_.polygon(x);
    const double inf = std::numeric_limits<double>::infinity();
    switch (m) {
      case MoveType::kPool: return 0.0;
      case MoveType::kToggle: {
        const double deg = static_cast<double>(lattice().neighbors(x).size());
        if (cur.is_empty() && cand.length() == 2) return std::log(deg);
        if (cur.length() == 2 && cand.is_empty()) return -std::log(deg);
        return -inf;
      }
      case MoveType::kRosenbluth: {
        const double q_old = rosenbluth_density(x, cur), q_new = rosenbluth_density(x, cand);
        if (q_old <= 0.0 || q_new <= 0.0) return -inf;
        return std::log(q_old) - std::log(q_new);
      }
      case MoveType::kPlaquette:
        if (cur.is_empty() || cand.is_empty()) return -inf;
        return std::log(static_cast<double>(cur.length())) - std::log(static_cast<double>(cand.length()));
    }
    return -inf;
  }

  /// Probability that move type m accepts `cand` as the new γ_x.
  double acceptance(MoveType m, VertexIndex x, const Polygon& cand) const {
    if (!admissible(x, cand)) return 0.0;
    const double log_a = -delta_energy(x, cand) + log_hastings(m, x, cand);
    return log_a >= 0.0 ? 1.0 : std::exp(log_a);
  }

  const std::vector<double>& length_law() const { return length_law_; }

 private:
  void count(MoveType m, bool ok) {
    ++proposed_[static_cast<int>(m)];
    if (ok) ++accepted_[static_cast<int>(m)];
  }

  bool try_accept(MoveType m, VertexIndex x, Polygon cand) {
    const double a = acceptance(m, x, cand);
    const bool ok = a >= 1.0 || (a > 0.0 && rng_.uniform() < a);
    if (ok) cfg_.replace(x, std::move(cand));
    count(m, ok);
    return ok;
  }

  bool pool_move(VertexIndex x) {
    const auto& pool = pools_[x];
    return try_accept(MoveType::kPool, x, pool[rng_.below(pool.size())]);
  }

  bool toggle_move(VertexIndex x) {
    const Polygon& cur = cfg_.polygon(x);
    const auto nbrs = lattice().neighbors(x);
    if (cur.is_empty()) {
      VertexIndex v = nbrs[rng_.below(nbrs.size())];
      return try_accept(MoveType::kToggle, x, Polygon(x, {x, v}));
    }
    if (cur.length() == 2) return try_accept(MoveType::kToggle, x, Polygon::empty(x));
    count(MoveType::kToggle, false);
    return false;
  }

  void build_length_law() {
    const TorusLattice& lat = cfg_.lattice();
    const auto& rc = config_.rosenbluth;
    if (!(rc.p_empty >= 0.0 && rc.p_empty < 1.0)) throw PreconditionError("rosenbluth p_empty must be in [0, 1)");
    if (!(rc.length_ratio > 0.0)) throw PreconditionError("rosenbluth length_ratio must be positive");
    int n_max = static_cast<int>(lat.vertex_count());
    if (config_.trunc.per_polygon_cap >= 0) n_max = std::min(n_max, config_.trunc.per_polygon_cap);
    if (rc.max_length > 0) n_max = std::min(n_max, rc.max_length);
    const bool bipartite = lat.side() % 2 == 0;
    length_law_.assign(n_max + 1, 0.0);
    double s = 0.0;
    for (int n = 2; n <= n_max; ++n) {
      if (bipartite && n % 2) continue;
      length_law_[n] = std::pow(rc.length_ratio, n);
      s += length_law_[n];
    }
    if (s <= 0) throw PreconditionError("rosenbluth proposal has no admissible length");
    for (double& v : length_law_) v /= s;
    length_cdf_.assign(length_law_.size(), 0.0);
    double acc = 0.0;
    for (std::size_t n = 0; n < length_law_.size(); ++n) length_cdf_[n] = acc += length_law_[n];
  }

  std::optional<Polygon> grow(VertexIndex x, int n) {
    const TorusLattice& lat = lattice();
    ++generation_;
    stamp_[x] = generation_;
    std::vector<VertexIndex> cyc{x};
    cyc.reserve(n);
    VertexIndex v = x;
    std::vector<VertexIndex> opts;
    for (int i = 1; i < n; ++i) {
      opts.clear();
      for (VertexIndex w : lat.neighbors(v))
        if (stamp_[w] != generation_ && lat.torus_distance(w, x) <= n - i) opts.push_back(w);
      if (opts.empty()) return std::nullopt;
      v = opts[rng_.below(opts.size())];
      stamp_[v] = generation_;
      cyc.push_back(v);
    }
    return Polygon(x, std::move(cyc));
  }

  bool rosenbluth_move(VertexIndex x) {
    const auto& rc = config_.rosenbluth;
    std::optional<Polygon> cand;
    if (rng_.uniform() < rc.p_empty) {
      cand = Polygon::empty(x);
    } else {
      const double u = rng_.uniform();
      std::size_t n = std::upper_bound(length_cdf_.begin(), length_cdf_.end(), u) - length_cdf_.begin();
      n = std::min(n, length_cdf_.size() - 1);
      while (length_law_[n] == 0.0 && n > 0) --n;
      cand = grow(x, static_cast<int>(n));
    }
    if (!cand) {
      count(MoveType::kRosenbluth, false);
      return false;
    }
    return try_accept(MoveType::kRosenbluth, x, std::move(*cand));
  }

  bool plaquette_move_at(VertexIndex x) {
    const Polygon& cur = cfg_.polygon(x);
    if (!cur.is_empty()) {
      const std::size_t n = cur.length();
      const std::size_t i = rng_.below(n);
      const auto& c = cur.cycle();
      auto dirs = perpendicular_directions(lattice(), c[i], c[(i + 1) % n]);
      const int dir = dirs[rng_.below(dirs.size())];
      PlaquetteMove mv = plaquette_move(lattice(), cur, i, dir);
      if (mv.result) return try_accept(MoveType::kPlaquette, x, std::move(*mv.result));
    }
    count(MoveType::kPlaquette, false);
    return false;
  }

  Configuration cfg_;
  ChainConfig config_;
  SweepRng rng_;
  CandidateLists pools_;
  std::vector<double> length_law_, length_cdf_;
  std::array<double, kMoveTypes> move_cdf_{};
  mutable std::vector<std::uint64_t> stamp_;
  mutable std::uint64_t generation_ = 0;
  std::vector<char> whitelisted_;
  std::uint64_t sweeps_ = 0;
  std::array<std::uint64_t, kMoveTypes> proposed_{}, accepted_{};
};

/// Size of the largest nearest-neighbour component among vertices at torus
/// distance >= xi from every vertex of γ_o; |Λ| when γ_o = ζ.
inline std::size_t far_component(const Configuration& cfg, int xi, VertexIndex origin = 0) {
  if (xi < 1) throw PreconditionError("far_component: xi must be >= 1");
  const TorusLattice& lat = cfg.lattice();
  const Polygon& g = cfg.polygon(origin);
  const std::size_t n = lat.vertex_count();
  if (g.is_empty()) return n;
  std::vector<int> dist(n, -1);
  std::vector<VertexIndex> queue;
  for (VertexIndex v : g.cycle()) {
    dist[v] = 0;
    queue.push_back(v);
  }
  for (std::size_t h = 0; h < queue.size(); ++h) {
    VertexIndex v = queue[h];
    if (dist[v] >= xi) continue;
    for (VertexIndex w : lat.neighbors(v))
      if (dist[w] < 0) {
        dist[w] = dist[v] + 1;
        queue.push_back(w);
      }
  }
  auto far = [&](VertexIndex v) { return dist[v] < 0 || dist[v] >= xi; };
  std::vector<char> seen(n, 0);
  std::size_t best = 0;
  std::vector<VertexIndex> stack;
  for (VertexIndex s = 0; s < n; ++s) {
    if (seen[s] || !far(s)) continue;
    std::size_t size = 0;
    stack.assign(1, s);
    seen[s] = 1;
    while (!stack.empty()) {
      VertexIndex v = stack.back();
      stack.pop_back();
      ++size;
      for (VertexIndex w : lat.neighbors(v))
        if (!seen[w] && far(w)) {
          seen[w] = 1;
          stack.push_back(w);
        }
    }
    best = std::max(best, size);
  }
  return best;
}

/// A scalar function of the chain's current state.
struct Observable {
  std::string name;
  std::function<double(const Chain&)> eval;
};

namespace obs {

inline Observable origin_length() {
  return {"origin_length",
          [](const Chain& c) { return static_cast<double>(c.configuration().polygon(c.config().origin).length()); }};
}
inline Observable length_density() {
  return {"C_per_site", [](const Chain& c) {
            return static_cast<double>(c.configuration().observables().C) / static_cast<double>(c.configuration().volume());
          }};
}
inline Observable total_length() {
  return {"C", [](const Chain& c) { return static_cast<double>(c.configuration().observables().C); }};
}
inline Observable overlap() {
  return {"I", [](const Chain& c) { return static_cast<double>(c.configuration().observables().I); }};
}
inline Observable empty_count() {
  return {"N", [](const Chain& c) { return static_cast<double>(c.configuration().observables().N); }};
}
inline Observable empty_fraction() {
  return {"N_per_site", [](const Chain& c) {
            return static_cast<double>(c.configuration().observables().N) / static_cast<double>(c.configuration().volume());
          }};
}
inline Observable tail_indicator(int k) {
  return {"tail_" + std::to_string(k), [k](const Chain& c) {
            return c.configuration().polygon(c.config().origin).length() > static_cast<std::size_t>(k) ? 1.0 : 0.0;
          }};
}
inline Observable exp_length(double delta) {
  return {"exp_moment", [delta](const Chain& c) {
            return std::exp(delta * static_cast<double>(c.configuration().polygon(c.config().origin).length()));
          }};
}
inline Observable far_component_size(int xi) {
  return {"far_component_" + std::to_string(xi), [xi](const Chain& c) {
            return static_cast<double>(far_component(c.configuration(), xi, c.config().origin));
          }};
}

}  // namespace obs

/// Time series of several observables (and the umbrella reweighting factors)
/// recorded once per sweep after burn-in.
struct Recording {
  std::vector<std::vector<double>> series;
  std::vector<double> weights;  // empty when the chain is unbiased
};

inline Recording record(Chain& chain, const std::vector<Observable>& obs, std::uint64_t n_sweeps,
                        std::uint64_t burn_in) {
  if (burn_in >= n_sweeps) throw PreconditionError("burn_in must be smaller than n_sweeps");
  for (std::uint64_t s = 0; s < burn_in; ++s) chain.sweep();
  Recording r;
  r.series.assign(obs.size(), {});
  const bool biased = chain.config().bias.active();
  const std::uint64_t kept = n_sweeps - burn_in;
  for (auto& s : r.series) s.reserve(kept);
  std::vector<double> logw;
  for (std::uint64_t s = 0; s < kept; ++s) {
    chain.sweep();
    for (std::size_t k = 0; k < obs.size(); ++k) r.series[k].push_back(obs[k].eval(chain));
    if (biased) logw.push_back(chain.log_reweight());
  }
  if (biased) {
    double m = *std::max_element(logw.begin(), logw.end());
    for (double lw : logw) r.weights.push_back(std::exp(lw - m));
  }
  return r;
}

/// Tunes umbrella weights that flatten the sampled law of min(||γ_o||, saturation)
/// by iterated histogram reweighting. Each round runs a fresh chain for
/// `sweeps` sweeps (10% discarded) and lowers the weight of over-visited
/// lengths; lengths beyond the longest one seen get the mean slope of the
/// current weights plus `push` per unit length.
inline OriginBias tune_origin_bias(std::shared_ptr<const TorusLattice> lattice, ChainConfig config, int saturation,
                                   int rounds, std::uint64_t sweeps, double push = 0.5) {
  if (saturation < 1 || rounds < 1 || sweeps < 10) throw PreconditionError("tune_origin_bias: bad schedule");
  OriginBias bias = config.bias;
  if (bias.log_weight.size() != static_cast<std::size_t>(saturation) + 1)
    bias = OriginBias::linear(0.0, saturation, config.bias.extra_updates);
  for (int round = 0; round < rounds; ++round) {
    config.bias = bias;
    config.seed = splitmix64(config.seed + 0x9e37 + static_cast<std::uint64_t>(round));
    Chain chain(lattice, config);
    std::vector<double> hist(saturation + 1, 0.0);
    for (std::uint64_t s = 0; s < sweeps; ++s) {
      chain.sweep();
      if (s >= sweeps / 10)
        hist[std::min<std::size_t>(chain.configuration().polygon(config.origin).length(), saturation)] += 1.0;
    }
    int lo = -1, hi = -1, seen = 0;
    double mean = 0.0;
    for (int n = 0; n <= saturation; ++n)
      if (hist[n] > 0) {
        if (lo < 0) lo = n;
        hi = n;
        mean += hist[n];
        ++seen;
      }
    mean /= seen;
    auto& w = bias.log_weight;
    for (int n = 0; n <= saturation; ++n)
      if (hist[n] > 0) w[n] -= std::log(hist[n] / mean);
    const double slope = hi > lo ? (w[hi] - w[lo]) / (hi - lo) : 0.0;
    for (int n = hi + 1; n <= saturation; ++n) w[n] = w[hi] + (std::max(slope, 0.0) + push) * (n - hi);
    const double w0 = w[0];
    for (double& v : w) v -= w0;
  }
  return bias;
}

inline Estimate estimate_from(const Recording& r, std::size_t k, std::size_t batches = kDefaultBatches) {
  return r.weights.empty() ? batch_means(r.series[k], batches) : weighted_batch_means(r.series[k], r.weights, batches);
}

/// Batch-means estimate of E[observable] from sweeps burn_in..n_sweeps-1.
inline Estimate estimate(Chain& chain, const Observable& obs, std::uint64_t n_sweeps, std::uint64_t burn_in,
                         std::size_t batches = kDefaultBatches) {
  return estimate_from(record(chain, {obs}, n_sweeps, burn_in), 0, batches);
}

/// Flags estimators dominated by a few samples: a warning when the top 1% of
/// samples carry more than half of the total, an error when a single one does.
inline std::string dominance_check(const std::vector<double>& values, const std::vector<double>& weights = {}) {
  std::vector<double> c(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    c[i] = std::abs(values[i]) * (weights.empty() ? 1.0 : weights[i]);
    if (!std::isfinite(c[i])) throw NumericalDiagnostic("estimator sample is not finite (overflow)");
  }
  double total = 0.0;
  for (double v : c) total += v;
  if (total <= 0) return {};
  std::sort(c.begin(), c.end(), std::greater<>());
  if (c.front() > 0.5 * total)
    throw NumericalDiagnostic("estimator dominated by a single sample (" + std::to_string(c.front() / total) +
                              " of the total)");
  const std::size_t top = std::max<std::size_t>(1, c.size() / 100);
  double s = 0.0;
  for (std::size_t i = 0; i < top; ++i) s += c[i];
  if (s > 0.5 * total) return "top 1% of samples carry " + std::to_string(s / total) + " of the total";
  return {};
}

/// E[exp(delta ||γ_o||)] with the dominance diagnostic attached.
inline Estimate exp_moment(Chain& chain, double delta, std::uint64_t n_sweeps, std::uint64_t burn_in,
                           std::size_t batches = kDefaultBatches) {
  Recording r = record(chain, {obs::exp_length(delta)}, n_sweeps, burn_in);
  std::string warn = dominance_check(r.series[0], r.weights);
  Estimate e = estimate_from(r, 0, batches);
  e.warning = warn;
  return e;
}

/// P(||γ_o|| > k).
inline Estimate tail(Chain& chain, int k, std::uint64_t n_sweeps, std::uint64_t burn_in,
                     std::size_t batches = kDefaultBatches) {
  return estimate(chain, obs::tail_indicator(k), n_sweeps, burn_in, batches);
}

/// P(||γ_o|| > k) for several k from one run.
inline std::vector<Estimate> tail_profile(Chain& chain, const std::vector<int>& ks, std::uint64_t n_sweeps,
                                          std::uint64_t burn_in, std::size_t batches = kDefaultBatches) {
  std::vector<Observable> list;
  for (int k : ks) list.push_back(obs::tail_indicator(k));
  Recording r = record(chain, list, n_sweeps, burn_in);
  std::vector<Estimate> out;
  for (std::size_t i = 0; i < ks.size(); ++i) out.push_back(estimate_from(r, i, batches));
  return out;
}

/// Upper bound on Φ_L(alpha, lambda) = log Z / |Λ| (alpha-lambda form):
/// Z <= prod_x (1 + sum_γ e^{-a ||γ||} / ||γ||) with a = alpha - max(0, -lambda).
/// `counts[n]` are the rooted polygon counts per length available to a root;
/// when uncapped, lengths beyond the table use |SAP(n)| <= 2d (2d-1)^(n-2).
inline double pressure_tail_bound(double alpha, double lambda, const std::vector<std::uint64_t>& counts, int dim,
                                  bool uncapped) {
  const double a = alpha - std::max(0.0, -lambda);
  double s = 0.0;
  for (std::size_t n = 1; n < counts.size(); ++n)
    if (counts[n]) s += static_cast<double>(counts[n]) * std::exp(-a * static_cast<double>(n)) / static_cast<double>(n);
  if (uncapped) {
    const double r = (2.0 * dim - 1.0) * std::exp(-a);
    if (r >= 1.0)
      throw NumericalDiagnostic("pressure tail bound diverges: alpha_max too small for the crude polygon count");
    // Sum over n > n0 of 2d (2d-1)^(n-2) e^{-a n} / n <= 2d/(2d-1)^2 * r^(n0+1) / ((n0+1)(1-r)).
    const double n0 = static_cast<double>(counts.size() - 1);
    s += 2.0 * dim / ((2.0 * dim - 1.0) * (2.0 * dim - 1.0)) * std::pow(r, n0 + 1) / ((n0 + 1) * (1 - r));
  }
  return std::log1p(s);
}

struct TiPoint {
  double alpha = 0.0;
  double phi = 0.0;    // alpha-lambda form log Z / |Λ|
  double error = 0.0;  // statistical + quadrature + tail
  double integrand = 0.0;
  double integrand_error = 0.0;
};

struct TiResult {
  std::vector<TiPoint> points;
  double tail_bound = 0.0;
};

/// Thermodynamic integration of the pressure along an increasing alpha grid
/// at fixed lambda: Φ(alpha) = ∫_alpha^{alpha_max} E_s[C]/|Λ| ds + Φ(alpha_max),
/// with Φ(alpha_max) in [0, B] taken as B/2 ± B/2. Each grid point runs its
/// own chain seeded from the template's seed and the grid index.
inline TiResult ti_pressure(std::shared_ptr<const TorusLattice> lattice, double lambda,
                            const std::vector<double>& alpha_grid, const ChainConfig& base, std::uint64_t n_sweeps,
                            std::uint64_t burn_in, double tail_tolerance = 1e-2) {
  if (alpha_grid.size() < 2) throw PreconditionError("ti_pressure: need at least two grid points");
  for (std::size_t i = 1; i < alpha_grid.size(); ++i)
    if (!(alpha_grid[i] > alpha_grid[i - 1])) throw PreconditionError("ti_pressure: alpha grid must increase");
  const std::size_t m = alpha_grid.size();
  const double vol = static_cast<double>(lattice->vertex_count());

  // Polygon counts available to one root for the tail bound.
  const int K = base.trunc.per_polygon_cap;
  const bool uncapped = K < 0;
  const int n_table = uncapped ? std::min<int>(12, static_cast<int>(lattice->vertex_count())) : K;
  std::vector<std::uint64_t> counts(n_table + 1, 0);
  for (const Polygon& p : enumerate_rooted_upto(*lattice, 0, n_table)) ++counts[p.length()];
  TiResult res;
  res.tail_bound = pressure_tail_bound(alpha_grid.back(), lambda, counts, lattice->dimension(), uncapped);
  if (res.tail_bound > tail_tolerance)
    throw NumericalDiagnostic("ti_pressure: tail bound " + std::to_string(res.tail_bound) + " at alpha_max exceeds " +
                              std::to_string(tail_tolerance));

  std::vector<double> f(m), fe(m);
  for (std::size_t i = 0; i < m; ++i) {
    ChainConfig cc = base;
    cc.params = Params::alpha_lambda(alpha_grid[i], lambda);
    cc.seed = splitmix64(base.seed + 0x1000 * (i + 1));
    cc.bias = OriginBias{};
    Chain chain(lattice, cc);
    Estimate e = estimate(chain, obs::total_length(), n_sweeps, burn_in);
    f[i] = e.mean / vol;
    fe[i] = e.std_error / vol;
  }
  // Cumulative trapezoid from the top; per-interval curvature error h^3/12 |f''|.
  std::vector<double> second(m, 0.0);
  for (std::size_t i = 1; i + 1 < m; ++i) {
    double h1 = alpha_grid[i] - alpha_grid[i - 1], h2 = alpha_grid[i + 1] - alpha_grid[i];
    second[i] = 2.0 * ((f[i + 1] - f[i]) / h2 - (f[i] - f[i - 1]) / h1) / (h1 + h2);
  }
  if (m >= 3) {
    second[0] = second[1];
    second[m - 1] = second[m - 2];
  }
  res.points.resize(m);
  double integral = 0.0, quad_err = 0.0;
  std::vector<double> var_coeff(m, 0.0);  // weight of each f_j in the current integral
  for (std::size_t ii = m; ii-- > 0;) {
    if (ii + 1 < m) {
      double h = alpha_grid[ii + 1] - alpha_grid[ii];
      integral += 0.5 * h * (f[ii] + f[ii + 1]);
      var_coeff[ii] += 0.5 * h;
      var_coeff[ii + 1] += 0.5 * h;
      quad_err += h * h * h / 12.0 * std::max(std::abs(second[ii]), std::abs(second[ii + 1]));
    }
    double stat = 0.0;
    for (std::size_t j = ii; j < m; ++j) stat += var_coeff[j] * var_coeff[j] * fe[j] * fe[j];
    TiPoint& pt = res.points[ii];
    pt.alpha = alpha_grid[ii];
    pt.phi = integral + 0.5 * res.tail_bound;
    pt.error = 3.0 * std::sqrt(stat) + quad_err + 0.5 * res.tail_bound;
    pt.integrand = f[ii];
    pt.integrand_error = fe[ii];
  }
  return res;
}

}  // namespace isap
