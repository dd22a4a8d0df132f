#pragma once

#include <algorithm>
#include <concepts>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "isap/error.hpp"

namespace isap {

using VertexIndex = std::uint32_t;
inline constexpr VertexIndex kNoVertex = std::numeric_limits<VertexIndex>::max();

using Coordinates = std::vector<int>;

/// Direction index in [0, 2d): axis = dir / 2, sign = +1 for even dir, -1 for odd.
inline constexpr int direction_axis(int dir) { return dir / 2; }
inline constexpr int direction_sign(int dir) { return (dir % 2 == 0) ? 1 : -1; }
inline constexpr int opposite_direction(int dir) { return dir ^ 1; }

/// The interface shared by the torus and by bounded boxes. Enumeration and
/// polygon code is written against this concept.
template <typename G>
concept LatticeGraph = requires(const G& g, VertexIndex v, int dir) {
  { g.dimension() } -> std::convertible_to<int>;
  { g.vertex_count() } -> std::convertible_to<std::size_t>;
  { g.neighbors(v) } -> std::convertible_to<std::span<const VertexIndex>>;
  { g.step(v, dir) } -> std::convertible_to<VertexIndex>;
  { g.is_adjacent(v, v) } -> std::convertible_to<bool>;
  { g.coordinates(v) } -> std::convertible_to<Coordinates>;
};

namespace detail {

// Row-major with the first axis varying slowest.
inline VertexIndex row_major_index(const Coordinates& c, std::span<const int> sides) {
  std::uint64_t idx = 0;
  for (std::size_t k = 0; k < sides.size(); ++k) idx = idx * static_cast<std::uint64_t>(sides[k]) + c[k];
  return static_cast<VertexIndex>(idx);
}

inline Coordinates row_major_coordinates(VertexIndex v, std::span<const int> sides) {
  Coordinates c(sides.size());
  for (std::size_t k = sides.size(); k-- > 0;) {
    c[k] = static_cast<int>(v % static_cast<VertexIndex>(sides[k]));
    v /= static_cast<VertexIndex>(sides[k]);
  }
  return c;
}

}  // namespace detail

/// Finite d-dimensional torus with side L and nearest-neighbour adjacency.
///
/// Coordinates live in [0, L)^d (a fixed shift of [-L/2, L/2)^d). For L = 2
/// the +1 and -1 neighbours along an axis coincide; `neighbors` then lists
/// each distinct vertex once (d neighbours instead of 2d), while `step` still
/// answers for all 2d directions. Immutable after construction.
class TorusLattice {
 public:
  TorusLattice(int side, int dim) : side_(side), dim_(dim) {
    if (side < 2) throw PreconditionError("torus side length must be >= 2, got " + std::to_string(side));
    if (dim < 1) throw PreconditionError("torus dimension must be >= 1, got " + std::to_string(dim));
    std::uint64_t count = 1;
    for (int k = 0; k < dim; ++k) {
      count *= static_cast<std::uint64_t>(side);
      if (count >= kNoVertex) throw PreconditionError("torus too large for 32-bit vertex indices");
    }
    count_ = static_cast<std::size_t>(count);
    sides_.assign(dim, side);
    build_tables();
  }

  int side() const { return side_; }
  int dimension() const { return dim_; }
  std::size_t vertex_count() const { return count_; }
  int direction_count() const { return 2 * dim_; }

  bool valid(VertexIndex v) const { return v < count_; }

  std::span<const VertexIndex> neighbors(VertexIndex v) const {
    check(v);
    return {unique_nbrs_.data() + offsets_[v], offsets_[v + 1] - offsets_[v]};
  }

  VertexIndex step(VertexIndex v, int dir) const { return steps_[static_cast<std::size_t>(v) * 2 * dim_ + dir]; }

  bool is_adjacent(VertexIndex u, VertexIndex v) const {
    for (VertexIndex w : neighbors(u))
      if (w == v) return true;
    return false;
  }

  Coordinates coordinates(VertexIndex v) const {
    check(v);
    return detail::row_major_coordinates(v, sides_);
  }

  VertexIndex index(const Coordinates& c) const {
    if (c.size() != static_cast<std::size_t>(dim_)) throw PreconditionError("coordinate arity mismatch");
    Coordinates wrapped(c);
    for (int& x : wrapped) x = wrap(x);
    return detail::row_major_index(wrapped, sides_);
  }

  /// l1 distance minimised over periodic images.
  int torus_distance(VertexIndex u, VertexIndex v) const {
    check(u);
    check(v);
    int total = 0;
    for (int k = dim_; k-- > 0;) {
      int du = static_cast<int>(u % side_), dv = static_cast<int>(v % side_);
      u /= side_;
      v /= side_;
      int delta = std::abs(du - dv);
      total += std::min(delta, side_ - delta);
    }
    return total;
  }

  VertexIndex translate(VertexIndex v, const Coordinates& shift) const {
    Coordinates c = coordinates(v);
    for (int k = 0; k < dim_; ++k) c[k] += shift[k];
    return index(c);
  }

  /// Coordinate-wise difference v - u reduced to (-L/2, L/2].
  Coordinates displacement(VertexIndex u, VertexIndex v) const {
    Coordinates a = coordinates(u), b = coordinates(v);
    for (int k = 0; k < dim_; ++k) {
      int delta = wrap(b[k] - a[k]);
      if (delta > side_ / 2) delta -= side_;
      b[k] = delta;
    }
    return b;
  }

  bool operator==(const TorusLattice& o) const { return side_ == o.side_ && dim_ == o.dim_; }

 private:
  int wrap(int x) const { return ((x % side_) + side_) % side_; }

  void check(VertexIndex v) const {
    if (v >= count_) throw PreconditionError("vertex index " + std::to_string(v) + " out of range");
  }

  void build_tables() {
    steps_.resize(count_ * 2 * dim_);
    offsets_.assign(count_ + 1, 0);
    unique_nbrs_.reserve(count_ * 2 * dim_);
    for (VertexIndex v = 0; v < count_; ++v) {
      Coordinates c = detail::row_major_coordinates(v, sides_);
      for (int dir = 0; dir < 2 * dim_; ++dir) {
        Coordinates n = c;
        n[direction_axis(dir)] = wrap(n[direction_axis(dir)] + direction_sign(dir));
        VertexIndex w = detail::row_major_index(n, sides_);
        steps_[static_cast<std::size_t>(v) * 2 * dim_ + dir] = w;
        auto begin = unique_nbrs_.begin() + offsets_[v];
        if (std::find(begin, unique_nbrs_.end(), w) == unique_nbrs_.end()) unique_nbrs_.push_back(w);
      }
      offsets_[v + 1] = unique_nbrs_.size();
    }
  }

  int side_;
  int dim_;
  std::size_t count_ = 0;
  std::vector<int> sides_;
  std::vector<VertexIndex> steps_;
  std::vector<std::size_t> offsets_;
  std::vector<VertexIndex> unique_nbrs_;
};

/// Axis-aligned box [0, s_0) x ... x [0, s_{d-1}) of Z^d without wrap-around.
class BoxDomain {
 public:
  explicit BoxDomain(std::vector<int> sides) : sides_(std::move(sides)) {
    if (sides_.empty()) throw PreconditionError("box needs at least one axis");
    std::uint64_t count = 1;
    for (int s : sides_) {
      if (s < 1) throw PreconditionError("box side lengths must be positive");
      count *= static_cast<std::uint64_t>(s);
      if (count >= kNoVertex) throw PreconditionError("box too large for 32-bit vertex indices");
    }
    count_ = static_cast<std::size_t>(count);
    dim_ = static_cast<int>(sides_.size());
    build_tables();
  }

  /// Cube of the given side in d dimensions.
  static BoxDomain cube(int side, int dim) { return BoxDomain(std::vector<int>(dim, side)); }

  int dimension() const { return dim_; }
  std::size_t vertex_count() const { return count_; }
  int direction_count() const { return 2 * dim_; }
  const std::vector<int>& sides() const { return sides_; }
  bool valid(VertexIndex v) const { return v < count_; }

  std::span<const VertexIndex> neighbors(VertexIndex v) const {
    if (v >= count_) throw PreconditionError("vertex index out of range");
    return {nbrs_.data() + offsets_[v], offsets_[v + 1] - offsets_[v]};
  }

  /// kNoVertex when the step leaves the box.
  VertexIndex step(VertexIndex v, int dir) const { return steps_[static_cast<std::size_t>(v) * 2 * dim_ + dir]; }

  bool is_adjacent(VertexIndex u, VertexIndex v) const {
    for (VertexIndex w : neighbors(u))
      if (w == v) return true;
    return false;
  }

  Coordinates coordinates(VertexIndex v) const { return detail::row_major_coordinates(v, sides_); }

  VertexIndex index(const Coordinates& c) const {
    if (!contains(c)) throw PreconditionError("coordinates outside box");
    return detail::row_major_index(c, sides_);
  }

  bool contains(const Coordinates& c) const {
    if (c.size() != sides_.size()) return false;
    for (std::size_t k = 0; k < c.size(); ++k)
      if (c[k] < 0 || c[k] >= sides_[k]) return false;
    return true;
  }

 private:
  void build_tables() {
    steps_.assign(count_ * 2 * dim_, kNoVertex);
    offsets_.assign(count_ + 1, 0);
    for (VertexIndex v = 0; v < count_; ++v) {
      Coordinates c = detail::row_major_coordinates(v, sides_);
      for (int dir = 0; dir < 2 * dim_; ++dir) {
        Coordinates n = c;
        n[direction_axis(dir)] += direction_sign(dir);
        if (!contains(n)) continue;
        VertexIndex w = detail::row_major_index(n, sides_);
        steps_[static_cast<std::size_t>(v) * 2 * dim_ + dir] = w;
        nbrs_.push_back(w);
      }
      offsets_[v + 1] = nbrs_.size();
    }
  }

  std::vector<int> sides_;
  int dim_ = 0;
  std::size_t count_ = 0;
  std::vector<VertexIndex> steps_;
  std::vector<std::size_t> offsets_;
  std::vector<VertexIndex> nbrs_;
};

static_assert(LatticeGraph<TorusLattice>);
static_assert(LatticeGraph<BoxDomain>);

/// Breadth-first graph distances from `source`; unreachable vertices get -1.
template <LatticeGraph G>
std::vector<int> bfs_distances(const G& g, VertexIndex source) {
  std::vector<int> dist(g.vertex_count(), -1);
  std::vector<VertexIndex> queue{source};
  dist[source] = 0;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    VertexIndex v = queue[head];
    for (VertexIndex w : g.neighbors(v)) {
      if (dist[w] >= 0) continue;
      dist[w] = dist[v] + 1;
      queue.push_back(w);
    }
  }
  return dist;
}

}  // namespace isap
