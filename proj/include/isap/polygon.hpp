#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "isap/error.hpp"
#include "isap/lattice.hpp"

namespace isap {

/// A rooted, directed self-avoiding polygon stored as its vertex cycle.
///
/// The cycle is kept rotated so that the root sits at position 0; the directed
/// edges run cycle[i] -> cycle[i+1] and cycle[n-1] -> cycle[0]. Length 2 is the
/// doubled edge root -> v -> root. The empty polygon has a root but no vertices.
/// Reversing the cycle gives a different polygon (except for length 2).
class Polygon {
 public:
  Polygon() = default;

  static Polygon empty(VertexIndex root) {
    Polygon p;
    p.root_ = root;
    return p;
  }

  /// `cycle` may start anywhere; it is rotated so the root comes first. If the
  /// root is missing the sequence is kept as given (validate() reports it).
  Polygon(VertexIndex root, std::vector<VertexIndex> cycle) : root_(root), cycle_(std::move(cycle)) {
    auto it = std::find(cycle_.begin(), cycle_.end(), root_);
    if (it != cycle_.end()) std::rotate(cycle_.begin(), it, cycle_.end());
    log_length_ = cycle_.empty() ? 0.0 : std::log(static_cast<double>(cycle_.size()));
  }

  VertexIndex root() const { return root_; }
  std::size_t length() const { return cycle_.size(); }
  bool is_empty() const { return cycle_.empty(); }
  const std::vector<VertexIndex>& cycle() const { return cycle_; }

  /// log ||gamma||, 0 for the empty polygon.
  double log_length() const { return log_length_; }

  bool contains_vertex(VertexIndex v) const { return std::find(cycle_.begin(), cycle_.end(), v) != cycle_.end(); }

  std::vector<VertexIndex> vertices() const {
    std::vector<VertexIndex> v(cycle_);
    std::sort(v.begin(), v.end());
    return v;
  }

  friend bool operator==(const Polygon& a, const Polygon& b) {
    if (a.is_empty() && b.is_empty()) return a.root_ == b.root_;
    return a.root_ == b.root_ && a.cycle_ == b.cycle_;
  }

 private:
  VertexIndex root_ = 0;
  std::vector<VertexIndex> cycle_;
  double log_length_ = 0.0;
};

enum class PolygonViolation {
  kVertexOutOfRange,
  kLengthOne,
  kNonAdjacentStep,
  kRepeatedVertex,
  kRootMissing,
};

struct ViolationReport {
  PolygonViolation kind;
  std::string message;
};

inline const char* to_string(PolygonViolation v) {
  switch (v) {
    case PolygonViolation::kVertexOutOfRange: return "vertex-out-of-range";
    case PolygonViolation::kLengthOne: return "length-one";
    case PolygonViolation::kNonAdjacentStep: return "non-adjacent-step";
    case PolygonViolation::kRepeatedVertex: return "repeated-vertex";
    case PolygonViolation::kRootMissing: return "root-missing";
  }
  return "unknown";
}

/// Returns the first violated invariant, or nothing when `p` is a polygon of `g`.
template <LatticeGraph G>
std::optional<ViolationReport> validate(const G& g, const Polygon& p) {
  const auto& c = p.cycle();
  if (!(p.root() < g.vertex_count()))
    return ViolationReport{PolygonViolation::kVertexOutOfRange, "root out of range"};
  if (c.empty()) return std::nullopt;
  for (VertexIndex v : c)
    if (!(v < g.vertex_count()))
      return ViolationReport{PolygonViolation::kVertexOutOfRange, "vertex " + std::to_string(v) + " out of range"};
  if (c.size() == 1) return ViolationReport{PolygonViolation::kLengthOne, "a polygon cannot have exactly one vertex"};
  for (std::size_t i = 0; i < c.size(); ++i) {
    VertexIndex a = c[i], b = c[(i + 1) % c.size()];
    if (!g.is_adjacent(a, b))
      return ViolationReport{PolygonViolation::kNonAdjacentStep,
                             "step " + std::to_string(a) + " -> " + std::to_string(b) + " is not a lattice edge"};
  }
  std::vector<VertexIndex> sorted = p.vertices();
  auto dup = std::adjacent_find(sorted.begin(), sorted.end());
  if (dup != sorted.end())
    return ViolationReport{PolygonViolation::kRepeatedVertex, "vertex " + std::to_string(*dup) + " visited twice"};
  if (!p.contains_vertex(p.root()))
    return ViolationReport{PolygonViolation::kRootMissing, "root " + std::to_string(p.root()) + " not on the cycle"};
  return std::nullopt;
}

/// Byte key identifying the rooted directed polygon. Every empty polygon maps
/// to the same one-byte sentinel.
inline std::string canonical_key(const Polygon& p) {
  if (p.is_empty()) return std::string(1, '\0');
  std::string key;
  key.reserve(1 + 4 * (p.length() + 1));
  key.push_back('\1');
  auto put = [&key](VertexIndex v) {
    for (int b = 0; b < 4; ++b) key.push_back(static_cast<char>((v >> (8 * b)) & 0xff));
  };
  put(p.root());
  for (VertexIndex v : p.cycle()) put(v);
  return key;
}

inline Polygon translate(const TorusLattice& lat, const Polygon& p, const Coordinates& shift) {
  VertexIndex root = lat.translate(p.root(), shift);
  if (p.is_empty()) return Polygon::empty(root);
  std::vector<VertexIndex> cycle;
  cycle.reserve(p.length());
  for (VertexIndex v : p.cycle()) cycle.push_back(lat.translate(v, shift));
  return Polygon(root, std::move(cycle));
}

/// Moves `p` so that its root lands on `new_root`.
inline Polygon translate_to(const TorusLattice& lat, const Polygon& p, VertexIndex new_root) {
  return translate(lat, p, lat.displacement(p.root(), new_root));
}

/// Concatenation by symmetric difference of edge sets.
///
/// The two polygons must share either exactly one (undirected) edge with its
/// two endpoints, or exactly two adjacent edges with their three endpoints.
/// The result follows the orientation of `p1` and keeps its root; its length is
/// |p1| + |p2| - 2 or - 4. Both inputs must have length at least 3, since a
/// length-2 polygon is a doubled edge and has no well-defined shared edge.
template <LatticeGraph G>
Polygon concatenate(const G& g, const Polygon& p1, const Polygon& p2) {
  if (p1.length() < 3 || p2.length() < 3)
    throw PreconditionError("concatenate: both polygons need length >= 3");
  if (validate(g, p1) || validate(g, p2)) throw PreconditionError("concatenate: inputs must be valid polygons");

  std::vector<VertexIndex> shared;
  for (VertexIndex v : p1.cycle())
    if (p2.contains_vertex(v)) shared.push_back(v);
  if (shared.size() != 2 && shared.size() != 3)
    throw PreconditionError("concatenate: polygons share " + std::to_string(shared.size()) +
                            " vertices; need exactly 2 (one-edge case) or 3 (two-edge case)");

  const auto& c1 = p1.cycle();
  const auto& c2 = p2.cycle();
  const std::size_t n1 = c1.size(), n2 = c2.size();
  auto pos_in = [](const std::vector<VertexIndex>& c, VertexIndex v) {
    return static_cast<std::size_t>(std::find(c.begin(), c.end(), v) - c.begin());
  };
  auto in_shared = [&shared](VertexIndex v) { return std::find(shared.begin(), shared.end(), v) != shared.end(); };
  // Undirected edges of a cycle among the shared vertices.
  auto shared_edge_count = [&](const std::vector<VertexIndex>& c) {
    int count = 0;
    for (std::size_t i = 0; i < c.size(); ++i)
      if (in_shared(c[i]) && in_shared(c[(i + 1) % c.size()])) ++count;
    return count;
  };
  const int expected_edges = static_cast<int>(shared.size()) - 1;
  if (shared_edge_count(c1) != expected_edges || shared_edge_count(c2) != expected_edges)
    throw PreconditionError(std::string("concatenate: ") + (shared.size() == 2 ? "one-edge" : "two-edge") +
                            " case failed; the shared vertices do not form a common path of " +
                            std::to_string(expected_edges) + " edge(s)");

  // In p1 the shared vertices form a contiguous run start -> ... -> finish.
  std::size_t start = n1;
  for (std::size_t i = 0; i < n1; ++i)
    if (in_shared(c1[i]) && !in_shared(c1[(i + n1 - 1) % n1])) start = i;
  if (start == n1) throw PreconditionError("concatenate: shared vertices cover all of p1");
  const std::size_t run = shared.size();
  const VertexIndex first = c1[start];
  const VertexIndex last = c1[(start + run - 1) % n1];
  const VertexIndex middle = run == 3 ? c1[(start + 1) % n1] : kNoVertex;

  // Same run in p2, possibly reversed; it must be the same path.
  std::size_t j_first = pos_in(c2, first), j_last = pos_in(c2, last);
  int dir2 = 0;  // direction in c2 from first to last along the shared run
  if (c2[(j_first + run - 1) % n2] == last) dir2 = +1;
  else if (c2[(j_first + n2 - (run - 1)) % n2] == last) dir2 = -1;
  if (dir2 == 0 || (run == 3 && c2[(j_first + n2 + dir2) % n2] != middle))
    throw PreconditionError("concatenate: shared vertices are not a common path");
  (void)j_last;

  // Result: p1 from `last` forward around to `first`, then p2's long way from
  // `first` back to `last` (interior vertices only).
  std::vector<VertexIndex> out;
  out.reserve(n1 + n2);
  for (std::size_t k = 0; k < n1 - run + 2; ++k) out.push_back(c1[(start + run - 1 + k) % n1]);
  // p2's long way from first to last goes against dir2.
  const int away = -dir2;
  for (std::size_t k = 1; k + run - 1 < n2; ++k) {
    std::size_t idx = (j_first + n2 + static_cast<std::ptrdiff_t>(away) * static_cast<std::ptrdiff_t>(k) % static_cast<std::ptrdiff_t>(n2)) % n2;
    out.push_back(c2[idx]);
  }
  if (std::find(out.begin(), out.end(), p1.root()) == out.end())
    throw PreconditionError("concatenate: the root of p1 is removed by the concatenation");
  Polygon result(p1.root(), std::move(out));
  if (auto bad = validate(g, result))
    throw PreconditionError(std::string("concatenate: result is not a polygon: ") + bad->message);
  return result;
}

// Text format, one polygon per line:
//   <root> ':' <v0> <v1> ... <v_{n-1}>
// where every vertex is written as comma-separated coordinates, e.g.
//   0,0 : 0,0 1,0 1,1 0,1
// The empty polygon is "<root> :" with nothing after the colon.

inline std::string format_coordinates(const Coordinates& c) {
  std::string s;
  for (std::size_t k = 0; k < c.size(); ++k) {
    if (k) s.push_back(',');
    s += std::to_string(c[k]);
  }
  return s;
}

inline Coordinates parse_coordinates(const std::string& token, int dim) {
  Coordinates c;
  std::stringstream ss(token);
  std::string part;
  while (std::getline(ss, part, ',')) {
    try {
      std::size_t used = 0;
      c.push_back(std::stoi(part, &used));
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw PreconditionError("bad coordinate token '" + token + "'");
    }
  }
  if (static_cast<int>(c.size()) != dim)
    throw PreconditionError("coordinate '" + token + "' has " + std::to_string(c.size()) + " entries, expected " +
                            std::to_string(dim));
  return c;
}

template <LatticeGraph G>
std::string format_polygon(const G& g, const Polygon& p) {
  std::string line = format_coordinates(g.coordinates(p.root())) + " :";
  for (VertexIndex v : p.cycle()) line += " " + format_coordinates(g.coordinates(v));
  return line;
}

template <LatticeGraph G>
Polygon parse_polygon(const G& g, const std::string& line) {
  auto colon = line.find(':');
  if (colon == std::string::npos) throw PreconditionError("polygon line lacks ':' separator: " + line);
  std::stringstream head(line.substr(0, colon));
  std::string root_token, extra;
  if (!(head >> root_token) || (head >> extra)) throw PreconditionError("polygon line needs exactly one root: " + line);
  VertexIndex root = g.index(parse_coordinates(root_token, g.dimension()));
  std::stringstream tail(line.substr(colon + 1));
  std::vector<VertexIndex> cycle;
  std::string tok;
  while (tail >> tok) cycle.push_back(g.index(parse_coordinates(tok, g.dimension())));
  Polygon p(root, std::move(cycle));
  if (auto bad = validate(g, p)) throw PreconditionError("invalid polygon '" + line + "': " + bad->message);
  return p;
}

}  // namespace isap
