#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "isap/enumeration.hpp"
#include "isap/error.hpp"
#include "isap/lattice.hpp"
#include "isap/polygon.hpp"

namespace isap {

/// Undirected edge of a planar grid given as (row, col) of the origin vertex
/// and whether it points right (to col + 1) or down (to row + 1).
struct GridEdge {
  int row;
  int col;
  bool right;
};

/// The box [0, 2m+1]^2 used for P_m, with vertex (x, y) stored at row y, col x.
inline BoxDomain pm_box(int m) { return BoxDomain({2 * m + 2, 2 * m + 2}); }

/// The four cardinal edges in the middle of each face of the P_m box.
inline std::array<GridEdge, 4> pm_cardinal_edges(int m) {
  return {GridEdge{0, m, true}, GridEdge{m, 2 * m + 1, false}, GridEdge{2 * m + 1, m, true}, GridEdge{m, 0, false}};
}

namespace detail {

inline std::pair<VertexIndex, VertexIndex> grid_edge_vertices(const BoxDomain& box, const GridEdge& e) {
  VertexIndex a = box.index({e.row, e.col});
  VertexIndex b = e.right ? box.index({e.row, e.col + 1}) : box.index({e.row + 1, e.col});
  return {a, b};
}

inline bool polygon_has_undirected_edge(const Polygon& p, VertexIndex a, VertexIndex b) {
  const auto& c = p.cycle();
  for (std::size_t i = 0; i < c.size(); ++i) {
    VertexIndex u = c[i], v = c[(i + 1) % c.size()];
    if ((u == a && v == b) || (u == b && v == a)) return true;
  }
  return false;
}

}  // namespace detail

/// True when `p` contains all four cardinal edges of the P_m box (either
/// orientation).
inline bool in_Pm(int m, const Polygon& p) {
  BoxDomain box = pm_box(m);
  for (const GridEdge& e : pm_cardinal_edges(m)) {
    auto [a, b] = detail::grid_edge_vertices(box, e);
    if (!detail::polygon_has_undirected_edge(p, a, b)) return false;
  }
  return true;
}

/// P_m by direct search: all directed polygons in the box through the
/// cardinal edges, each rooted at (m, 0). Every undirected cycle appears once
/// per orientation. Feasible for m <= 2.
inline std::vector<Polygon> enumerate_Pm(int m, const EnumerationBudget& budget = {}) {
  if (m < 1) throw PreconditionError("enumerate_Pm: m must be >= 1");
  BoxDomain box = pm_box(m);
  const VertexIndex root = box.index({0, m});
  const int max_len = static_cast<int>(box.vertex_count());
  std::vector<Polygon> out;
  detail::grow_closures(box, root, max_len, budget, [&](const std::vector<VertexIndex>& path) {
    if (path.size() < 4) return;
    Polygon p(root, path);
    if (in_Pm(m, p)) out.push_back(std::move(p));
  });
  return out;
}

/// Sum of x^n / (n v 1) over a list of polygons.
inline double polygon_weight_sum(const std::vector<Polygon>& polys, double x) {
  double z = 0.0;
  for (const Polygon& p : polys) {
    double n = static_cast<double>(p.length());
    z += std::pow(x, n) / std::max(n, 1.0);
  }
  return z;
}

/// Number of undirected simple cycles of an H x W grid graph, indexed by
/// length, restricted to cycles that use every edge in `required` (at most
/// 16 edges). Broken-profile transfer over vertices with a bracket encoding
/// of the crossing edges.
inline std::vector<std::uint64_t> grid_cycle_counts(int rows, int cols, const std::vector<GridEdge>& required = {}) {
  if (rows < 1 || cols < 1) throw PreconditionError("grid_cycle_counts: grid must be non-empty");
  if (cols + 1 > 24) throw PreconditionError("grid_cycle_counts: grid too wide");
  if (required.size() > 16) throw PreconditionError("grid_cycle_counts: at most 16 required edges");
  const int W = cols;
  const int slots = W + 1;
  const int max_len = rows * cols;
  const std::uint64_t full_mask = (required.size() == 64) ? ~0ULL : ((1ULL << required.size()) - 1);
  const int mask_shift = 2 * slots;

  auto req_bit = [&](int r, int c, bool right) -> std::uint64_t {
    std::uint64_t bits = 0;
    for (std::size_t k = 0; k < required.size(); ++k)
      if (required[k].row == r && required[k].col == c && required[k].right == right) bits |= 1ULL << k;
    return bits;
  };
  auto get = [](std::uint64_t s, int i) { return static_cast<int>((s >> (2 * i)) & 3ULL); };
  auto set = [](std::uint64_t s, int i, int v) {
    return (s & ~(3ULL << (2 * i))) | (static_cast<std::uint64_t>(v) << (2 * i));
  };

  using Counts = std::vector<std::uint64_t>;
  std::unordered_map<std::uint64_t, Counts> cur, next;
  cur[0] = Counts(max_len + 1, 0);
  cur[0][0] = 1;
  std::vector<std::uint64_t> result(max_len + 1, 0);

  auto add = [&](std::uint64_t key, const Counts& src, int inc) {
    auto [it, fresh] = next.try_emplace(key, Counts(max_len + 1, 0));
    Counts& dst = it->second;
    for (int n = 0; n + inc <= max_len; ++n) dst[n + inc] += src[n];
  };

  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < W; ++c) {
      next.clear();
      const bool can_down = r + 1 < rows;
      const bool can_right = c + 1 < W;
      const std::uint64_t down_bit = can_down ? req_bit(r, c, false) : 0;
      const std::uint64_t right_bit = can_right ? req_bit(r, c, true) : 0;
      for (const auto& [key, counts] : cur) {
        const std::uint64_t plugs = key & ((1ULL << mask_shift) - 1);
        const std::uint64_t mask = key >> mask_shift;
        const int L = get(plugs, c), U = get(plugs, c + 1);
        auto emit = [&](std::uint64_t p, int down, int right, int inc) {
          std::uint64_t m2 = mask;
          if (down) m2 |= down_bit;
          else if (down_bit) return;  // a required edge must be taken when decided
          if (right) m2 |= right_bit;
          else if (right_bit) return;
          p = set(set(p, c, down), c + 1, right);
          add(p | (m2 << mask_shift), counts, inc);
        };
        if (L == 0 && U == 0) {
          emit(plugs, 0, 0, 0);
          if (can_down && can_right) emit(plugs, 1, 2, 1);
        } else if (L == 0 || U == 0) {
          const int v = L ? L : U;
          if (can_down) emit(plugs, v, 0, 1);
          if (can_right) emit(plugs, 0, v, 1);
        } else if (L == 1 && U == 1) {
          // Partner of U turns into an opener.
          int depth = 0, j = c + 1;
          for (; j < slots; ++j) {
            int s = get(plugs, j);
            if (s == 1) ++depth;
            else if (s == 2 && --depth == 0) break;
          }
          emit(set(plugs, j, 1), 0, 0, 1);
        } else if (L == 2 && U == 2) {
          // Partner of L turns into a closer.
          int depth = 0, j = c;
          for (; j >= 0; --j) {
            int s = get(plugs, j);
            if (s == 2) ++depth;
            else if (s == 1 && --depth == 0) break;
          }
          emit(set(plugs, j, 2), 0, 0, 1);
        } else if (L == 2 && U == 1) {
          emit(plugs, 0, 0, 1);
        } else {
          // L opens and U closes the same strand: the cycle closes here.
          std::uint64_t rest = set(set(plugs, c, 0), c + 1, 0);
          if (rest == 0 && mask == full_mask && !down_bit && !right_bit)
            for (int n = 0; n + 1 <= max_len; ++n) result[n + 1] += counts[n];
        }
      }
      std::swap(cur, next);
    }
    // End of row: the horizontal plug must be empty; shift the profile.
    next.clear();
    for (const auto& [key, counts] : cur) {
      const std::uint64_t plugs = key & ((1ULL << mask_shift) - 1);
      if (get(plugs, W) != 0) continue;
      const std::uint64_t shifted = (plugs << 2) & ((1ULL << mask_shift) - 1);
      auto [it, fresh] = next.try_emplace(shifted | ((key >> mask_shift) << mask_shift), Counts(max_len + 1, 0));
      for (int n = 0; n <= max_len; ++n) it->second[n] += counts[n];
    }
    std::swap(cur, next);
  }
  return result;
}

/// Undirected cycle counts of P_m by length.
inline std::vector<std::uint64_t> pm_cycle_counts(int m) {
  if (m < 1) throw PreconditionError("pm_cycle_counts: m must be >= 1");
  auto req = pm_cardinal_edges(m);
  return grid_cycle_counts(2 * m + 2, 2 * m + 2, std::vector<GridEdge>(req.begin(), req.end()));
}

/// Z_m(x) = sum over directed polygons of P_m of x^|γ| / (|γ| v 1).
inline double Zm(int m, double x) {
  if (x < 0) throw PreconditionError("Zm: x must be non-negative");
  const auto counts = pm_cycle_counts(m);
  double z = 0.0;
  for (std::size_t n = 1; n < counts.size(); ++n)
    if (counts[n]) z += 2.0 * static_cast<double>(counts[n]) * std::pow(x, static_cast<double>(n)) / static_cast<double>(n);
  return z;
}

}  // namespace isap
