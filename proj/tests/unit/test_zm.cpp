#include <gtest/gtest.h>

#include <cmath>

#include "isap/zm.hpp"
#include "oracles/edge_animals.hpp"

using namespace isap;

namespace {

const std::vector<Polygon>& pm_polygons(int m) {
  static std::vector<Polygon> cache[3];
  if (cache[m].empty()) cache[m] = enumerate_Pm(m);
  return cache[m];
}

}  // namespace

TEST(Zm, GridCycleCountsMatchOracle) {
  for (auto [r, c] : std::vector<std::pair<int, int>>{{2, 2}, {2, 5}, {3, 3}, {3, 4}, {4, 4}, {4, 5}}) {
    auto dp = grid_cycle_counts(r, c);
    auto brute = oracle::grid_cycles(r, c);
    ASSERT_EQ(dp.size(), brute.size());
    for (std::size_t n = 0; n < dp.size(); ++n) EXPECT_EQ(dp[n], brute[n]) << r << "x" << c << " n=" << n;
  }
}

TEST(Zm, RequiredEdgesMatchOracle) {
  // 4x4 grid, require the top edge (0,1)-(0,2) and the left edge (1,0)-(2,0).
  oracle::EdgeGraph g = oracle::grid_graph(4, 4);
  std::vector<int> req{oracle::grid_edge_index(g, 1, 2), oracle::grid_edge_index(g, 4, 8)};
  auto brute = oracle::grid_cycles(4, 4, req);
  auto dp = grid_cycle_counts(4, 4, {GridEdge{0, 1, true}, GridEdge{1, 0, false}});
  for (std::size_t n = 0; n < dp.size(); ++n) EXPECT_EQ(dp[n], brute[n]) << n;
}

TEST(Zm, PmPolygonsContainCardinalEdges) {
  for (int m : {1, 2}) {
    const auto& polys = pm_polygons(m);
    BoxDomain box = pm_box(m);
    ASSERT_FALSE(polys.empty());
    for (const auto& p : polys) {
      EXPECT_FALSE(validate(box, p));
      // Cardinal edges in (x, y) coordinates; the box stores (x, y) at (row y, col x).
      auto has = [&](int x1, int y1, int x2, int y2) {
        VertexIndex a = box.index({y1, x1}), b = box.index({y2, x2});
        const auto& c = p.cycle();
        for (std::size_t i = 0; i < c.size(); ++i) {
          VertexIndex u = c[i], v = c[(i + 1) % c.size()];
          if ((u == a && v == b) || (u == b && v == a)) return true;
        }
        return false;
      };
      EXPECT_TRUE(has(m, 0, m + 1, 0));
      EXPECT_TRUE(has(2 * m + 1, m, 2 * m + 1, m + 1));
      EXPECT_TRUE(has(m, 2 * m + 1, m + 1, 2 * m + 1));
      EXPECT_TRUE(has(0, m, 0, m + 1));
    }
  }
}

TEST(Zm, TransferCountsMatchDirectSearch) {
  for (int m : {1, 2}) {
    const auto& polys = pm_polygons(m);
    auto counts = pm_cycle_counts(m);
    std::vector<std::uint64_t> direct(counts.size(), 0);
    for (const auto& p : polys) ++direct[p.length()];
    for (std::size_t n = 0; n < counts.size(); ++n) EXPECT_EQ(direct[n], 2 * counts[n]) << "m=" << m << " n=" << n;
    for (double x : {0.3, 0.45, 0.6, 1.0}) {
      double a = Zm(m, x), b = polygon_weight_sum(polys, x);
      EXPECT_NEAR(a, b, 1e-11 * std::max(1.0, b));
    }
  }
}

TEST(Zm, SmallestCaseByHand) {
  // m = 1 is the 4x4 box; the edge-set oracle counts its cycles through all
  // four cardinal edges.
  const auto& polys = pm_polygons(1);
  auto oracle_counts = oracle::grid_cycles(
      4, 4,
      {oracle::grid_edge_index(oracle::grid_graph(4, 4), 1, 2), oracle::grid_edge_index(oracle::grid_graph(4, 4), 7, 11),
       oracle::grid_edge_index(oracle::grid_graph(4, 4), 13, 14), oracle::grid_edge_index(oracle::grid_graph(4, 4), 4, 8)});
  std::uint64_t total = 0;
  for (auto c : oracle_counts) total += c;
  EXPECT_EQ(polys.size(), 2 * total);
  EXPECT_EQ(Zm(1, 0.0), 0.0);
}

TEST(Zm, Preconditions) {
  EXPECT_THROW(enumerate_Pm(0), PreconditionError);
  EXPECT_THROW(Zm(1, -0.5), PreconditionError);
}
