#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "isap/lattice.hpp"

using namespace isap;

TEST(Lattice, VertexCountAndRoundTrip) {
  TorusLattice lat(5, 3);
  EXPECT_EQ(lat.vertex_count(), 125u);
  for (VertexIndex v = 0; v < lat.vertex_count(); ++v) EXPECT_EQ(lat.index(lat.coordinates(v)), v);
}

TEST(Lattice, NeighboursWrap) {
  TorusLattice lat(4, 2);
  auto nb = lat.neighbors(lat.index({0, 0}));
  std::set<VertexIndex> got(nb.begin(), nb.end());
  std::set<VertexIndex> want{lat.index({1, 0}), lat.index({3, 0}), lat.index({0, 1}), lat.index({0, 3})};
  EXPECT_EQ(got, want);
}

TEST(Lattice, NeighbourCountAndSymmetry) {
  TorusLattice lat3(3, 3);
  for (VertexIndex v = 0; v < lat3.vertex_count(); ++v) {
    auto nb = lat3.neighbors(v);
    EXPECT_EQ(nb.size(), 6u);
    std::set<VertexIndex> unique(nb.begin(), nb.end());
    EXPECT_EQ(unique.size(), 6u);
  }
  TorusLattice lat(4, 2);
  for (VertexIndex u = 0; u < lat.vertex_count(); ++u)
    for (VertexIndex v = 0; v < lat.vertex_count(); ++v) EXPECT_EQ(lat.is_adjacent(u, v), lat.is_adjacent(v, u));
}

TEST(Lattice, SideTwoCollapsesDuplicates) {
  TorusLattice lat(2, 2);
  EXPECT_EQ(lat.neighbors(0).size(), 2u);
  EXPECT_EQ(lat.step(0, 0), lat.step(0, 1));
}

TEST(Lattice, InvalidInputs) {
  EXPECT_THROW(TorusLattice(1, 2), PreconditionError);
  EXPECT_THROW(TorusLattice(4, 0), PreconditionError);
  TorusLattice lat(4, 2);
  EXPECT_THROW(lat.neighbors(16), PreconditionError);
}

TEST(Lattice, TorusDistanceExamples) {
  TorusLattice lat8(8, 2);
  EXPECT_EQ(lat8.torus_distance(lat8.index({0, 0}), lat8.index({7, 0})), 1);
  EXPECT_EQ(lat8.torus_distance(5, 5), 0);
  TorusLattice lat6(6, 2);
  // Brute force over the 9 periodic images.
  int best = 1 << 30;
  for (int i = -1; i <= 1; ++i)
    for (int j = -1; j <= 1; ++j) best = std::min(best, std::abs(3 + 6 * i) + std::abs(3 + 6 * j));
  EXPECT_EQ(lat6.torus_distance(lat6.index({0, 0}), lat6.index({3, 3})), best);
  EXPECT_EQ(best, 6);
}

TEST(Lattice, TorusDistanceIsMetric) {
  for (int L = 2; L <= 6; ++L) {
    TorusLattice lat(L, 2);
    const auto n = static_cast<VertexIndex>(lat.vertex_count());
    for (VertexIndex u = 0; u < n; ++u)
      for (VertexIndex v = 0; v < n; ++v) {
        int duv = lat.torus_distance(u, v);
        EXPECT_EQ(duv, lat.torus_distance(v, u));
        EXPECT_EQ(duv == 0, u == v);
        EXPECT_LE(duv, 2 * (L / 2));
        for (VertexIndex w = 0; w < n; ++w) EXPECT_LE(duv, lat.torus_distance(u, w) + lat.torus_distance(w, v));
      }
  }
}

TEST(Lattice, DistanceMatchesBfs) {
  TorusLattice lat(7, 2);
  auto dist = bfs_distances(lat, 10);
  for (VertexIndex v = 0; v < lat.vertex_count(); ++v) EXPECT_EQ(dist[v], lat.torus_distance(10, v));
}

TEST(Lattice, TranslateAndDisplacement) {
  TorusLattice lat(6, 2);
  for (VertexIndex u = 0; u < lat.vertex_count(); u += 5)
    for (VertexIndex v = 0; v < lat.vertex_count(); v += 7) EXPECT_EQ(lat.translate(u, lat.displacement(u, v)), v);
}

TEST(Box, NoWrap) {
  BoxDomain box({3, 4});
  EXPECT_EQ(box.vertex_count(), 12u);
  EXPECT_EQ(box.neighbors(box.index({0, 0})).size(), 2u);
  EXPECT_EQ(box.neighbors(box.index({1, 1})).size(), 4u);
  EXPECT_EQ(box.step(box.index({0, 0}), 1), kNoVertex);
  EXPECT_THROW(box.index({3, 0}), PreconditionError);
}
