#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "isap/srp.hpp"

using namespace isap;

namespace {

// Every permutation of the vertex set, filtered to |σ(x) - x| <= 1.
SrpResult brute_srp(const TorusLattice& lat, double alpha, VertexIndex x) {
  const std::size_t n = lat.vertex_count();
  std::vector<VertexIndex> sigma(n);
  std::iota(sigma.begin(), sigma.end(), VertexIndex{0});
  SrpResult r;
  r.cycle_law.assign(n + 1, 0.0);
  do {
    int moved = 0;
    bool ok = true;
    for (VertexIndex v = 0; v < n && ok; ++v) {
      const int d = lat.torus_distance(v, sigma[v]);
      ok = d <= 1;
      moved += d;
    }
    if (!ok) continue;
    std::size_t len = 1;
    for (VertexIndex y = sigma[x]; y != x; y = sigma[y]) ++len;
    const double w = std::exp(-alpha * moved);
    r.Z += w;
    r.cycle_law[len] += w;
    ++r.permutations;
  } while (std::next_permutation(sigma.begin(), sigma.end()));
  for (double& p : r.cycle_law) p /= r.Z;
  return r;
}

}  // namespace

TEST(Srp, MatchesAllPermutationsOnThreeByThree) {
  TorusLattice lat(3, 2);
  for (double alpha : {0.0, 0.8}) {
    SrpResult e = srp_enumerate(lat, alpha, 4);
    SrpResult b = brute_srp(lat, alpha, 4);
    EXPECT_EQ(e.permutations, b.permutations);
    EXPECT_NEAR(e.Z / b.Z, 1.0, 1e-12);
    ASSERT_EQ(e.cycle_law.size(), b.cycle_law.size());
    for (std::size_t k = 0; k < b.cycle_law.size(); ++k) EXPECT_NEAR(e.cycle_law[k], b.cycle_law[k], 1e-12) << k;
  }
}

TEST(Srp, PartitionFunctionIsPermanent) {
  for (int L : {3, 4}) {
    TorusLattice lat(L, 2);
    for (double alpha : {0.0, 0.5, 2.0}) {
      const double perm = permanent(srp_weight_matrix(lat, alpha));
      EXPECT_NEAR(srp_enumerate(lat, alpha).Z / perm, 1.0, 1e-10) << "L=" << L << " alpha=" << alpha;
    }
  }
  EXPECT_NEAR(permanent(std::vector<std::vector<double>>(5, std::vector<double>(5, 1.0))), 120.0, 1e-9);
  EXPECT_NEAR(permanent({{1, 2}, {3, 4}}), 10.0, 1e-12);
}

TEST(Srp, CycleLawConcentratesOnFixedPointsForLargeAlpha) {
  TorusLattice lat(4, 2);
  std::vector<double> law = srp_cycle_law(lat, 30.0);
  EXPECT_NEAR(std::accumulate(law.begin(), law.end(), 0.0), 1.0, 1e-12);
  EXPECT_GT(law[1], 1 - 1e-10);
}

TEST(Srp, Preconditions) {
  EXPECT_THROW(srp_enumerate(TorusLattice(2, 2), 1.0), PreconditionError);
  EXPECT_THROW(srp_enumerate(TorusLattice(3, 2), 1.0, 9), PreconditionError);
}

TEST(Srp, LawHelpers) {
  EXPECT_DOUBLE_EQ(total_variation({0.5, 0.5}, {1.0}), 0.5);
  std::vector<double> r = restrict_law({0.0, 0.2, 0.2, 0.6}, 2);
  ASSERT_EQ(r.size(), 3u);
  EXPECT_DOUBLE_EQ(r[1], 0.5);
  EXPECT_DOUBLE_EQ(r[2], 0.5);
}
