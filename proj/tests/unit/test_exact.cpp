#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "../oracles/brute_force.hpp"
#include "isap/exact.hpp"

using namespace isap;

namespace {

std::set<std::string> keys(const std::vector<Polygon>& ps) {
  std::set<std::string> out;
  for (const Polygon& p : ps)
    if (!p.is_empty()) out.insert(canonical_key(p));
  return out;
}

std::vector<std::vector<Polygon>> oracle_options(const TorusLattice& lat, const TruncationPolicy& trunc) {
  std::vector<std::vector<Polygon>> options(lat.vertex_count());
  for (VertexIndex v = 0; v < lat.vertex_count(); ++v) {
    options[v].push_back(Polygon::empty(v));
    if (!trunc.allows_root(v)) continue;
    for (Polygon& p : oracle::pool_from_steps(lat, v, trunc.per_polygon_cap)) options[v].push_back(std::move(p));
  }
  return options;
}

void expect_matches_brute(const TorusLattice& lat, const TruncationPolicy& trunc, double alpha, double lambda,
                          VertexIndex origin = 0) {
  const oracle::GibbsSums b =
      oracle::gibbs_sums(lat, oracle_options(lat, trunc), trunc.total_cap, alpha, lambda, origin);
  const ExactSummary s = exact_summary(lat, Params::alpha_lambda(alpha, lambda), trunc, origin);
  EXPECT_EQ(s.states, b.states);
  // both sides sum up to ~1e6 terms in different orders
  EXPECT_NEAR(s.log_Z, std::log(b.Z), 1e-9);
  EXPECT_NEAR(s.mean_C, b.C / b.Z, 1e-9);
  EXPECT_NEAR(s.mean_I, b.I / b.Z, 1e-9);
  EXPECT_NEAR(s.mean_N, b.N / b.Z, 1e-9);
  for (std::size_t k = 0; k < std::max(s.origin_length_law.size(), b.origin_law.size()); ++k) {
    const double e = k < s.origin_length_law.size() ? s.origin_length_law[k] : 0.0;
    const double o = k < b.origin_law.size() ? b.origin_law[k] / b.Z : 0.0;
    EXPECT_NEAR(e, o, 1e-10) << "length " << k;
  }
}

}  // namespace

TEST(Pools, MatchStepSequenceEnumeration) {
  struct Case { int L, d, K; };
  for (Case c : {Case{3, 2, 6}, Case{4, 2, 6}, Case{5, 2, 6}, Case{4, 2, 8}, Case{3, 3, 4}}) {
    TorusLattice lat(c.L, c.d);
    CandidateLists pools = polygon_pools(lat, c.K);
    ASSERT_EQ(pools.size(), lat.vertex_count());
    for (VertexIndex v : {VertexIndex{0}, static_cast<VertexIndex>(lat.vertex_count() - 1)}) {
      EXPECT_TRUE(pools[v].front().is_empty());
      EXPECT_EQ(pools[v].front().root(), v);
      for (std::size_t i = 1; i < pools[v].size(); ++i) EXPECT_LE(pools[v][i - 1].length(), pools[v][i].length());
      EXPECT_EQ(keys(pools[v]), keys(oracle::pool_from_steps(lat, v, c.K)))
          << "L=" << c.L << " d=" << c.d << " K=" << c.K << " root " << v;
    }
  }
}

TEST(Exact, ReferenceInstanceMatchesBruteForce) {
  TorusLattice lat(4, 2);
  expect_matches_brute(lat, {4, 8, {}}, 1.0, 0.5);
  expect_matches_brute(lat, {4, 8, {}}, -0.3, 1.7, 5);
}

TEST(Exact, ThreeDimensionsMatchBruteForce) {
  TorusLattice lat(3, 3);
  expect_matches_brute(lat, {4, 4, {}}, 0.4, -0.2);
}

TEST(Exact, OddSideMatchesBruteForce) {
  TorusLattice lat(3, 2);
  expect_matches_brute(lat, {6, 6, {}}, 0.2, 0.9);
}

TEST(Exact, WhitelistWithoutTotalCapMatchesBruteForce) {
  TorusLattice lat(4, 2);
  expect_matches_brute(lat, {6, -1, {0, 1, 5}}, 0.3, 0.25);
}

TEST(Exact, StateSpaceSizeCountsEveryLeaf) {
  TorusLattice lat(4, 2);
  for (int T : {0, 2, 4, 6, 8}) {
    TruncationPolicy trunc{4, T, {}};
    const auto b = oracle::gibbs_sums(lat, oracle_options(lat, trunc), T, 0.0, 0.0, 0);
    EXPECT_EQ(state_space_size(truncated_candidates(lat, trunc), T), b.states) << "T=" << T;
    // alpha = lambda = 0 leaves only the 1/||gamma|| factors
    EXPECT_NEAR(exact_density(lat, trunc).log_partition(Params::alpha_lambda(0, 0)), std::log(b.Z), 1e-9);
  }
  EXPECT_EQ(state_space_size(truncated_candidates(lat, {4, 8, {}}), 8), 855297u);
}

TEST(Exact, RhoNuFormShiftsLogPartition) {
  TorusLattice lat(4, 2);
  DensityTable t = exact_density(lat, {4, 8, {}});
  const double a = t.log_partition(Params::alpha_lambda(1.0, 0.5));
  const double r = t.log_partition(Params::rho_nu(1.5, 0.5));
  EXPECT_NEAR(a, 3.6202169889, 1e-9);
  EXPECT_NEAR(r, a - 0.5 * 16, 1e-11);
}

TEST(Exact, ThreadCountDoesNotChangeTheTable) {
  TorusLattice lat(4, 2);
  DensityTable one = exact_density(lat, {4, 6, {}}, 0, {0, 1});
  DensityTable three = exact_density(lat, {4, 6, {}}, 0, {0, 3});
  auto a = one.cells(), b = three.cells();
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].C, b[i].C);
    EXPECT_EQ(a[i].I, b[i].I);
    EXPECT_EQ(a[i].tag, b[i].tag);
    EXPECT_EQ(a[i].weight, b[i].weight);
    EXPECT_EQ(a[i].count, b[i].count);
  }
}

TEST(Exact, BudgetReportsAttemptedSize) {
  TorusLattice lat(4, 2);
  try {
    exact_density(lat, {4, 8, {}}, 0, {1000, 1});
    FAIL() << "expected BudgetExceeded";
  } catch (const BudgetExceeded& e) {
    EXPECT_EQ(e.attempted(), 855297u);
    EXPECT_EQ(e.limit(), 1000u);
  }
  EXPECT_THROW(exact_density(lat, {-1, 8, {}}), PreconditionError);
}

TEST(Exact, AdjacentPairClosedForm) {
  TorusLattice lat(5, 2);
  const double alpha = 0.7, lambda = 1.3;
  // inside {u, v} only the two 2-loops fit; both together give C = 4, I = 2
  const double expected = std::log(1.0 + std::exp(-2 * alpha) + std::exp(-4 * alpha - 2 * lambda) / 4.0);
  EXPECT_NEAR(restricted_Z(lat, {0, 1}, Params::alpha_lambda(alpha, lambda), {6, -1, {}}), expected, 1e-14);
  EXPECT_NEAR(restricted_Z(lat, {7}, Params::alpha_lambda(alpha, lambda), {6, -1, {}}), 0.0, 0.0);
}

TEST(Exact, NonInteractingOriginLawFactorises) {
  TorusLattice lat(4, 2);
  TruncationPolicy trunc{6, -1, {0, 5, 10}};
  const double rho = 0.35;
  const ExactSummary s = exact_summary(lat, Params::rho_nu(rho, 0.0), trunc, 5);
  std::vector<double> single(7, 0.0);
  double z = 0.0;
  const CandidateLists pools = polygon_pools(lat, 6);
  for (const Polygon& p : pools[5]) {
    const double w = p.is_empty() ? 1.0 : std::exp(-rho * p.length()) / p.length();
    single[p.length()] += w;
    z += w;
  }
  double total = 0.0;
  for (std::size_t k = 0; k < single.size(); ++k) {
    EXPECT_NEAR(s.origin_length_law.at(k), single[k] / z, 1e-14) << k;
    total += s.origin_length_law[k];
  }
  EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(Exact, RestrictedToWholeTorusIsFullPartition) {
  TorusLattice lat(4, 2);
  std::vector<VertexIndex> all(16);
  for (VertexIndex v = 0; v < 16; ++v) all[v] = v;
  const Params p = Params::alpha_lambda(0.8, 0.3);
  EXPECT_NEAR(restricted_Z(lat, all, p, {4, 6, {}}), exact_summary(lat, p, {4, 6, {}}).log_Z, 1e-12);
}
