#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "isap/exact.hpp"
#include "isap/model.hpp"

using namespace isap;

namespace {

// Totals straight from the definitions: coverage multiplicities per vertex.
Observables brute_observables(const Configuration& cfg) {
  std::vector<int> cover(cfg.volume(), 0);
  Observables o;
  for (VertexIndex v = 0; v < cfg.volume(); ++v) {
    const Polygon& p = cfg.polygon(v);
    o.C += static_cast<std::int64_t>(p.length());
    if (!p.is_empty()) o.log_lengths += std::log(static_cast<double>(p.length()));
    for (VertexIndex w : p.cycle()) ++cover[w];
  }
  for (int c : cover) {
    o.I += std::max(c - 1, 0);
    o.N += c == 0;
  }
  return o;
}

}  // namespace

TEST(Params, FormsAreRelated) {
  Params a = Params::alpha_lambda(1.25, -0.5);
  EXPECT_DOUBLE_EQ(a.rho(), 0.75);
  EXPECT_DOUBLE_EQ(a.nu(), -0.5);
  Params r = Params::rho_nu(2.0, 0.5);
  EXPECT_DOUBLE_EQ(r.alpha(), 1.5);
  EXPECT_DOUBLE_EQ(r.lambda(), 0.5);
  EXPECT_EQ(r.as_alpha_lambda().form(), Params::Form::kAlphaLambda);
  EXPECT_THROW(Params::alpha_lambda(NAN, 0.0), PreconditionError);
  EXPECT_THROW(Params::rho_nu(0.0, INFINITY), PreconditionError);
}

TEST(Params, RoundTripWithinOneRounding) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int i = 0; i < 1000; ++i) {
    const double a = u(rng), l = u(rng);
    Params back = Params::alpha_lambda(a, l).as_rho_nu().as_alpha_lambda();
    EXPECT_NEAR(back.alpha(), a, 1e-15 * std::max({1.0, std::abs(a), std::abs(l)}));
    EXPECT_EQ(back.lambda(), l);
  }
}

TEST(Configuration, EmptyConfiguration) {
  Configuration cfg(std::make_shared<TorusLattice>(4, 2));
  EXPECT_EQ(cfg.observables().C, 0);
  EXPECT_EQ(cfg.observables().I, 0);
  EXPECT_EQ(cfg.observables().N, 16);
  EXPECT_EQ(energy(cfg, Params::alpha_lambda(1.0, 2.0)), 0.0);
  EXPECT_DOUBLE_EQ(energy(cfg, Params::rho_nu(3.0, 2.0)), 32.0);
}

TEST(Configuration, TwoOverlappingSquares) {
  auto lat = std::make_shared<TorusLattice>(5, 2);
  Configuration cfg(lat);
  auto v = [&](int x, int y) { return lat->index({x, y}); };
  cfg.assign(v(0, 0), Polygon(v(0, 0), {v(0, 0), v(1, 0), v(1, 1), v(0, 1)}));
  cfg.assign(v(1, 0), Polygon(v(1, 0), {v(1, 0), v(2, 0), v(2, 1), v(1, 1)}));
  // Coverage: (1,0) and (1,1) twice, four other vertices once.
  EXPECT_EQ(cfg.observables().C, 8);
  EXPECT_EQ(cfg.observables().I, 2);
  EXPECT_EQ(cfg.observables().N, 25 - 6);
  EXPECT_EQ(cfg.occupancy(v(1, 1)), 2);
  const double H = energy(cfg, Params::alpha_lambda(0.5, 0.25));
  EXPECT_NEAR(H, 0.5 * 8 + 0.25 * 2 + 2 * std::log(4.0), 1e-14);
  auto mask = unvisited_by_others(cfg, v(0, 0));
  EXPECT_EQ(mask[v(0, 0)], 1);
  EXPECT_EQ(mask[v(1, 0)], 0);
  EXPECT_EQ(mask[v(0, 1)], 1);
  EXPECT_EQ(mask[v(4, 4)], 1);
}

TEST(Configuration, RandomReplacementsKeepIdentities) {
  auto lat = std::make_shared<TorusLattice>(5, 2);
  CandidateLists pools = polygon_pools(*lat, 8);
  Configuration cfg(lat);
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> ua(-1.0, 2.0), ul(-2.0, 2.0);
  const std::int64_t V = 25;
  for (int step = 0; step < 10'000; ++step) {
    VertexIndex x = static_cast<VertexIndex>(rng() % V);
    const Polygon& cand = pools[x][rng() % pools[x].size()];
    const Params p = Params::alpha_lambda(ua(rng), ul(rng));
    const double before = energy(cfg, p);
    const double predicted = cfg.energy_delta(x, cand, p);
    cfg.replace(x, cand);
    const double after = energy(cfg, p);
    ASSERT_NEAR(after - before, predicted, 1e-9 * std::max(1.0, std::abs(after)));
    Observables o = brute_observables(cfg);
    ASSERT_EQ(cfg.observables(), o);
    ASSERT_EQ(o.I, o.C - V + o.N);
    ASSERT_NEAR(energy(cfg, p.as_rho_nu()), energy(cfg, p) + p.lambda() * V, 1e-9 * std::max(1.0, std::abs(after)));
  }
  EXPECT_TRUE(cfg.coherent());
}

TEST(Configuration, AssignRejectsInvalidPolygons) {
  auto lat = std::make_shared<TorusLattice>(4, 2);
  Configuration cfg(lat);
  EXPECT_THROW(cfg.assign(0, Polygon(0, {0, 2})), PreconditionError);
  EXPECT_THROW(cfg.replace(1, Polygon(0, {0, 1})), PreconditionError);
}

TEST(Configuration, DumpLoadRoundTrip) {
  auto lat = std::make_shared<TorusLattice>(6, 2);
  CandidateLists pools = polygon_pools(*lat, 6);
  Configuration cfg(lat);
  std::mt19937_64 rng(5);
  for (VertexIndex v = 0; v < 36; v += 3) cfg.replace(v, pools[v][rng() % pools[v].size()]);
  std::stringstream ss;
  dump_configuration(ss, cfg);
  Configuration back = load_configuration(ss);
  ASSERT_EQ(back.volume(), cfg.volume());
  for (VertexIndex v = 0; v < 36; ++v) EXPECT_EQ(back.polygon(v), cfg.polygon(v)) << v;
  EXPECT_EQ(back.observables(), cfg.observables());
}

TEST(Configuration, LoadRejectsMalformedInput) {
  std::stringstream no_header("L 4\nd 2\n");
  EXPECT_THROW(load_configuration(no_header), PreconditionError);
  std::stringstream twice("# isap-config v1\nL 4\nd 2\n0,0 : 0,0 1,0\n0,0 : 0,0 0,1\n");
  EXPECT_THROW(load_configuration(twice), PreconditionError);
  std::stringstream bad("# isap-config v1\nL 4\nd 2\n0,0 : 0,0 2,0\n");
  EXPECT_THROW(load_configuration(bad), PreconditionError);
}
