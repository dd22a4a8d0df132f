#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "isap/bounds.hpp"

using namespace isap;
using namespace isap::bounds;

namespace {
const double kMus[] = {1.5, 2.38964, 2.638, 4.68};
}

TEST(Bounds, G) {
  EXPECT_DOUBLE_EQ(g(0.0), std::log(2.0));
  EXPECT_NEAR(g(1.0), std::log(1 + std::exp(-2.0)), 1e-15);
  EXPECT_GT(g(0.3), g(0.4));
}

TEST(Bounds, AlphaStarSolvesItsEquation) {
  for (double mu : kMus) {
    const double a = alpha_star(mu);
    EXPECT_NEAR(a + g(a) / 5.0, std::log(mu), 1e-14) << mu;
    EXPECT_LT(a, std::log(mu));
  }
  EXPECT_THROW(alpha_star(1.0), PreconditionError);
}

TEST(Bounds, QIsTheSmallestFeasibleChoice) {
  for (double mu : kMus) {
    const double q = q_choice(mu);
    const double rhs = g(alpha_star(mu)) / 30.0;
    EXPECT_GE(q, 5.0 / 6.0);
    EXPECT_LE(q_constraint(q), rhs);
    if (q > 5.0 / 6.0) EXPECT_GT(q_constraint(q - 1e-12), rhs) << mu;
  }
}

TEST(Bounds, AlphaCShape) {
  for (double mu : kMus) {
    PhaseCurves pc(mu);
    EXPECT_DOUBLE_EQ(pc.alpha_c(0.0), std::log(mu));
    EXPECT_DOUBLE_EQ(pc.alpha_c(-1.5), std::log(mu) + 1.5);
    double prev = pc.alpha_c(0.0);
    for (double l = 0.05; l < 2000.0; l *= 1.3) {
      const double a = pc.alpha_c(l);
      EXPECT_LE(a, prev);
      EXPECT_GE(a, pc.alpha_star);
      prev = a;
    }
    EXPECT_DOUBLE_EQ(pc.alpha_c(1e6), pc.alpha_star);
    EXPECT_DOUBLE_EQ(pc.c1(), 1 - pc.q);
    EXPECT_DOUBLE_EQ(pc.c2(), pc.alpha_star);
    EXPECT_DOUBLE_EQ(alpha_c(0.7, mu), pc.alpha_c(0.7));
  }
}

TEST(Bounds, AboveAlphaCOneRateExceedsLogMu) {
  std::mt19937_64 rng(8);
  for (double mu : kMus) {
    PhaseCurves pc(mu);
    std::uniform_real_distribution<double> ul(0.0, 50.0), ud(1e-6, 3.0);
    for (int i = 0; i < 2000; ++i) {
      const double lambda = ul(rng), alpha = pc.alpha_c(lambda) + ud(rng);
      EXPECT_TRUE(pc.b1(alpha, lambda) > pc.log_mu || pc.b2(alpha) > pc.log_mu)
          << "mu=" << mu << " alpha=" << alpha << " lambda=" << lambda;
    }
  }
}

TEST(Bounds, SmallFormulas) {
  EXPECT_DOUBLE_EQ(b1(1.0, 2.0, 0.9), 1.2);
  EXPECT_DOUBLE_EQ(lambda_0(0.5, 1.0), std::log(0.25) - 2.0);
  EXPECT_NEAR(b2(1.0, 0.9), 1.0 + 0.35 * g(1.0) - 0.1 * (1 - std::log(0.1)), 1e-15);
  EXPECT_THROW(b2(1.0, 1.0), PreconditionError);
  for (double c : {0.1, 0.5, 0.9}) EXPECT_NEAR(q_of_c(c), c * std::pow(1 - c, 1 / c) / std::exp(1.0), 1e-15);
  EXPECT_THROW(q_of_c(0.0), PreconditionError);
}

TEST(Bounds, LambdaSfMatchesDenseGrid) {
  for (double mu : {2.38964, 2.638}) {
    const double lm = std::log(mu);
    for (double alpha : {lm, lm + 0.01, lm + 0.3, lm + 2.0}) {
      double best = -INFINITY;
      for (int i = 1; i < 1'000'000; ++i) best = std::max(best, lambda_sf_objective(i * 1e-6, alpha, lm));
      const double v = lambda_sf(alpha, mu);
      EXPECT_GE(v, std::min(0.0, best) - 1e-15);
      EXPECT_NEAR(v, std::min(0.0, best), 1e-9) << alpha;
    }
    EXPECT_DOUBLE_EQ(lambda_sf(lm - 0.5, mu), 0.5);
  }
}

// Actual behaviour at alpha = log mu: the two branches do not meet.
TEST(Bounds, LambdaSfJumpsAtLogMu) {
  const double mu = 2.638, lm = std::log(mu);
  EXPECT_NEAR(lambda_sf(std::nextafter(lm, 0.0), mu), 0.0, 1e-15);
  EXPECT_LT(lambda_sf(lm, mu), -1.0);
}
